//! Reading temporal edge lists (SNAP-style text), converting edges into
//! edge-end sequences, train/test splitting at edge granularity, forgetting
//! the order for unlabeled-graph experiments, and a binary end cache for
//! fast re-runs.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    canonical_relabel, degrees_from_ends, ArrivalTimes, EdgeEndSequence, OrderedDegrees,
    UnlabeledObservation,
};

/// One parsed edge record. `ts` is zero when the input has no timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: u64,
    pub dst: u64,
    pub ts: i64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Whether a third whitespace-separated timestamp column is required.
    pub timestamps: bool,
    pub drop_self_loops: bool,
    /// Drop repeated (src, dst, ts) triples after their first occurrence.
    pub drop_duplicates: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            timestamps: true,
            drop_self_loops: false,
            drop_duplicates: false,
        }
    }
}

/// Parse counts reported next to the edges for diagnosing preprocessing
/// discrepancies between published numbers and raw files.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct IngestCounts {
    pub lines: u64,
    pub comments: u64,
    pub edges: u64,
    pub self_loops_dropped: u64,
    pub duplicates_dropped: u64,
}

#[derive(Debug, Clone)]
pub struct ParsedEdges {
    pub edges: Vec<EdgeRecord>,
    pub counts: IngestCounts,
}

/// Parses a whitespace-separated `src dst [timestamp]` stream, skipping
/// `#`-prefixed comment lines, and stably sorts by timestamp so equal
/// timestamps keep input order.
pub fn parse_edge_list<R: BufRead>(reader: R, opts: &IngestOptions) -> Result<ParsedEdges> {
    let mut edges = Vec::new();
    let mut counts = IngestCounts::default();
    let mut seen: HashSet<(u64, u64, i64)> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx as u64 + 1;
        counts.lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            counts.comments += 1;
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let src: u64 = parts
            .next()
            .ok_or_else(|| parse_err(line_no, "missing source"))?
            .parse()
            .map_err(|_| parse_err(line_no, "source is not an integer"))?;
        let dst: u64 = parts
            .next()
            .ok_or_else(|| parse_err(line_no, "missing destination"))?
            .parse()
            .map_err(|_| parse_err(line_no, "destination is not an integer"))?;
        let ts: i64 = if opts.timestamps {
            parts
                .next()
                .ok_or_else(|| parse_err(line_no, "missing timestamp"))?
                .parse()
                .map_err(|_| parse_err(line_no, "timestamp is not an integer"))?
        } else {
            0
        };
        if opts.drop_self_loops && src == dst {
            counts.self_loops_dropped += 1;
            continue;
        }
        if opts.drop_duplicates && !seen.insert((src, dst, ts)) {
            counts.duplicates_dropped += 1;
            continue;
        }
        edges.push(EdgeRecord { src, dst, ts });
    }
    if edges.is_empty() {
        return Err(Error::EmptySequence);
    }
    edges.sort_by_key(|e| e.ts); // stable: ties keep input order
    counts.edges = edges.len() as u64;
    Ok(ParsedEdges { edges, counts })
}

fn parse_err(line: u64, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

/// Opens a path as a buffered reader, transparently decompressing gzip
/// (detected by magic bytes, not extension).
pub fn open_edge_stream(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 2];
    let got = file.read(&mut magic)?;
    let file = {
        use std::io::Seek;
        let mut f = file;
        f.seek(std::io::SeekFrom::Start(0))?;
        f
    };
    if got == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(flate2::read::GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Order of the two ends within one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndOrder {
    /// Source end first, as listed.
    SrcFirst,
    /// Coin-flip per edge, seeded for reproducibility.
    Random { seed: u64 },
}

/// Flattens ordered edges into an edge-end sequence (two ends per edge) with
/// canonical arrival labels. Returns the original label of each canonical
/// vertex id.
pub fn ends_from_edges(
    edges: &[EdgeRecord],
    order: EndOrder,
) -> Result<(EdgeEndSequence, Vec<u64>)> {
    let mut raw = Vec::with_capacity(edges.len() * 2);
    match order {
        EndOrder::SrcFirst => {
            for e in edges {
                raw.push(e.src);
                raw.push(e.dst);
            }
        }
        EndOrder::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for e in edges {
                if rng.random::<bool>() {
                    raw.push(e.src);
                    raw.push(e.dst);
                } else {
                    raw.push(e.dst);
                    raw.push(e.src);
                }
            }
        }
    }
    canonical_relabel(&raw)
}

/// Prefix/suffix split at edge granularity. The test part keeps the labels
/// it had in the full sequence, so test vertices first seen after the split
/// carry ids above the train vertex count.
pub fn split_train_test(z: &EdgeEndSequence, fraction: f64) -> Result<(EdgeEndSequence, Vec<u64>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::BadArgument(format!(
            "split fraction {fraction} must lie in (0, 1)"
        )));
    }
    if z.len() % 2 != 0 {
        return Err(Error::DegenerateSplit(
            "edge-granularity split needs an even number of ends".into(),
        ));
    }
    let edges = z.len() / 2;
    let train_edges = (edges as f64 * fraction).round() as usize;
    if train_edges == 0 || train_edges >= edges {
        return Err(Error::DegenerateSplit(format!(
            "{train_edges} train edges out of {edges}"
        )));
    }
    let cut = train_edges * 2;
    let train = z.prefix(cut)?;
    let test = z.ends()[cut..].to_vec();
    Ok((train, test))
}

/// Everything that was discarded when forgetting the order; kept for error
/// metrics in synthetic studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HiddenTruth {
    /// External id assigned to each arrival slot (the true permutation).
    pub external_of_arrival: Vec<u32>,
    pub times: ArrivalTimes,
    pub degrees: OrderedDegrees,
}

/// Forgets arrival order: returns the degree multiset under fresh external
/// ids in a seeded random presentation order, plus the hidden truth.
pub fn forget_order(z: &EdgeEndSequence, seed: u64) -> (UnlabeledObservation, HiddenTruth) {
    let (d, t) = degrees_from_ends(z);
    let k = d.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut external_of_arrival: Vec<u32> = (0..k as u32).collect();
    external_of_arrival.shuffle(&mut rng);
    let mut degrees_by_external = vec![0u64; k];
    for (slot, &e) in external_of_arrival.iter().enumerate() {
        degrees_by_external[e as usize] = d.degrees()[slot];
    }
    (
        UnlabeledObservation::new(degrees_by_external).expect("degrees positive"),
        HiddenTruth {
            external_of_arrival,
            times: t,
            degrees: d,
        },
    )
}

/// Binary end-sequence cache: magic, version, n, K, then the ends as
/// zigzag-varint deltas from the previous end.
pub mod cache {
    use super::*;

    const MAGIC: &[u8; 8] = b"BNTLENDS";
    const VERSION: u32 = 1;

    pub fn write_ends<W: Write>(z: &EdgeEndSequence, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(z.len() as u64).to_le_bytes())?;
        w.write_all(&z.num_vertices().to_le_bytes())?;
        let mut prev = 0i64;
        let mut buf = Vec::with_capacity(z.len() * 2);
        for &e in z.ends() {
            let delta = e as i64 - prev;
            write_varint(zigzag(delta), &mut buf);
            prev = e as i64;
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_ends<R: Read>(mut r: R) -> Result<EdgeEndSequence> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::CacheFormat("truncated header".into()))?;
        if &magic != MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        if u32::from_le_bytes(word) != VERSION {
            return Err(Error::CacheFormat("unsupported version".into()));
        }
        let mut qword = [0u8; 8];
        r.read_exact(&mut qword)?;
        let n = u64::from_le_bytes(qword) as usize;
        r.read_exact(&mut qword)?;
        let _k = u64::from_le_bytes(qword);
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let mut ends = Vec::with_capacity(n);
        let mut prev = 0i64;
        let mut cursor = 0usize;
        for _ in 0..n {
            let (v, used) = read_varint(&body[cursor..])
                .ok_or_else(|| Error::CacheFormat("truncated varint body".into()))?;
            cursor += used;
            prev += unzigzag(v);
            if prev <= 0 {
                return Err(Error::CacheFormat("non-positive vertex id".into()));
            }
            ends.push(prev as u64);
        }
        EdgeEndSequence::new(ends)
    }

    fn zigzag(v: i64) -> u64 {
        ((v << 1) ^ (v >> 63)) as u64
    }

    fn unzigzag(v: u64) -> i64 {
        ((v >> 1) as i64) ^ -((v & 1) as i64)
    }

    fn write_varint(mut v: u64, out: &mut Vec<u8>) {
        loop {
            let byte = (v & 0x7f) as u8;
            v >>= 7;
            if v == 0 {
                out.push(byte);
                return;
            }
            out.push(byte | 0x80);
        }
    }

    fn read_varint(buf: &[u8]) -> Option<(u64, usize)> {
        let mut v = 0u64;
        let mut shift = 0u32;
        for (i, &b) in buf.iter().enumerate() {
            v |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Some((v, i + 1));
            }
            shift += 7;
            if shift >= 64 {
                return None;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn parse_sorts_stably_by_timestamp() {
        let text = "# comment\n1 2 10\n2 3 5\n1 3 5\n";
        let parsed = parse_edge_list(Cursor::new(text), &IngestOptions::default()).unwrap();
        let pairs: Vec<(u64, u64)> = parsed.edges.iter().map(|e| (e.src, e.dst)).collect();
        assert_eq!(pairs, vec![(2, 3), (1, 3), (1, 2)]);
        assert_eq!(parsed.counts.comments, 1);
        assert_eq!(parsed.counts.edges, 3);
    }

    #[test]
    fn parse_reports_line_numbers_on_errors() {
        let text = "1 2 10\n1 x 3\n";
        match parse_edge_list(Cursor::new(text), &IngestOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_filters_when_asked() {
        let text = "1 1 1\n1 2 2\n1 2 2\n";
        let opts = IngestOptions {
            timestamps: true,
            drop_self_loops: true,
            drop_duplicates: true,
        };
        let parsed = parse_edge_list(Cursor::new(text), &opts).unwrap();
        assert_eq!(parsed.edges.len(), 1);
        assert_eq!(parsed.counts.self_loops_dropped, 1);
        assert_eq!(parsed.counts.duplicates_dropped, 1);
    }

    #[test]
    fn ends_from_edges_examples() {
        let edges = vec![
            EdgeRecord { src: 10, dst: 20, ts: 0 },
            EdgeRecord { src: 10, dst: 30, ts: 1 },
        ];
        let (z, labels) = ends_from_edges(&edges, EndOrder::SrcFirst).unwrap();
        assert_eq!(z.ends(), &[1, 2, 1, 3]);
        assert_eq!(labels, vec![10, 20, 30]);

        let loop_edge = vec![EdgeRecord { src: 7, dst: 7, ts: 0 }];
        let (z, _) = ends_from_edges(&loop_edge, EndOrder::SrcFirst).unwrap();
        assert_eq!(z.ends(), &[1, 1]);

        // Degree sum is twice the edge count.
        let (d, _) = degrees_from_ends(&z);
        assert_eq!(d.n(), 2);
    }

    #[test]
    fn split_examples() {
        let ends: Vec<u64> = vec![1, 2, 1, 3, 2, 3, 1, 4, 2, 2, 4, 1, 3, 3, 1, 2, 4, 4, 2, 1];
        let z = EdgeEndSequence::new(ends).unwrap();
        let (train, test) = split_train_test(&z, 0.8).unwrap();
        assert_eq!(train.len(), 16);
        assert_eq!(test.len(), 4);
        // Test part keeps whole-sequence labels.
        assert_eq!(&test, &z.ends()[16..]);
        assert!(split_train_test(&z, 0.01).is_err());

        let odd = EdgeEndSequence::new(vec![1, 1, 2]).unwrap();
        assert!(split_train_test(&odd, 0.5).is_err());
    }

    #[test]
    fn forget_order_is_seeded_and_consistent() {
        let z = EdgeEndSequence::new(vec![1, 2, 1, 3, 2]).unwrap();
        let (obs, truth) = forget_order(&z, 99);
        let (obs2, _) = forget_order(&z, 99);
        assert_eq!(obs, obs2);
        let mut sorted_obs = obs.degrees().to_vec();
        sorted_obs.sort_unstable();
        assert_eq!(sorted_obs, vec![1, 2, 2]);
        assert_eq!(truth.times.times(), &[1, 2, 4]);
        // Truth permutation maps arrival degrees onto external ones.
        for (slot, &e) in truth.external_of_arrival.iter().enumerate() {
            assert_eq!(obs.degrees()[e as usize], truth.degrees.degrees()[slot]);
        }
    }

    #[test]
    fn cache_round_trip() {
        let z = EdgeEndSequence::new(vec![1, 2, 1, 3, 2, 3, 3, 1, 4, 2]).unwrap();
        let mut buf = Vec::new();
        cache::write_ends(&z, &mut buf).unwrap();
        let back = cache::read_ends(Cursor::new(&buf)).unwrap();
        assert_eq!(back, z);

        let mut corrupted = buf.clone();
        corrupted[0] = b'X';
        assert!(cache::read_ends(Cursor::new(&corrupted)).is_err());
    }

    #[test]
    fn gzip_detection_by_magic() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt.gz");
        let f = std::fs::File::create(&path).unwrap();
        let mut enc = GzEncoder::new(f, Compression::default());
        enc.write_all(b"1 2 3\n2 3 4\n").unwrap();
        enc.finish().unwrap();
        let reader = open_edge_stream(&path).unwrap();
        let parsed = parse_edge_list(reader, &IngestOptions::default()).unwrap();
        assert_eq!(parsed.edges.len(), 2);
    }
}
