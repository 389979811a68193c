//! Run manifests: tool version, the exact argument vector, and SHA-256
//! digests of the inputs, written next to every command's outputs so runs
//! can be reproduced and compared byte for byte.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub args: Vec<String>,
    pub inputs: Vec<InputDigest>,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn write_manifest(dir: &Path, argv: &[String], inputs: &[&Path]) -> Result<()> {
    let mut digests = Vec::new();
    for path in inputs {
        let data = std::fs::read(path)
            .with_context(|| format!("digesting input {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&data);
        digests.push(InputDigest {
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: hex_string(&hasher.finalize()),
        });
    }
    let manifest = Manifest {
        tool: "bntl",
        version: env!("CARGO_PKG_VERSION"),
        args: argv.to_vec(),
        inputs: digests,
    };
    let out = dir.join("manifest.json");
    std::fs::write(&out, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn hex_string(bytes: &[u8]) -> String {
    use std::fmt::Write as _;
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
