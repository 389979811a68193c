//! Config-file support: a plain `key = value` file whose keys are the long
//! flag names. Values from the file are appended to the argument vector
//! only when the flag is absent, so explicit flags always win.

use anyhow::{bail, Context, Result};

pub fn expand_argv(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config") else {
        if let Some(inline) = argv.iter().find(|a| a.starts_with("--config=")) {
            let path = inline.trim_start_matches("--config=").to_string();
            return merge(argv, &path);
        }
        return Ok(argv);
    };
    let Some(path) = argv.get(pos + 1).cloned() else {
        bail!("--config needs a file path");
    };
    merge(argv, &path)
}

fn merge(mut argv: Vec<String>, path: &str) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading config file {path}"))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {} is not `key = value`", lineno + 1);
        };
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            bail!("config line {} has an empty key", lineno + 1);
        }
        let flag = format!("--{key}");
        let already = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if already {
            continue;
        }
        if value.eq_ignore_ascii_case("true") {
            argv.push(flag);
        } else if value.eq_ignore_ascii_case("false") {
            // Absent boolean flags default to false; nothing to add.
        } else {
            argv.push(flag);
            argv.push(value.to_string());
        }
    }
    Ok(argv)
}
