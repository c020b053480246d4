//! Report assembly and all-or-nothing file output.

use std::fs;
use std::path::Path;

use maxpsh::CONVENTION_BANNER;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Failure;
use crate::run::Artifacts;

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn report(kind: &str, hash: &str, seed: u64, result: &Value) -> Value {
    json!({
        "tool": "maxpsh",
        "version": env!("CARGO_PKG_VERSION"),
        "convention": CONVENTION_BANNER,
        "config_sha256": hash,
        "kind": kind,
        "seed": seed,
        "result": result,
    })
}

fn with_header(hash: &str, body: &str) -> String {
    format!("# convention: {CONVENTION_BANNER}\n# config_sha256: {hash}\n{body}")
}

/// Write every file to a temporary name first and rename only once all
/// writes succeeded, so a failed run leaves no partial outputs behind.
pub fn write_all(dir: &Path, hash: &str, report: &Value, a: &Artifacts) -> Result<(), Failure> {
    let mut files = vec![("report.json", serde_json::to_string_pretty(report).expect("report serializes") + "\n")];
    if let Some(s) = &a.scan_csv {
        files.push(("scan.csv", with_header(hash, s)));
    }
    if let Some(s) = &a.density_csv {
        files.push(("density.csv", with_header(hash, s)));
    }
    fs::create_dir_all(dir)?;
    let staged: Vec<_> = files.iter().map(|(name, _)| dir.join(format!(".{name}.partial"))).collect();
    let result = files.iter().zip(&staged).try_for_each(|((_, body), tmp)| fs::write(tmp, body));
    if let Err(e) = result {
        for tmp in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e.into());
    }
    for ((name, _), tmp) in files.iter().zip(&staged) {
        fs::rename(tmp, dir.join(name))?;
    }
    Ok(())
}

pub fn table(kind: &str, hash: &str, rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0).max(6);
    let mut out = format!("{kind}  [{CONVENTION_BANNER}]  config {}\n", &hash[..12]);
    for (k, v) in rows {
        out.push_str(&format!("  {k:<width$}  {v}\n"));
    }
    out.pop();
    out
}
