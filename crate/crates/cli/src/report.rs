use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Every report carries the resolved configuration and the code version.
/// The wall-clock time lives under its own key, written last, so reports
/// from identical runs differ only on that line.
pub fn envelope(kind: &str, config: Value, result: impl Serialize) -> Result<String> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = json!({
        "kind": kind,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "result": serde_json::to_value(result)?,
        "timestamp": stamp,
    });
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Sidecar path for plot series: `report.json` -> `report.plot.csv`.
pub fn plot_path(out: Option<&Path>, fallback: &str) -> std::path::PathBuf {
    match out {
        Some(p) => p.with_extension("plot.csv"),
        None => std::path::PathBuf::from(fallback),
    }
}
