//! Output-directory plumbing: manifest and JSON/CSV writers.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Settings;

/// Serialize `value` as pretty JSON with a trailing newline.
pub fn to_json_string(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Create the output directory and drop `manifest.json` into it: the
/// subcommand, its arguments, and the fully resolved config (auto gamma
/// already numeric) — enough to repeat the run exactly.
pub fn prepare_out_dir(
    settings: &Settings,
    command: &str,
    args: serde_json::Value,
) -> Result<PathBuf> {
    let dir = settings.out_dir();
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let manifest = serde_json::json!({
        "command": command,
        "args": args,
        "config": settings.resolved,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(dir)
}

/// Milliseconds elapsed since `start`, for summary files. This is the only
/// nondeterministic field any output file contains.
pub fn wall_ms(start: std::time::Instant) -> u64 {
    start.elapsed().as_millis() as u64
}
