use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn emit(out: Option<&Path>, contents: &str) -> io::Result<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => io::stdout().lock().write_all(contents.as_bytes()),
    }
}

pub fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Run report with sorted keys.
pub fn report(command: &str, config: Value, result: impl Serialize) -> String {
    let value = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": serde_json::to_value(result).expect("report serializes"),
    });
    serde_json::to_string_pretty(&value).expect("report serializes") + "\n"
}
