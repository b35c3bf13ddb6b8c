//! CSV conventions shared by every writer: header row, `.` decimals and LF
//! line endings, shortest round-trip float formatting.

use std::fs::File;
use std::path::Path;

use crate::error::Result;

pub(crate) fn writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub(crate) fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub(crate) fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}
