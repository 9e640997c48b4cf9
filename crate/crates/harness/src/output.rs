//! Atomic file writes and the CSV layout shared by every results table.
//!
//! A table file is a single `#` comment line (tool version and generation
//! time, the only part that changes between identical runs), a header row
//! of `name [unit]` columns, then the data rows. Floats use the shortest
//! representation that round-trips.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{io_err, Result};

/// Writes `bytes` to a sibling temp file, syncs it and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let mut file = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
    file.write_all(bytes).map_err(io_err(&tmp))?;
    file.sync_all().map_err(io_err(&tmp))?;
    drop(file);
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// One results table held in memory until written.
#[derive(Clone, Debug)]
pub struct Table {
    columns: Vec<(&'static str, &'static str)>,
    rows: Vec<Vec<String>>,
}

/// Cell formatting for table rows.
pub fn num(v: f64) -> String {
    format!("{v}")
}

impl Table {
    /// `columns` are `(name, unit)` pairs; use `"1"` for dimensionless.
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header row and data rows, without the comment line.
    pub fn body(&self) -> String {
        let mut out = String::new();
        let head: Vec<String> = self.columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        out.push_str(&head.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut text = String::new();
        let _ = writeln!(text, "# platelab {} generated_unix={secs}", env!("CARGO_PKG_VERSION"));
        text.push_str(&self.body());
        write_atomic(path, text.as_bytes())
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Strips the leading comment line of a table file.
pub fn csv_body(text: &str) -> &str {
    match text.strip_prefix('#') {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new(&[("sigma", "1/s"), ("note", "-")]);
        t.push(vec![num(0.5), "a, b".into()]);
        assert_eq!(t.body(), "sigma [1/s],note [-]\n0.5,\"a, b\"\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results/t.csv");
        t.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# platelab "));
        assert_eq!(csv_body(&text), t.body());
        let leftovers: Vec<_> = std::fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
