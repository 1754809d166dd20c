//! Plain numeric CSV matrices with `#` comment lines.
//!
//! Values are written with the shortest representation that parses back to
//! the identical `f64`, so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A parsed numeric table together with its leading comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Comment lines without the leading `#` and surrounding whitespace.
    pub comments: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_rows(comments: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write_matrix(path: &Path, comments: &[String], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, format_rows(comments, rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_table(path: &Path, text: &str) -> Result<Table> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if rows.is_empty() {
                comments.push(c.trim().to_string());
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("bad number {:?}: {e}", field.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { comments, rows })
}

pub fn read_matrix(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(path, &text)
}

/// Header line plus rows of mixed labelled columns, for record-style tables.
pub fn format_records(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
