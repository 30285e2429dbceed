//! Point files, CSV rows and atomic output.
//!
//! Points are one per line, coordinates space separated, printed with the
//! shortest decimal that round-trips the `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifold::Point;

pub fn format_point(p: &Point) -> String {
    let mut s = String::new();
    for (i, c) in p.coords().iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{c}").expect("writing to a String cannot fail");
    }
    s
}

pub fn format_points(points: &[Point]) -> String {
    points.iter().map(|p| format_point(p) + "\n").collect()
}

pub fn parse_point(line: &str) -> Result<Point> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coordinate `{t}`")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Point::new)
}

/// Parses a point file; blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Point>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_point)
        .collect()
}

pub fn read_points(path: &Path) -> Result<Vec<Point>> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)
}

/// CSV with a header of coordinate columns followed by `label`.
pub fn points_csv<'a>(rows: impl IntoIterator<Item = (&'a Point, &'a str)>) -> String {
    let rows: Vec<_> = rows.into_iter().collect();
    let width = rows.iter().map(|(p, _)| p.len()).max().unwrap_or(0);
    let mut out = String::new();
    for i in 0..width {
        write!(out, "x{i},").unwrap();
    }
    out.push_str("label\n");
    for (p, label) in rows {
        for c in p.coords() {
            write!(out, "{c},").unwrap();
        }
        writeln!(out, "{label}").unwrap();
    }
    out
}

/// Writes `contents` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
