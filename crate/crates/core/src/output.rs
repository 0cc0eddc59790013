//! Plain CSV emission with fixed float formatting.
//!
//! Floats are written with 17 significant digits in scientific notation,
//! lines end in `\n`, and every file opens with `#` lines describing the
//! configuration that produced it, so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::vec3::Vec3;

/// `{:.16e}` formatting, 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<String>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        CsvTable { header: header.iter().map(|h| h.as_ref().to_string()).collect(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for line in &self.footer {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.render())
    }
}

/// Three formatted components.
pub fn vec_cells(v: Vec3) -> [String; 3] {
    [num(v.x), num(v.y), num(v.z)]
}
