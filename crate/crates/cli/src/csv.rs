//! CSV emission with a stable schema: fixed header names, 17-significant-
//! digit values, LF line endings, empty cells for absent optionals.

use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    F(f64),
    U(u64),
    S(String),
    Empty,
}

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_csv(header: &[&str], rows: &[Vec<Field>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row
            .iter()
            .map(|f| match f {
                Field::F(x) => format_value(*x),
                Field::U(u) => u.to_string(),
                Field::S(s) => s.clone(),
                Field::Empty => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content.as_bytes())
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// Stable tag for embedding a float in a file name (e.g. gamma values).
pub fn float_tag(x: f64) -> String {
    format!("{x:e}").replace('-', "m")
}
