//! Comment-headed CSV tables.
//!
//! ```text
//! # key=value
//! # ...
//! col_a,col_b
//! 1.0000000000000000e0,2.5000000000000000e-1
//! ```
//!
//! Reals are written with 17 significant digits, which reproduces every
//! `f64` exactly on reading.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("non-finite value {value} in column `{column}`")]
    NonFinite { column: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { metadata: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta_real(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, format_real(value))
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String, TableError> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.columns.len() {
                return Err(TableError::Ragged { row: i, expected: self.columns.len(), found: r.len() });
            }
            if let Some((j, &v)) = r.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(TableError::NonFinite { column: self.columns[j].clone(), value: v });
            }
        }
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&v| format_real(v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut table = ResultTable::default();
        let mut have_header = false;
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.strip_prefix(' ').unwrap_or(rest);
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| TableError::Parse { line: lineno, message: "metadata line without `=`".into() })?;
                table.metadata.push((k.to_string(), v.to_string()));
            } else if !have_header {
                table.columns = line.split(',').map(str::to_string).collect();
                have_header = true;
            } else if !line.is_empty() {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>().map_err(|e| TableError::Parse { line: lineno, message: format!("`{c}`: {e}") }))
                    .collect::<Result<Vec<f64>, _>>()?;
                if row.len() != table.columns.len() {
                    return Err(TableError::Ragged { row: table.rows.len(), expected: table.columns.len(), found: row.len() });
                }
                table.rows.push(row);
            }
        }
        if !have_header {
            return Err(TableError::Parse { line: text.lines().count(), message: "missing column row".into() });
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<(), TableError> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, TableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
