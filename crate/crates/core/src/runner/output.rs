use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A CSV cell. Floats are written with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
    pub rows: usize,
}

/// Writes CSV tables into one directory and records their hashes.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| io(dir, source))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Comma-separated, header row, LF line endings.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let record_err = |e: csv::Error| Error::Io { path: name.to_string(), source: e.into() };
        w.write_record(header).map_err(record_err)?;
        for row in rows {
            if row.len() != header.len() {
                return Err(Error::Domain(format!("{name}: row has {} cells, header {}", row.len(), header.len())));
            }
            w.write_record(row.iter().map(Cell::render)).map_err(record_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io { path: name.to_string(), source: e.into_error() })?;
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|source| io(&path, source))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64, rows: rows.len() });
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a CSV written by [`ArtifactWriter::write_csv`] into its header and float columns.
/// Empty cells read as NaN.
pub fn read_csv_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns = vec![Vec::new(); header.len()];
    for record in r.records() {
        let record = record.map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?;
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let value = if field.is_empty() {
                f64::NAN
            } else {
                field.parse().map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?
            };
            col.push(value);
        }
    }
    Ok((header, columns))
}

pub(crate) fn io(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_seventeen_digits_and_lf() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write_csv("t.csv", &["x", "n"], &[vec![0.1.into(), 3usize.into()], vec![Cell::Empty, 4usize.into()]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "x,n\n1.0000000000000001e-1,3\n,4\n");
        assert_eq!(w.files()[0].sha256, sha256_hex(text.as_bytes()));
        let v: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(v, 0.1);
    }

    #[test]
    fn reads_back_columns() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        let x = std::f64::consts::PI;
        w.write_csv("t.csv", &["a", "b"], &[vec![x.into(), (-x).into()]]).unwrap();
        let (h, c) = read_csv_columns(&dir.path().join("t.csv")).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(c, vec![vec![x], vec![-x]]);
        w.write_csv("e.csv", &["a"], &[vec![Cell::Empty]]).unwrap();
        assert!(read_csv_columns(&dir.path().join("e.csv")).unwrap().1[0][0].is_nan());
    }
}
