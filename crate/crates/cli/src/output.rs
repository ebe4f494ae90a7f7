//! CSV tables and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use itp_core::tensor::FinSeq;
use itp_core::C64;

use crate::CliError;

/// A file produced by a run, kept in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        Artifact { name: name.into(), body: self.to_csv() }
    }
}

/// Shortest round-trip formatting, stable across runs.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn re_im(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

/// `1:0.7 2:-1.3`; the origin prints as `0`.
pub fn point_label(x: &FinSeq) -> String {
    if x.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (n, v)) in x.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{n}:{v}");
    }
    s
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            fs::write(&path, &a.body).map_err(io(&path))?;
            Ok(path)
        })
        .collect()
}
