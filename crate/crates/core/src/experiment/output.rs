//! Versioned CSV and JSON outputs.
//!
//! CSV files start with a `# qedpec-csv v1 <kind>` comment line followed by
//! the column header. Rows are flushed as they are produced so an
//! interrupted sweep can resume from the points already on disk.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::error::{Error, Result};

pub const CSV_VERSION: u32 = 1;

/// Kinds of output tables and their header tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Blocks,
    Costs,
    Sweep,
    Toy,
    Certify,
}

impl Kind {
    pub fn tag(&self) -> &'static str {
        match self {
            Kind::Blocks => "blocks",
            Kind::Costs => "costs",
            Kind::Sweep => "sweep",
            Kind::Toy => "toy",
            Kind::Certify => "certify",
        }
    }

    pub fn header_line(&self) -> String {
        format!("# qedpec-csv v{CSV_VERSION} {}", self.tag())
    }
}

/// Per-block compilation summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub block: usize,
    pub num_faults: usize,
    pub total_weight: f64,
    pub branches_visited: u64,
    pub branches_accepted: u64,
    pub num_entries: usize,
    pub gamma: f64,
    pub p_success: f64,
    pub p_accept_exact: f64,
}

/// Analytic cost of one `(n, T)` point against the unencoded baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub blocks: Option<usize>,
    pub gamma_total: Option<f64>,
    pub p_success_total: Option<f64>,
    pub cost_total: Option<f64>,
    pub cost_postselect: Option<f64>,
    pub cost_gamma2: Option<f64>,
    pub pure_pec: f64,
    pub ratio: Option<f64>,
    pub b1: Option<f64>,
    pub status: String,
    pub message: String,
}

/// One Monte Carlo grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub model: String,
    pub p_m: Option<f64>,
    pub m_ancilla: Option<usize>,
    pub r_max: f64,
    pub pec: bool,
    pub mode: String,
    pub seed: u64,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub infidelity: Option<f64>,
    pub n_attempted: u64,
    pub n_accepted: u64,
    pub p_accept: Option<f64>,
    pub p_accept_stderr: Option<f64>,
    /// `prod_k p_k` with ideal rounds.
    pub p_accept_ideal: f64,
    pub gamma_total: f64,
    /// `gamma_total^2 / p_accept_ideal`.
    pub cost_ideal: f64,
    pub cost_observed: Option<f64>,
    pub pure_pec: f64,
    pub status: String,
    pub message: String,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyRow {
    pub gamma: f64,
    pub gamma_t: f64,
    pub levels: f64,
    pub tau: f64,
    pub a_p_success: f64,
    pub a_gamma: f64,
    pub a_log_exact: f64,
    pub a_expanded_log: f64,
    pub a_log_postselect: f64,
    pub a_log_gamma2: f64,
    pub b_log_exact: f64,
    pub b_expanded_log: f64,
    pub b_single_shot: f64,
    pub zeno_separation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub block: usize,
    pub num_faults: usize,
    pub total_weight: f64,
    pub gamma: f64,
    pub p_success: f64,
    pub zeta: Option<f64>,
    pub max_low_degree_residue: Option<f64>,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub w_scale: f64,
    /// `prod (1 + eps_k) - 1` over the point, when every block has one.
    pub end_to_end: Option<f64>,
}

/// Destination for rows of one kind.
pub struct Sink<T> {
    kind: Kind,
    path: Option<PathBuf>,
    csv: Option<csv::Writer<Box<dyn Write>>>,
    rows: Vec<T>,
}

#[derive(Serialize)]
struct JsonDoc<'a, T> {
    format: &'static str,
    version: u32,
    kind: &'static str,
    rows: &'a [T],
}

impl<T: Serialize> Sink<T> {
    /// Opens `path` (stdout when `None`). With `append`, an existing CSV of
    /// the same kind is continued instead of truncated.
    pub fn open(kind: Kind, format: OutputFormat, path: Option<&Path>, append: bool) -> Result<Self> {
        let mut sink = Sink {
            kind,
            path: path.map(Path::to_path_buf),
            csv: None,
            rows: Vec::new(),
        };
        if format == OutputFormat::Csv {
            let continuing = append && path.is_some_and(|p| p.exists() && std::fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false));
            let mut out: Box<dyn Write> = match path {
                Some(p) => {
                    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir)?;
                    }
                    if continuing {
                        check_header(p, kind)?;
                        Box::new(OpenOptions::new().append(true).open(p)?)
                    } else {
                        Box::new(File::create(p)?)
                    }
                }
                None => Box::new(std::io::stdout()),
            };
            if !continuing {
                writeln!(out, "{}", kind.header_line())?;
            }
            sink.csv = Some(csv::WriterBuilder::new().has_headers(!continuing).from_writer(out));
        }
        Ok(sink)
    }

    pub fn push(&mut self, row: T) -> Result<()> {
        if let Some(w) = &mut self.csv {
            w.serialize(&row)?;
            w.flush()?;
        } else {
            self.rows.push(row);
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(w) = &mut self.csv {
            w.flush()?;
            return Ok(());
        }
        let doc = JsonDoc {
            format: "qedpec-json",
            version: CSV_VERSION,
            kind: self.kind.tag(),
            rows: &self.rows,
        };
        match &self.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                let mut f = File::create(p)?;
                serde_json::to_writer_pretty(&mut f, &doc)?;
                writeln!(f)?;
            }
            None => {
                let mut out = std::io::stdout().lock();
                serde_json::to_writer_pretty(&mut out, &doc)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn check_header(path: &Path, kind: Kind) -> Result<()> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    if first.trim_end() != kind.header_line() {
        return Err(Error::Parse(format!(
            "{}: expected header {:?}, found {:?}",
            path.display(),
            kind.header_line(),
            first.trim_end()
        )));
    }
    Ok(())
}

/// Reads every row of a versioned CSV file.
pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, kind: Kind) -> Result<Vec<T>> {
    check_header(path, kind)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

/// Grid points already present in a sweep file.
pub fn completed_points(path: &Path) -> Result<BTreeSet<usize>> {
    if !path.exists() || std::fs::metadata(path)?.len() == 0 {
        return Ok(BTreeSet::new());
    }
    Ok(read_rows::<SweepRow>(path, Kind::Sweep)?.into_iter().map(|r| r.point).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let row = |n| ToyRow {
            gamma: 1.0,
            gamma_t: 1.0,
            levels: n,
            tau: 0.1,
            a_p_success: 0.5,
            a_gamma: 1.5,
            a_log_exact: 0.1,
            a_expanded_log: 0.2,
            a_log_postselect: 0.0,
            a_log_gamma2: 0.0,
            b_log_exact: 0.0,
            b_expanded_log: 0.0,
            b_single_shot: 1.0,
            zeno_separation: 0.75,
        };
        let mut s = Sink::open(Kind::Toy, OutputFormat::Csv, Some(&p), false).unwrap();
        s.push(row(2.0)).unwrap();
        s.finish().unwrap();
        let mut s = Sink::open(Kind::Toy, OutputFormat::Csv, Some(&p), true).unwrap();
        s.push(row(4.0)).unwrap();
        s.finish().unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# qedpec-csv v1 toy\ngamma,"));
        let rows: Vec<ToyRow> = read_rows(&p, Kind::Toy).unwrap();
        assert_eq!(rows, vec![row(2.0), row(4.0)]);
        assert!(read_rows::<ToyRow>(&p, Kind::Sweep).is_err());
    }
}
