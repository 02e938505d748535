//! Comma-separated result tables.
//!
//! Every table may start with `# key: value` lines recording how it was
//! produced; readers skip them.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{MseReport, MseSummary};
use crate::bandwidth::CvResult;
use crate::error::{Error, Result};
use crate::estimate::IntensityEstimate;

/// Provenance lines written above a table.
pub type Meta = Vec<(String, String)>;

/// One query of an estimate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub query: usize,
    pub time: f64,
    pub n_points: usize,
    pub estimate: f64,
    pub occupation: f64,
    pub undefined: bool,
}

/// Estimate rows for queries observed at `times` with `n_points` points each.
pub fn estimate_rows(est: &IntensityEstimate, times: &[f64], n_points: &[usize]) -> Result<Vec<EstimateRow>> {
    if times.len() != est.len() || n_points.len() != est.len() {
        return Err(Error::domain("one time and one cardinality per query are needed"));
    }
    Ok((0..est.len())
        .map(|i| EstimateRow {
            query: i,
            time: times[i],
            n_points: n_points[i],
            estimate: est.values[i],
            occupation: est.occupation[i],
            undefined: est.undefined[i],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub bandwidth: f64,
    pub objective: f64,
    pub selected: bool,
}

pub fn cv_rows(r: &CvResult) -> Vec<CvRow> {
    r.grid
        .iter()
        .zip(&r.objective)
        .enumerate()
        .map(|(i, (&bandwidth, &objective))| CvRow {
            bandwidth,
            objective,
            selected: i == r.best_index,
        })
        .collect()
}

/// Flat view of one [`MseReport`] entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub preset: String,
    pub seed: u64,
    pub horizon: f64,
    /// `continuous` or the number of frame intervals.
    pub scheme: String,
    pub n_jumps: usize,
    pub target: String,
    pub strategy: String,
    pub bandwidth: Option<f64>,
    pub mse: f64,
    pub sd: f64,
    pub na: usize,
    pub n_queries: usize,
}

pub fn scheme_label(m: Option<usize>) -> String {
    m.map_or_else(|| "continuous".to_string(), |m| format!("m={m}"))
}

pub fn mse_rows(reports: &[MseReport]) -> Vec<MseRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.entries.iter().map(move |e| MseRow {
                preset: r.preset.clone(),
                seed: r.seed,
                horizon: r.horizon,
                scheme: scheme_label(r.m),
                n_jumps: r.n_jumps,
                target: r.target.to_string(),
                strategy: e.strategy.clone(),
                bandwidth: e.bandwidth,
                mse: e.mse,
                sd: e.sd,
                na: e.na,
                n_queries: e.n_queries,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcfRow {
    pub lag: i64,
    pub correlation: Option<f64>,
}

fn write_meta<W: Write>(w: &mut W, meta: &Meta) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {}", v.replace('\n', " "))?;
    }
    Ok(())
}

/// Writes `rows` with a header line, after the provenance lines.
pub fn write_table_to<W: Write, T: Serialize>(mut w: W, meta: &Meta, rows: &[T]) -> Result<()> {
    write_meta(&mut w, meta)?;
    let mut cw = csv::Writer::from_writer(w);
    for r in rows {
        cw.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    cw.flush()?;
    Ok(())
}

pub fn write_table<T: Serialize>(path: impl AsRef<Path>, meta: &Meta, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_table_to(std::io::BufWriter::new(file), meta, rows)
}

pub fn read_table<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Table-1 layout: one row per observation scheme, one column of median
/// MSE per strategy (in the order given).
pub fn write_mse_summary<W: Write>(mut w: W, meta: &Meta, summary: &[MseSummary], strategies: &[String]) -> Result<()> {
    write_meta(&mut w, meta)?;
    let mut schemes: Vec<Option<usize>> = Vec::new();
    for s in summary {
        if !schemes.contains(&s.m) {
            schemes.push(s.m);
        }
    }
    write!(w, "scheme")?;
    for s in strategies {
        write!(w, ",{s}")?;
    }
    writeln!(w)?;
    for m in schemes {
        write!(w, "{}", scheme_label(m))?;
        for name in strategies {
            match summary.iter().find(|s| s.m == m && &s.strategy == name) {
                Some(s) => write!(w, ",{}", s.median)?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Machine-readable record of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub meta: Meta,
    pub reports: Vec<MseReport>,
    pub summary: Vec<MseSummary>,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
