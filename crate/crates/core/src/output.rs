//! Plot-ready CSV/JSON writers and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diagnostics::{MeanExcessData, QQPlotData};
use crate::error::Result;
use crate::simulation::SimulationReport;

/// Six significant digits, `%g` style; `inf`, `-inf` and `nan` tokens.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..6).contains(&exp) {
        let (mantissa, _) = sci.split_at(sci.find('e').unwrap());
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_number(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// Row of the long-format estimates file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub estimator: String,
    pub k: Option<usize>,
    pub estimate: Option<f64>,
    pub raw: Option<f64>,
    pub alpha: Option<f64>,
    pub upper_bound: Option<f64>,
    /// Empty on success, otherwise the error message.
    pub error: String,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_estimates_csv(path: &Path, rows: &[EstimateRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["estimator", "k", "estimate", "raw", "alpha", "upper_bound", "error"])?;
    for r in rows {
        w.write_record([
            r.estimator.clone(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            opt_number(r.estimate),
            opt_number(r.raw),
            opt_number(r.alpha),
            opt_number(r.upper_bound),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_qq_csv(path: &Path, qq: &QQPlotData) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["kind", "theoretical", "empirical"])?;
    for &(x, y) in &qq.points {
        w.write_record([qq.kind.id().to_string(), format_number(x), format_number(y)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mean_excess_csv(path: &Path, data: &MeanExcessData) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "threshold", "mean_excess"])?;
    for e in &data.entries {
        w.write_record([
            e.k.to_string(),
            format_number(e.threshold),
            format_number(e.mean_excess),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Generic table: header plus rows of already formatted cells.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Metric files `relative_mean.csv`, `relative_mse.csv`, `coverage.csv` with
/// columns `(estimator, k, T_M, metric_value, replicates_used)`.
pub fn write_simulation_csvs(dir: &Path, report: &SimulationReport) -> Result<Vec<PathBuf>> {
    let t = report.config.params.t_upper;
    let tag = format_number(t);
    let header = ["estimator", "k", "T_M", "metric_value", "replicates_used"];
    let mut paths = Vec::new();
    for metric in ["relative_mean", "relative_mse", "coverage"] {
        let rows: Vec<Vec<String>> = report
            .metrics
            .iter()
            .filter_map(|m| {
                let (value, used) = match metric {
                    "relative_mean" => (Some(m.relative_mean), m.used),
                    "relative_mse" => (Some(m.relative_mse), m.used),
                    _ => (m.coverage, m.coverage_used),
                };
                value.map(|v| {
                    vec![
                        m.estimator.id().to_string(),
                        m.k.to_string(),
                        tag.clone(),
                        format_number(v),
                        used.to_string(),
                    ]
                })
            })
            .collect();
        let path = dir.join(format!("{metric}_T{tag}.csv"));
        write_table_csv(&path, &header, &rows)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest.iter() {
        write!(hex, "{b:02x}").unwrap();
    }
    Ok(hex)
}

/// Flat `key = value` record of one CLI invocation.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub seeds: Vec<(String, u64)>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub started: String,
    pub finished: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            started: now(),
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    /// Render with SHA-256 digests of every input and output file.
    pub fn render(&self) -> Result<String> {
        let mut s = String::new();
        writeln!(s, "command = {}", self.command).unwrap();
        writeln!(s, "tool = tmax {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "started = {}", self.started).unwrap();
        writeln!(s, "finished = {}", self.finished).unwrap();
        for (k, v) in &self.config {
            writeln!(s, "config.{k} = {v}").unwrap();
        }
        for (k, v) in &self.seeds {
            writeln!(s, "seed.{k} = {v}").unwrap();
        }
        for p in &self.inputs {
            writeln!(s, "input.{} = sha256:{}", p.display(), sha256_file(p)?).unwrap();
        }
        for p in &self.outputs {
            writeln!(s, "output.{} = sha256:{}", p.display(), sha256_file(p)?).unwrap();
        }
        Ok(s)
    }

    pub fn write(&mut self, path: &Path) -> Result<()> {
        self.finished = now();
        let text = self.render()?;
        let mut f = fs::File::create(path)?;
        f.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
