//! Dataset CSV and posterior-sample ingestion.

use std::path::Path;

use bayesbag_core::compare::DiscretePosterior;
use bayesbag_core::linreg::RegressionDataset;

use crate::error::{CliError, Result};

/// Regressors and response read from a CSV with a header row.
#[derive(Debug)]
pub struct Table {
    pub names: Vec<String>,
    pub data: RegressionDataset,
}

fn ingest_err(path: &Path, line: u64, msg: impl Into<String>) -> CliError {
    CliError::Ingest {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(_) => CliError::io(path, std::io::Error::other(e.to_string())),
        _ => ingest_err(path, line, e.to_string()),
    }
}

pub fn read_table(path: &Path, target: &str, standardize: bool) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::io(path, std::io::Error::other(e.to_string())),
            _ => csv_err(path, e),
        })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let target_col = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| CliError::data(format!("{}: no column named '{target}'", path.display())))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_col)
        .map(|(_, h)| h.clone())
        .collect();
    if names.is_empty() {
        return Err(CliError::data(format!("{}: no regressor columns", path.display())));
    }
    let d = names.len();
    let mut z = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| ingest_err(path, line, format!("column '{}': cannot parse '{field}' as a number", header[i])))?;
            if !v.is_finite() {
                return Err(ingest_err(path, line, format!("column '{}': value {v} is not finite", header[i])));
            }
            if i == target_col {
                y.push(v);
            } else {
                z.push(v);
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    if standardize {
        standardize_columns(&mut z, n, d, &names)?;
    }
    let data = RegressionDataset::new(n, d, z, y)?;
    Ok(Table { names, data })
}

/// Centers each column and scales it to population variance 1.
fn standardize_columns(z: &mut [f64], n: usize, d: usize, names: &[String]) -> Result<()> {
    for j in 0..d {
        let mean = (0..n).map(|i| z[i * d + j]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (z[i * d + j] - mean).powi(2)).sum::<f64>() / n as f64;
        let scale = (0..n).map(|i| z[i * d + j].abs()).fold(0.0, f64::max);
        if var.sqrt() <= 1e-12 * scale.max(1.0) {
            return Err(CliError::data(format!(
                "column '{}' has zero variance and cannot be standardized (use --no-standardize or drop it)",
                names[j]
            )));
        }
        let sd = var.sqrt();
        for i in 0..n {
            z[i * d + j] = (z[i * d + j] - mean) / sd;
        }
    }
    Ok(())
}

/// Reads a posterior-sample file with one item identifier per line. Blank
/// lines are skipped.
pub fn read_samples(path: &Path) -> Result<DiscretePosterior> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let draws: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if draws.is_empty() {
        return Err(ingest_err(path, 1, "no posterior draws in file"));
    }
    Ok(DiscretePosterior::from_samples(draws)?)
}
