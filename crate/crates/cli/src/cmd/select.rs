use std::path::PathBuf;

use bayesbag_core::engine::replicate_rng;
use bayesbag_core::linreg::{select_features, NigHyperparams, RegressionDataset};
use clap::Args;
use log::{info, warn};
use rand::seq::SliceRandom;

use super::{
    bootstrap, check_model_space, derive_seed, keys, BootArgs, HyperArgs, RunArgs, BOOT_KEYS, GUARD_ADVICE, HYPER_KEYS,
    METHOD_BAGGED, METHOD_STANDARD,
};
use crate::config::{ConfigFile, MSpec, Settings};
use crate::error::{CliError, Result};
use crate::ingest::read_table;
use crate::output::{Cell, OutDir, REPRODUCIBILITY, SPLIT_PIPS};

/// Feature selection on a CSV dataset, on the full data and on random splits.
#[derive(Args, Debug, Clone)]
pub struct SelectArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Input CSV with a header row
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the response column
    #[arg(long)]
    pub target: Option<String>,
    /// Center and scale regressors (default)
    #[arg(long, conflicts_with = "no_standardize")]
    pub standardize: bool,
    /// Use regressors as given
    #[arg(long)]
    pub no_standardize: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    /// Number of random splits
    #[arg(long)]
    pub splits: Option<usize>,
}

/// Seeded random partition of `0..n` into `k` parts whose sizes differ by at
/// most one. Each part is returned in ascending order.
pub fn partition(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut replicate_rng(seed, 0));
    let mut parts = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, &i) in order.iter().enumerate() {
        parts[pos % k].push(i);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    parts
}

struct RunResult {
    label: String,
    n: usize,
    standard: Vec<f64>,
    bagged: Vec<f64>,
}

fn run_one(label: String, data: &RegressionDataset, hyper: &NigHyperparams, m: MSpec, b: usize, seed: u64) -> Result<RunResult> {
    if data.n() < data.d() {
        warn!("{label}: N = {} is below D = {}", data.n(), data.d());
    }
    let boot = bootstrap(m, b, data.n(), seed)?;
    let sel = select_features(data, hyper, &boot).map_err(|e| CliError::from(e).with_guard_advice(GUARD_ADVICE))?;
    info!("{label}: N = {}, M = {}", data.n(), boot.m);
    Ok(RunResult {
        label,
        n: data.n(),
        standard: sel.standard_pips,
        bagged: sel.bagged_pips,
    })
}

pub fn run(a: &SelectArgs) -> Result<()> {
    let known = keys(&[HYPER_KEYS, BOOT_KEYS, &["data", "target", "standardize", "splits"]]);
    let mut s = Settings::new(ConfigFile::load(a.run.config.as_deref(), &known)?);
    let out = a.run.out_dir(&mut s)?;
    let seed = s.get("seed", a.run.seed, 0)?;
    let path: String = s.require("data", a.data.as_ref().map(|p| p.display().to_string()))?;
    let target: String = s.require("target", a.target.clone())?;
    let flag = match (a.standardize, a.no_standardize) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    let standardize = s.get("standardize", flag, true)?;
    let table = read_table(path.as_ref(), &target, standardize)?;
    let (n, d) = (table.data.n(), table.data.d());
    let q0 = if d > 3 { 3.0 / d as f64 } else { 0.5 };
    let hyper = a.hyper.resolve(&mut s, q0, d)?;
    hyper.validate_for(d).map_err(|e| CliError::usage(e.to_string()))?;
    let (m, b) = a.boot.resolve(&mut s)?;
    let n_splits = s.get("splits", a.splits, 3)?;
    if n_splits == 0 || n_splits > n {
        return Err(CliError::usage(format!("splits must lie in 1..={n}, got {n_splits}")));
    }
    let models = check_model_space(d, hyper.k_star)?;
    info!("select: {models} models x {} analyses x {} posteriors", n_splits + 1, b + 1);

    let mut runs = vec![run_one("full".into(), &table.data, &hyper, m, b, derive_seed(seed, 1))?];
    for (j, rows) in partition(n, n_splits, derive_seed(seed, 0)).iter().enumerate() {
        let sub = table.data.select_rows(rows)?;
        runs.push(run_one((j + 1).to_string(), &sub, &hyper, m, b, derive_seed(seed, 2 + j as u64))?);
    }

    let mut pip_rows = Vec::new();
    for r in &runs {
        for (method, values) in [(METHOD_STANDARD, &r.standard), (METHOD_BAGGED, &r.bagged)] {
            for (j, &p) in values.iter().enumerate() {
                pip_rows.push(vec![
                    Cell::from(r.label.as_str()),
                    r.n.into(),
                    method.into(),
                    (j + 1).into(),
                    table.names[j].as_str().into(),
                    p.into(),
                ]);
            }
        }
    }

    let mut repro = Vec::new();
    for method in [METHOD_STANDARD, METHOD_BAGGED] {
        let pick = |r: &RunResult| if method == METHOD_STANDARD { r.standard.clone() } else { r.bagged.clone() };
        let full = pick(&runs[0]);
        let splits: Vec<Vec<f64>> = runs[1..].iter().map(pick).collect();
        let mut total_range = 0.0;
        for j in 0..d {
            let lo = splits.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
            let hi = splits.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
            total_range += hi - lo;
            repro.push(vec![
                Cell::from(method),
                (j + 1).into(),
                table.names[j].as_str().into(),
                full[j].into(),
                lo.into(),
                hi.into(),
                (hi - lo).into(),
            ]);
        }
        println!("{method}: mean between-split pip range {}", total_range / d as f64);
    }

    let mut dir = OutDir::create(&out)?;
    dir.write_table("pips.csv", SPLIT_PIPS, &pip_rows)?;
    dir.write_table("reproducibility.csv", REPRODUCIBILITY, &repro)?;
    dir.finish("select", s.into_resolved())?;
    let sizes: Vec<String> = runs[1..].iter().map(|r| r.n.to_string()).collect();
    println!("N = {n}, D = {d}, split sizes {}; wrote {}", sizes.join("/"), out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sizes_and_coverage() {
        let parts = partition(506, 3, 9);
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![169, 169, 168]);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..506).collect::<Vec<_>>());
        assert_eq!(parts, partition(506, 3, 9));
        assert_ne!(parts, partition(506, 3, 10));
    }
}
