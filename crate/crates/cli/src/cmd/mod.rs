use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use bayesbag_core::engine::{replicate_rng, BootstrapConfig};
use bayesbag_core::linreg::{model_count, NigHyperparams, MODEL_ENUMERATION_LIMIT};
use bayesbag_core::simgen::{RegressorDesign, ResponseKind, SimConfig};
use clap::Args;
use rand::Rng;

use crate::config::{MSpec, Settings};
use crate::error::{CliError, Result};

pub mod asymptotics;
pub mod dataset;
pub mod mismatch;
pub mod overlap;
pub mod select;
pub mod simulate;

pub const METHOD_STANDARD: &str = "standard";
pub const METHOD_BAGGED: &str = "bagged";

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// key = value configuration file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunArgs {
    pub fn out_dir(&self, s: &mut Settings) -> Result<PathBuf> {
        let out: String = s.require("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        Ok(PathBuf::from(out))
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct HyperArgs {
    /// Prior inclusion probability
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Largest model size considered
    #[arg(long = "k-star")]
    pub k_star: Option<usize>,
}

pub const HYPER_KEYS: &[&str] = &["q0", "a0", "b0", "lambda", "k_star"];

impl HyperArgs {
    pub fn resolve(&self, s: &mut Settings, q0: f64, k_star: usize) -> Result<NigHyperparams> {
        let h = NigHyperparams {
            a0: s.get("a0", self.a0, 2.0)?,
            b0: s.get("b0", self.b0, 1.0)?,
            lambda: s.get("lambda", self.lambda, 16.0)?,
            q0: s.get("q0", self.q0, q0)?,
            k_star: s.get("k_star", self.k_star, k_star)?,
        };
        h.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(h)
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct BootArgs {
    /// Bootstrap dataset size: an integer, or N for the dataset's own size
    #[arg(long = "M")]
    pub m: Option<MSpec>,
    /// Number of bootstrap replicates
    #[arg(long = "B")]
    pub b: Option<usize>,
}

pub const BOOT_KEYS: &[&str] = &["M", "B"];

impl BootArgs {
    pub fn resolve(&self, s: &mut Settings) -> Result<(MSpec, usize)> {
        let m = s.get("M", self.m, MSpec::DataSize)?;
        let b = s.get("B", self.b, 100)?;
        if b == 0 {
            return Err(CliError::usage("B must be at least 1"));
        }
        Ok((m, b))
    }
}

pub fn bootstrap(m: MSpec, b: usize, n: usize, seed: u64) -> Result<BootstrapConfig> {
    BootstrapConfig::new(m.resolve(n), b, seed).map_err(|e| CliError::usage(e.to_string()))
}

/// Independent child seed for stream `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    replicate_rng(seed, stream).random()
}

/// Refuses enumeration sizes the linear-regression backend would reject,
/// before any work starts.
pub fn check_model_space(d: usize, k_star: usize) -> Result<u128> {
    match model_count(d, k_star) {
        Some(c) if c <= MODEL_ENUMERATION_LIMIT => Ok(c),
        c => Err(CliError::Guard(format!(
            "D = {d}, k* = {k_star} gives {} models, above the limit of {MODEL_ENUMERATION_LIMIT}; lower --k-star",
            c.map_or("too many".to_string(), |c| c.to_string())
        ))),
    }
}

pub const GUARD_ADVICE: &str = "lower --k-star or the number of regressors";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Response(pub ResponseKind);

impl FromStr for Response {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(Response(ResponseKind::Linear)),
            "nonlinear" => Ok(Response(ResponseKind::Nonlinear)),
            other => Err(format!("expected linear or nonlinear, got '{other}'")),
        }
    }
}

impl Display for Response {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self.0 {
            ResponseKind::Linear => "linear",
            ResponseKind::Nonlinear => "nonlinear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Design(pub RegressorDesign);

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "correlated" => Ok(Design(RegressorDesign::Correlated)),
            "independent" => Ok(Design(RegressorDesign::IndependentGaussian)),
            other => Err(format!("expected correlated or independent, got '{other}'")),
        }
    }
}

impl Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self.0 {
            RegressorDesign::Correlated => "correlated",
            RegressorDesign::IndependentGaussian => "independent",
        })
    }
}

/// Simulated-data settings shared by `simulate`, `mismatch` and `dataset`.
#[derive(Args, Debug, Clone, Default)]
pub struct SimArgs {
    /// Number of regressors D
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of causal regressors
    #[arg(long)]
    pub k: Option<usize>,
    /// Observations per dataset
    #[arg(long)]
    pub n: Option<usize>,
    /// linear or nonlinear
    #[arg(long)]
    pub response: Option<Response>,
    /// correlated or independent
    #[arg(long)]
    pub design: Option<Design>,
}

pub const SIM_KEYS: &[&str] = &["dim", "k", "n", "response", "design"];

impl SimArgs {
    /// Resolves a configuration whose seed is filled in per dataset.
    pub fn resolve(&self, s: &mut Settings, default_n: usize) -> Result<SimConfig> {
        let d = s.get("dim", self.dim, 10)?;
        let k = s.get("k", self.k, 1)?;
        let n = s.get("n", self.n, default_n)?;
        let response = s.get("response", self.response, Response(ResponseKind::Linear))?;
        let design = s.get("design", self.design, Design(RegressorDesign::Correlated))?;
        let mut cfg = SimConfig::new(d, k, n, response.0, 0).map_err(|e| CliError::usage(e.to_string()))?;
        cfg.design = design.0;
        Ok(cfg)
    }
}

pub fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    let mut all: Vec<&str> = ["out", "seed"].to_vec();
    for g in groups {
        all.extend_from_slice(g);
    }
    all
}
