use bayesbag_core::asymptotics::{
    three_model_scenarios, sample_ubb_k, std_limit_bernoulli_k, std_prob_rejects, ubb_cdf, ubb_density, KModelLaw,
    ScenarioKind, TwoModelLaw, DEFAULT_STRONG_THRESHOLD,
};
use clap::Args;
use log::info;

use super::{derive_seed, keys, RunArgs};
use crate::config::{ConfigFile, Grid, Settings};
use crate::error::{CliError, Result};
use crate::output::{Cell, OutDir, DENSITY, K_MODEL, TWO_MODEL};

/// Limit-law curves for two models and the three-model scenarios.
#[derive(Args, Debug, Clone)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Effect sizes for the two-model curves
    #[arg(long, allow_hyphen_values = true)]
    pub deltas: Option<Grid>,
    /// Values of c = lim M/N
    #[arg(long)]
    pub cs: Option<Grid>,
    /// Effect sizes for the density grid
    #[arg(long, allow_hyphen_values = true)]
    pub density_deltas: Option<Grid>,
    /// Interior points of the density grid
    #[arg(long)]
    pub density_points: Option<usize>,
    /// Cutoff for a strongly rejected model
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Mean shifts for the vary_mean scenario
    #[arg(long, allow_hyphen_values = true)]
    pub mean_grid: Option<Grid>,
    /// Variances for the vary_variance scenario
    #[arg(long)]
    pub variance_grid: Option<Grid>,
    /// Correlations for the vary_correlation scenario
    #[arg(long, allow_hyphen_values = true)]
    pub correlation_grid: Option<Grid>,
    /// c for the three-model curves
    #[arg(long)]
    pub c_k: Option<f64>,
    /// Monte Carlo draws per three-model estimate
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Inner draws per orthant probability
    #[arg(long)]
    pub inner_samples: Option<usize>,
}

const KEYS: &[&str] = &[
    "deltas",
    "cs",
    "density_deltas",
    "density_points",
    "threshold",
    "mean_grid",
    "variance_grid",
    "correlation_grid",
    "c_k",
    "mc_samples",
    "inner_samples",
];

fn grid(s: &mut Settings, key: &str, flag: &Option<Grid>, default: &str) -> Result<Vec<f64>> {
    let g = s.get(key, flag.clone(), default.parse().map_err(CliError::usage)?)?;
    Ok(g.0)
}

pub fn run(a: &AsymptoticsArgs) -> Result<()> {
    let mut s = Settings::new(ConfigFile::load(a.run.config.as_deref(), &keys(&[KEYS]))?);
    let out = a.run.out_dir(&mut s)?;
    let seed = s.get("seed", a.run.seed, 0)?;
    let deltas = grid(&mut s, "deltas", &a.deltas, "0:4:0.1")?;
    let cs = grid(&mut s, "cs", &a.cs, "0.25,0.5,1,2,4")?;
    let density_deltas = grid(&mut s, "density_deltas", &a.density_deltas, "0,1,2")?;
    let density_points = s.get("density_points", a.density_points, 99)?;
    let threshold = s.get("threshold", a.threshold, DEFAULT_STRONG_THRESHOLD)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CliError::usage(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let scenarios = [
        (ScenarioKind::VaryMean, "vary_mean", grid(&mut s, "mean_grid", &a.mean_grid, "-2:2:0.25")?),
        (ScenarioKind::VaryVariance, "vary_variance", grid(&mut s, "variance_grid", &a.variance_grid, "0.25:3:0.25")?),
        (
            ScenarioKind::VaryCorrelation,
            "vary_correlation",
            grid(&mut s, "correlation_grid", &a.correlation_grid, "-0.9:0.9:0.1")?,
        ),
    ];
    let c_k = s.get("c_k", a.c_k, 1.0)?;
    let mc = s.get("mc_samples", a.mc_samples, 4000)?;
    let inner = s.get("inner_samples", a.inner_samples, 1000)?;

    let mut two = Vec::new();
    for &c in &cs {
        for &delta in &deltas {
            let law = TwoModelLaw::new(delta, c)?;
            two.push(vec![Cell::from(delta), c.into(), std_prob_rejects(&law).into(), ubb_cdf(threshold, &law)?.into()]);
        }
    }

    let mut density = Vec::new();
    for &c in &cs {
        for &delta in &density_deltas {
            let law = TwoModelLaw::new(delta, c)?;
            for i in 1..=density_points {
                let u = i as f64 / (density_points + 1) as f64;
                density.push(vec![Cell::from(delta), c.into(), u.into(), ubb_density(u, &law)?.into()]);
            }
        }
    }

    let mut k_rows = Vec::new();
    let mut stream = 0u64;
    for (kind, name, values) in &scenarios {
        for sc in three_model_scenarios(*kind, values)? {
            for model in 0..sc.mu_prime.len() {
                let law = KModelLaw::from_loglik_moments(&sc.mu_prime, &sc.sigma_prime, model, c_k)?;
                let std = std_limit_bernoulli_k(&law, mc, derive_seed(seed, stream))?;
                let draws = sample_ubb_k(&law, mc, inner, derive_seed(seed, stream + 1))?;
                stream += 2;
                let p_bb = draws.iter().filter(|&&u| u < threshold).count() as f64 / draws.len() as f64;
                let se_bb = (p_bb * (1.0 - p_bb) / draws.len() as f64).sqrt();
                k_rows.push(vec![
                    Cell::from(*name),
                    sc.param.into(),
                    (model + 1).into(),
                    (1.0 - std.estimate).into(),
                    std.se.into(),
                    p_bb.into(),
                    se_bb.into(),
                ]);
            }
        }
        info!("scenario {name} done");
    }

    let mut dir = OutDir::create(&out)?;
    dir.write_table("two_model_curves.csv", TWO_MODEL, &two)?;
    dir.write_table("ubb_density.csv", DENSITY, &density)?;
    dir.write_table("k_model_curves.csv", K_MODEL, &k_rows)?;
    dir.finish("asymptotics", s.into_resolved())?;

    let law = TwoModelLaw::new(2.0, 1.0)?;
    println!(
        "checkpoint delta = 2, c = 1: P(U = 0) = {}, P(Ubb < {threshold}) = {}",
        std_prob_rejects(&law),
        ubb_cdf(threshold, &law)?
    );
    println!("wrote {} two-model rows and {} three-model rows to {}", two.len(), k_rows.len(), out.display());
    Ok(())
}
