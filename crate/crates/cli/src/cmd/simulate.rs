use bayesbag_core::linreg::select_features;
use bayesbag_core::simgen::{sample_dataset, SimConfig};
use bayesbag_core::stats::{mean, sample_variance};
use clap::Args;
use log::info;

use super::{
    bootstrap, check_model_space, derive_seed, keys, BootArgs, HyperArgs, RunArgs, SimArgs, BOOT_KEYS, GUARD_ADVICE,
    HYPER_KEYS, METHOD_BAGGED, METHOD_STANDARD, SIM_KEYS,
};
use crate::config::{ConfigFile, Settings};
use crate::error::{CliError, Result};
use crate::output::{Cell, OutDir, PIPS, SIM_SUMMARY};

/// Repeated standard and bagged feature selection on simulated datasets.
#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    /// Number of simulated datasets
    #[arg(long)]
    pub replicates: Option<usize>,
}

pub fn run(a: &SimulateArgs) -> Result<()> {
    let known = keys(&[SIM_KEYS, HYPER_KEYS, BOOT_KEYS, &["replicates"]]);
    let mut s = Settings::new(ConfigFile::load(a.run.config.as_deref(), &known)?);
    let out = a.run.out_dir(&mut s)?;
    let seed = s.get("seed", a.run.seed, 0)?;
    let base = a.sim.resolve(&mut s, 5000)?;
    let reps = s.get("replicates", a.replicates, 50)?;
    if reps == 0 {
        return Err(CliError::usage("replicates must be at least 1"));
    }
    let hyper = a.hyper.resolve(&mut s, base.k as f64 / base.d as f64, 2.min(base.d))?;
    hyper.validate_for(base.d).map_err(|e| CliError::usage(e.to_string()))?;
    let (m, b) = a.boot.resolve(&mut s)?;
    let models = check_model_space(base.d, hyper.k_star)?;
    info!(
        "simulate: {models} models x {reps} datasets x {} posteriors = {} marginal likelihoods",
        b + 1,
        models * reps as u128 * (b as u128 + 1)
    );

    let d = base.d;
    let mut pips = Vec::with_capacity(reps * 2 * d);
    let mut by_method = [vec![Vec::with_capacity(reps); d], vec![Vec::with_capacity(reps); d]];
    for r in 0..reps {
        let cfg = SimConfig {
            seed: derive_seed(seed, 2 * r as u64),
            ..base
        };
        let data = sample_dataset(&cfg)?;
        let boot = bootstrap(m, b, data.n(), derive_seed(seed, 2 * r as u64 + 1))?;
        let sel = select_features(&data, &hyper, &boot).map_err(|e| CliError::from(e).with_guard_advice(GUARD_ADVICE))?;
        for (mi, (method, values)) in [(METHOD_STANDARD, &sel.standard_pips), (METHOD_BAGGED, &sel.bagged_pips)]
            .into_iter()
            .enumerate()
        {
            for (j, &p) in values.iter().enumerate() {
                pips.push(vec![Cell::from(r + 1), method.into(), (j + 1).into(), p.into()]);
                by_method[mi][j].push(p);
            }
        }
        info!("dataset {}/{reps} done", r + 1);
    }

    let mut summary = Vec::with_capacity(2 * d);
    for (mi, method) in [METHOD_STANDARD, METHOD_BAGGED].into_iter().enumerate() {
        for (j, values) in by_method[mi].iter().enumerate() {
            let var = if values.len() > 1 { sample_variance(values) } else { 0.0 };
            let uncertain = values.iter().filter(|&&p| p > 0.1 && p < 0.9).count() as f64 / values.len() as f64;
            summary.push(vec![Cell::from(method), (j + 1).into(), mean(values).into(), var.into(), uncertain.into()]);
        }
    }

    let mut dir = OutDir::create(&out)?;
    dir.write_table("pips.csv", PIPS, &pips)?;
    dir.write_table("summary.csv", SIM_SUMMARY, &summary)?;
    let manifest = dir.finish("simulate", s.into_resolved())?;
    println!("wrote {} pip rows to {}", pips.len(), manifest.parent().unwrap_or(&out).display());
    Ok(())
}
