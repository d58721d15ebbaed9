use std::path::PathBuf;

use bayesbag_core::linreg::{InclusionVector, NigHyperparams};
use bayesbag_core::mismatch::linreg_mismatch;
use bayesbag_core::simgen::{sample_dataset, SimConfig};
use clap::Args;

use super::{bootstrap, derive_seed, keys, BootArgs, RunArgs, SimArgs, BOOT_KEYS, SIM_KEYS};
use crate::config::{ConfigFile, Settings};
use crate::error::{CliError, Result};
use crate::ingest::read_table;
use crate::output::{schema_tag, MismatchCoord, MismatchFile, OutDir, MISMATCH};

/// Model-data mismatch index of the full linear model.
#[derive(Args, Debug, Clone)]
pub struct MismatchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Input CSV; when absent a dataset is simulated
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub no_standardize: bool,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub boot: BootArgs,
}

pub fn run(a: &MismatchArgs) -> Result<()> {
    let known = keys(&[SIM_KEYS, BOOT_KEYS, &["data", "target", "standardize", "a0", "b0", "lambda"]]);
    let mut s = Settings::new(ConfigFile::load(a.run.config.as_deref(), &known)?);
    let out = a.run.out_dir(&mut s)?;
    let seed = s.get("seed", a.run.seed, 0)?;
    let path: Option<String> = s.opt("data", a.data.as_ref().map(|p| p.display().to_string()))?;
    let (data, names, source) = match path {
        Some(path) => {
            let target: String = s.require("target", a.target.clone())?;
            let standardize = s.get("standardize", a.no_standardize.then_some(false), true)?;
            let t = read_table(path.as_ref(), &target, standardize)?;
            (t.data, t.names, path)
        }
        None => {
            let base = a.sim.resolve(&mut s, 10_000)?;
            let cfg = SimConfig {
                seed: derive_seed(seed, 0),
                ..base
            };
            let data = sample_dataset(&cfg)?;
            let names = (1..=cfg.d).map(|j| j.to_string()).collect();
            (data, names, "simulated".to_string())
        }
    };
    let d = data.d();
    let hyper = NigHyperparams {
        a0: s.get("a0", a.a0, 2.0)?,
        b0: s.get("b0", a.b0, 1.0)?,
        lambda: s.get("lambda", a.lambda, 16.0)?,
        q0: 0.5,
        k_star: d,
    };
    hyper.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let (m, b) = a.boot.resolve(&mut s)?;
    let boot = bootstrap(m, b, data.n(), derive_seed(seed, 1))?;
    let report = linreg_mismatch(&data, &InclusionVector::full(d), &hyper, &boot)?;

    let coords = report
        .per_coord
        .iter()
        .map(|c| MismatchCoord {
            coord: c.coord,
            label: if c.coord == 0 {
                "log_sigma2".to_string()
            } else {
                format!("beta_{}", names[c.coord - 1])
            },
            v: c.v,
            v_bb: c.v_bb,
            index: c.index.value(),
        })
        .collect();
    let file = MismatchFile {
        schema: schema_tag(MISMATCH),
        source,
        n: data.n(),
        d,
        m: boot.m,
        b: boot.b,
        seed,
        overall: report.overall.value(),
        coords,
    };
    let mut dir = OutDir::create(&out)?;
    dir.write_mismatch("mismatch.json", &file)?;
    dir.finish("mismatch", s.into_resolved())?;
    println!("overall mismatch index: {}", report.overall);
    Ok(())
}
