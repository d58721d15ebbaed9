use bayesbag_core::simgen::{sample_dataset, SimConfig};
use clap::Args;

use super::{derive_seed, keys, RunArgs, SimArgs, SIM_KEYS};
use crate::config::{ConfigFile, Settings};
use crate::error::Result;
use crate::output::{Cell, OutDir, DATASET};

/// Writes one simulated dataset as CSV with header `z1..zD,y`.
#[derive(Args, Debug, Clone)]
pub struct DatasetArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub sim: SimArgs,
}

pub fn run(a: &DatasetArgs) -> Result<()> {
    let mut s = Settings::new(ConfigFile::load(a.run.config.as_deref(), &keys(&[SIM_KEYS]))?);
    let out = a.run.out_dir(&mut s)?;
    let seed = s.get("seed", a.run.seed, 0)?;
    let base = a.sim.resolve(&mut s, 1000)?;
    let cfg = SimConfig {
        seed: derive_seed(seed, 0),
        ..base
    };
    let data = sample_dataset(&cfg)?;
    let header: Vec<String> = (1..=cfg.d).map(|j| format!("z{j}")).chain(["y".to_string()]).collect();
    let rows: Vec<Vec<Cell>> = (0..data.n())
        .map(|i| {
            data.row(i)
                .iter()
                .chain([&data.y()[i]])
                .map(|&v| Cell::F(v))
                .collect()
        })
        .collect();
    let mut dir = OutDir::create(&out)?;
    dir.write_csv("dataset.csv", DATASET, &header, &rows)?;
    dir.finish("dataset", s.into_resolved())?;
    println!("wrote {} rows with D = {} to {}", data.n(), cfg.d, out.display());
    Ok(())
}
