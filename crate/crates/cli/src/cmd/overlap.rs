use std::path::PathBuf;
use std::str::FromStr;

use bayesbag_core::compare::{
    hpd_overlap, overlap_ci, DiscretePosterior, OverlapStat, OverlapTarget, DEFAULT_CI_LEVEL, DEFAULT_HPD_LEVEL,
};
use clap::Args;

use super::{keys, RunArgs};
use crate::config::{ConfigFile, Settings};
use crate::error::{CliError, Result};
use crate::ingest::read_samples;
use crate::output::{Cell, OutDir, OVERLAP};

/// HPD-region overlap between two sets of posterior sample files.
///
/// Several files on one side are treated as bootstrap replicates and averaged.
#[derive(Args, Debug, Clone)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Sample files for the first posterior
    #[arg(long = "a", num_args = 1.., required = true)]
    pub a: Vec<PathBuf>,
    /// Sample files for the second posterior
    #[arg(long = "b", num_args = 1.., required = true)]
    pub b: Vec<PathBuf>,
    /// HPD level
    #[arg(long)]
    pub level: Option<f64>,
    /// Add a bootstrap interval over the replicates of the first posterior
    #[arg(long)]
    pub ci: bool,
    #[arg(long)]
    pub ci_level: Option<f64>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    /// mass_a, mass_b, mass_avg or count
    #[arg(long)]
    pub stat: Option<Stat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stat(pub OverlapStat);

impl FromStr for Stat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(Stat(match s {
            "mass_a" => OverlapStat::MassA,
            "mass_b" => OverlapStat::MassB,
            "mass_avg" => OverlapStat::MassAvg,
            "count" => OverlapStat::Count,
            other => return Err(format!("unknown statistic '{other}'")),
        }))
    }
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self.0 {
            OverlapStat::MassA => "mass_a",
            OverlapStat::MassB => "mass_b",
            OverlapStat::MassAvg => "mass_avg",
            OverlapStat::Count => "count",
        })
    }
}

fn load(paths: &[PathBuf]) -> Result<Vec<DiscretePosterior>> {
    paths.iter().map(|p| read_samples(p)).collect()
}

pub fn run(a: &OverlapArgs) -> Result<()> {
    let known = keys(&[&["level", "ci_level", "n_boot", "stat"]]);
    let mut s = Settings::new(ConfigFile::load(a.run.config.as_deref(), &known)?);
    let out = a.run.out_dir(&mut s)?;
    let seed = s.get("seed", a.run.seed, 0)?;
    let level = s.get("level", a.level, DEFAULT_HPD_LEVEL)?;
    let reps_a = load(&a.a)?;
    let reps_b = load(&a.b)?;
    let avg = |r: &[DiscretePosterior]| DiscretePosterior::average(&r.iter().collect::<Vec<_>>());
    let (post_a, post_b) = (avg(&reps_a)?, avg(&reps_b)?);
    let o = hpd_overlap(&post_a, &post_b, level)?;

    let mut row = vec![
        Cell::from(level),
        reps_a.len().into(),
        reps_b.len().into(),
        o.mass_a.into(),
        o.mass_b.into(),
        o.mass_avg.into(),
        o.count.into(),
    ];
    if a.ci {
        let ci_level = s.get("ci_level", a.ci_level, DEFAULT_CI_LEVEL)?;
        let n_boot = s.get("n_boot", a.n_boot, 1000)?;
        let stat = s.get("stat", a.stat, Stat(OverlapStat::MassAvg))?;
        if reps_a.len() < 2 {
            return Err(CliError::usage("a bootstrap interval needs at least two --a files"));
        }
        let target = if reps_b.len() > 1 {
            OverlapTarget::Replicates(&reps_b)
        } else {
            OverlapTarget::Fixed(&post_b)
        };
        let ci = overlap_ci(&reps_a, target, level, stat.0, n_boot, ci_level, seed)?;
        println!("{stat} = {} with {ci_level} interval [{}, {}]", ci.estimate, ci.lo, ci.hi);
        row.extend([Cell::from(stat.to_string()), ci_level.into(), ci.lo.into(), ci.hi.into()]);
    } else {
        row.extend([Cell::from("none"), Cell::Na, Cell::Na, Cell::Na]);
    }
    println!(
        "mass_a = {}, mass_b = {}, mass_avg = {}, count = {}",
        o.mass_a, o.mass_b, o.mass_avg, o.count
    );
    let mut dir = OutDir::create(&out)?;
    dir.write_table("overlap.csv", OVERLAP, &[row])?;
    dir.finish("overlap", s.into_resolved())?;
    Ok(())
}
