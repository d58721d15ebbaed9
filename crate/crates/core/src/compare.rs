//! Highest-posterior-density regions and overlap for discrete posteriors.
//!
//! Items are opaque strings (for example canonical tree topologies). HPD
//! regions are built greedily by descending probability with ties broken by
//! ascending item identifier, so regions are deterministic and nested across
//! levels.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::engine::replicate_rng;
use crate::error::{Error, Result};

/// Default HPD level used for overlap comparisons.
pub const DEFAULT_HPD_LEVEL: f64 = 0.99;
/// Default confidence level for bootstrap overlap intervals.
pub const DEFAULT_CI_LEVEL: f64 = 0.8;

const MASS_TOLERANCE: f64 = 1e-12;

/// Probability distribution over distinct discrete items.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretePosterior {
    probs: BTreeMap<String, f64>,
}

impl DiscretePosterior {
    pub fn new<I, S>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut probs = BTreeMap::new();
        for (item, p) in items {
            let item = item.into();
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("probability of '{item}' is {p}")));
            }
            if probs.insert(item.clone(), p).is_some() {
                return Err(Error::invalid(format!("duplicate item '{item}'")));
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Empirical distribution of a sequence of sampled items.
    pub fn from_samples<I, S>(samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut total = 0usize;
        for s in samples {
            *counts.entry(s.as_ref().to_owned()).or_default() += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::DegenerateInput("no posterior samples".into()));
        }
        let probs = counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total as f64))
            .collect();
        Ok(Self { probs })
    }

    /// Equal-weight average of several posteriors (the bagged posterior).
    pub fn average(posteriors: &[&DiscretePosterior]) -> Result<Self> {
        if posteriors.is_empty() {
            return Err(Error::InsufficientReplicates { needed: 1, got: 0 });
        }
        let w = 1.0 / posteriors.len() as f64;
        let mut probs: BTreeMap<String, f64> = BTreeMap::new();
        for p in posteriors {
            for (k, v) in &p.probs {
                *probs.entry(k.clone()).or_default() += w * v;
            }
        }
        Ok(Self { probs })
    }

    pub fn prob(&self, item: &str) -> f64 {
        self.probs.get(item).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Items in an HPD region, in inclusion order, with their total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpdRegion {
    pub items: Vec<String>,
    pub mass: f64,
}

impl HpdRegion {
    pub fn contains(&self, item: &str) -> bool {
        self.items.iter().any(|i| i == item)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("HPD level must be in (0, 1], got {level}")))
    }
}

/// Smallest set of items whose mass reaches `level`.
pub fn hpd_region(post: &DiscretePosterior, level: f64) -> Result<HpdRegion> {
    check_level(level)?;
    let mut ranked: Vec<(&str, f64)> = post.iter().collect();
    // BTreeMap iteration is already id-ascending, and the sort is stable
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut items = Vec::new();
    let mut mass = 0.0;
    for (item, p) in ranked {
        if mass >= level - MASS_TOLERANCE {
            break;
        }
        items.push(item.to_owned());
        mass += p;
    }
    Ok(HpdRegion { items, mass })
}

/// Overlap of two HPD regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    /// Mass of `a` on the intersection.
    pub mass_a: f64,
    /// Mass of `b` on the intersection.
    pub mass_b: f64,
    pub mass_avg: f64,
    pub count: usize,
}

/// Summary statistic extracted from an [`Overlap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OverlapStat {
    MassA,
    MassB,
    MassAvg,
    Count,
}

impl Overlap {
    pub fn stat(&self, which: OverlapStat) -> f64 {
        match which {
            OverlapStat::MassA => self.mass_a,
            OverlapStat::MassB => self.mass_b,
            OverlapStat::MassAvg => self.mass_avg,
            OverlapStat::Count => self.count as f64,
        }
    }
}

pub fn hpd_overlap(a: &DiscretePosterior, b: &DiscretePosterior, level: f64) -> Result<Overlap> {
    let ra = hpd_region(a, level)?;
    let rb = hpd_region(b, level)?;
    let sa: BTreeSet<&str> = ra.items.iter().map(String::as_str).collect();
    let sb: BTreeSet<&str> = rb.items.iter().map(String::as_str).collect();
    let common: Vec<&str> = sa.intersection(&sb).copied().collect();
    let mass_a: f64 = common.iter().map(|i| a.prob(i)).sum();
    let mass_b: f64 = common.iter().map(|i| b.prob(i)).sum();
    Ok(Overlap {
        mass_a,
        mass_b,
        mass_avg: 0.5 * (mass_a + mass_b),
        count: common.len(),
    })
}

/// The comparison target for a bagged posterior.
#[derive(Debug, Clone, Copy)]
pub enum OverlapTarget<'a> {
    /// A single posterior, e.g. the standard posterior.
    Fixed(&'a DiscretePosterior),
    /// Another bagged posterior given by its replicates, resampled jointly.
    Replicates(&'a [DiscretePosterior]),
}

/// Point estimate and percentile bootstrap interval for an overlap statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapInterval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

fn averaged(reps: &[DiscretePosterior], idx: &[usize]) -> Result<DiscretePosterior> {
    let chosen: Vec<&DiscretePosterior> = idx.iter().map(|&i| &reps[i]).collect();
    DiscretePosterior::average(&chosen)
}

/// Bootstrap interval for the overlap between the averaged replicates of `a`
/// and `target`. Replicates are resampled with replacement `n_boot` times.
#[allow(clippy::too_many_arguments)]
pub fn overlap_ci(
    replicates_a: &[DiscretePosterior],
    target: OverlapTarget<'_>,
    level: f64,
    stat: OverlapStat,
    n_boot: usize,
    ci_level: f64,
    seed: u64,
) -> Result<OverlapInterval> {
    check_level(level)?;
    if replicates_a.len() < 2 {
        return Err(Error::InsufficientReplicates {
            needed: 2,
            got: replicates_a.len(),
        });
    }
    if let OverlapTarget::Replicates(r) = target {
        if r.len() < 2 {
            return Err(Error::InsufficientReplicates { needed: 2, got: r.len() });
        }
    }
    if n_boot < 100 {
        return Err(Error::invalid(format!("need at least 100 bootstrap draws, got {n_boot}")));
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::invalid(format!("confidence level must be in (0, 1), got {ci_level}")));
    }

    let all_a: Vec<usize> = (0..replicates_a.len()).collect();
    let eval = |idx_a: &[usize], idx_b: Option<&[usize]>| -> Result<f64> {
        let pa = averaged(replicates_a, idx_a)?;
        let ov = match (target, idx_b) {
            (OverlapTarget::Fixed(b), _) => hpd_overlap(&pa, b, level)?,
            (OverlapTarget::Replicates(rb), Some(ib)) => hpd_overlap(&pa, &averaged(rb, ib)?, level)?,
            (OverlapTarget::Replicates(rb), None) => {
                let all: Vec<usize> = (0..rb.len()).collect();
                hpd_overlap(&pa, &averaged(rb, &all)?, level)?
            }
        };
        Ok(ov.stat(stat))
    };
    let estimate = eval(&all_a, None)?;

    let mut rng = replicate_rng(seed, 0);
    let mut draws = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let ia: Vec<usize> = (0..replicates_a.len())
            .map(|_| rng.random_range(0..replicates_a.len()))
            .collect();
        let v = match target {
            OverlapTarget::Fixed(_) => eval(&ia, None)?,
            OverlapTarget::Replicates(rb) => {
                let ib: Vec<usize> = (0..rb.len()).map(|_| rng.random_range(0..rb.len())).collect();
                eval(&ia, Some(&ib))?
            }
        };
        draws.push(v);
    }
    draws.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - ci_level);
    Ok(OverlapInterval {
        estimate,
        lo: crate::stats::quantile_sorted(&draws, tail),
        hi: crate::stats::quantile_sorted(&draws, 1.0 - tail),
    })
}
