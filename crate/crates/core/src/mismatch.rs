//! Model–data mismatch index over coordinate projections.
//!
//! For a functional `f(θ)` with standard posterior variance `v` and bagged
//! posterior variance `v_bb` (bootstrap size `M = N`), a calibrated posterior
//! has `v_bb ≈ 2v`. The index `1 − 2v/v_bb` is near zero then, positive when
//! the standard posterior is overconfident, and `NA` when `v_bb ≤ v`.

use serde::{Serialize, Serializer};

use crate::engine::{map_replicates, BootstrapConfig, WeightVector};
use crate::error::{Error, Result};
use crate::linreg::{moments_from_stats, InclusionVector, NigHyperparams, ParamMoments, RegressionDataset, SufficientStats};

/// Mismatch index value; `None` is the NA outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchValue(Option<f64>);

impl MismatchValue {
    pub const NA: Self = Self(None);

    pub fn value(&self) -> Option<f64> {
        self.0
    }

    pub fn is_na(&self) -> bool {
        self.0.is_none()
    }
}

impl std::fmt::Display for MismatchValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("NA"),
        }
    }
}

impl Serialize for MismatchValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("NA"),
        }
    }
}

/// `1 − 2v/v_bb` if `v_bb > v`, else NA.
pub fn mismatch_index(v: f64, v_bb: f64) -> Result<MismatchValue> {
    for (name, x) in [("v", v), ("v_bb", v_bb)] {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::invalid(format!("{name} must be finite and >= 0, got {x}")));
        }
    }
    if v_bb > v {
        Ok(MismatchValue(Some(1.0 - 2.0 * v / v_bb)))
    } else {
        Ok(MismatchValue::NA)
    }
}

/// Variance of the equal-weight mixture of replicate posteriors: mean of the
/// within-replicate variances plus the (denominator-B) variance of the means.
pub fn bagged_variance_of_projection(replicate_moments: &[(f64, f64)]) -> Result<f64> {
    let b = replicate_moments.len();
    if b < 2 {
        return Err(Error::InsufficientReplicates { needed: 2, got: b });
    }
    let bf = b as f64;
    let within = replicate_moments.iter().map(|(_, v)| v).sum::<f64>() / bf;
    let grand = replicate_moments.iter().map(|(m, _)| m).sum::<f64>() / bf;
    let between = replicate_moments
        .iter()
        .map(|(m, _)| (m - grand) * (m - grand))
        .sum::<f64>()
        / bf;
    Ok(within + between)
}

/// Per-coordinate and overall (supremum) mismatch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MismatchReport {
    /// NA if any coordinate is NA, else the largest coordinate index.
    pub overall: MismatchValue,
    pub per_coord: Vec<CoordMismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordMismatch {
    pub coord: usize,
    pub v: f64,
    pub v_bb: f64,
    pub index: MismatchValue,
}

/// Mismatch over the requested coordinates of `θ = (log σ², β_1, …)`.
///
/// `bagged` holds one [`ParamMoments`] per bootstrap replicate. Coordinate 0
/// is `log σ²`; coordinate `j ≥ 1` is `β_j`.
pub fn mismatch_index_proj(
    standard: &ParamMoments,
    bagged: &[ParamMoments],
    coords: &[usize],
) -> Result<MismatchReport> {
    let std_coords = standard.coordinates();
    let rep_coords: Vec<Vec<(f64, f64)>> = bagged.iter().map(ParamMoments::coordinates).collect();
    if rep_coords.iter().any(|c| c.len() != std_coords.len()) {
        return Err(Error::invalid("replicate moments do not match the standard posterior's dimension"));
    }
    let mut per_coord = Vec::with_capacity(coords.len());
    for &j in coords {
        let (_, v) = *std_coords
            .get(j)
            .ok_or_else(|| Error::invalid(format!("coordinate {j} out of range")))?;
        let column: Vec<(f64, f64)> = rep_coords.iter().map(|c| c[j]).collect();
        let v_bb = bagged_variance_of_projection(&column)?;
        per_coord.push(CoordMismatch {
            coord: j,
            v,
            v_bb,
            index: mismatch_index(v, v_bb)?,
        });
    }
    let overall = per_coord
        .iter()
        .try_fold(f64::NEG_INFINITY, |acc, c| c.index.value().map(|v| acc.max(v)))
        .filter(|v| v.is_finite())
        .map_or(MismatchValue::NA, |v| MismatchValue(Some(v)));
    Ok(MismatchReport { overall, per_coord })
}

/// Standard and bagged moments of model `γ`, then the projection index over
/// every coordinate of `θ`.
pub fn linreg_mismatch(
    data: &RegressionDataset,
    gamma: &InclusionVector,
    hyper: &NigHyperparams,
    config: &BootstrapConfig,
) -> Result<MismatchReport> {
    if gamma.dim() != data.d() {
        return Err(Error::invalid("inclusion vector does not match the dataset"));
    }
    let idx = gamma.indices();
    let full = SufficientStats::compute(data, &WeightVector::unit(data.n()))?;
    let standard = moments_from_stats(&full, &idx, hyper)?;
    let bagged = map_replicates(data.n(), config, |_, w| {
        let stats = SufficientStats::compute(data, w)?;
        moments_from_stats(&stats, &idx, hyper)
    })?;
    let coords: Vec<usize> = (0..=idx.len()).collect();
    mismatch_index_proj(&standard, &bagged, &coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(var: &[f64], mean: &[f64]) -> ParamMoments {
        ParamMoments {
            mean_log_sigma2: mean[0],
            var_log_sigma2: var[0],
            mean_beta: mean[1..].to_vec(),
            var_beta: var[1..].to_vec(),
        }
    }

    #[test]
    fn index_examples() {
        assert_eq!(mismatch_index(1.0, 2.0).unwrap().value(), Some(0.0));
        assert!(mismatch_index(1.0, 1.0).unwrap().is_na());
        assert!(mismatch_index(2.0, 1.0).unwrap().is_na());
        assert_eq!(mismatch_index(1.0, 4.0).unwrap().value(), Some(0.5));
        assert!(mismatch_index(-1.0, 1.0).is_err());
        assert!(mismatch_index(1.0, f64::NAN).is_err());
    }

    #[test]
    fn mixture_variance_examples() {
        assert_eq!(bagged_variance_of_projection(&[(0.3, 2.0); 4]).unwrap(), 2.0);
        assert_eq!(bagged_variance_of_projection(&[(0.0, 0.0), (1.0, 0.0)]).unwrap(), 0.25);
        assert!(bagged_variance_of_projection(&[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn overall_is_sup_with_na_dominating() {
        let std = moments(&[1.0, 1.0], &[0.0, 0.0]);
        // replicates with zero spread: v_bb = within variance
        let calibrated = vec![moments(&[2.0, 2.0], &[0.0, 0.0]); 3];
        let r = mismatch_index_proj(&std, &calibrated, &[0, 1]).unwrap();
        assert_eq!(r.overall.value(), Some(0.0));

        // coordinate indices 0.1 and 0.62 → overall 0.62
        let v_bb = [2.0 / 0.9, 2.0 / 0.38];
        let reps = vec![moments(&v_bb, &[0.0, 0.0]); 2];
        let r = mismatch_index_proj(&std, &reps, &[0, 1]).unwrap();
        assert!((r.overall.value().unwrap() - 0.62).abs() < 1e-12);

        let reps = vec![moments(&[2.0, 0.5], &[0.0, 0.0]); 2];
        let r = mismatch_index_proj(&std, &reps, &[0, 1]).unwrap();
        assert!(r.per_coord[1].index.is_na());
        assert!(r.overall.is_na());
    }

    #[test]
    fn display_uses_na_marker() {
        assert_eq!(MismatchValue::NA.to_string(), "NA");
        assert_eq!(MismatchValue(Some(0.25)).to_string(), "0.25");
    }
}
