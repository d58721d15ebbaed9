//! Conjugate normal–inverse-gamma linear regression with feature selection.
//!
//! Model `γ` regresses `y` on the columns of `Z` flagged in `γ`:
//!
//! ```text
//! σ² ~ InvGamma(a0, b0)
//! β_d | σ² ~ N(0, σ²/λ)
//! y_n | z_n, β, σ² ~ N(z_{γ,n}ᵀ β, σ²)
//! ```
//!
//! All quantities depend on the data only through weighted sufficient
//! statistics, so a bootstrap replicate costs one pass over the rows plus a
//! small Cholesky factorization per model.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::engine::{
    bagged_model_posterior, standard_model_posterior, BaggedPosterior, BootstrapConfig,
    ModelPosterior, WeightVector, WeightedEvidence,
};
use crate::error::{Error, Result};
use crate::special::{digamma, ln_2pi, ln_gamma, trigamma};

/// Largest model set `enumerate_models` will build.
pub const MODEL_ENUMERATION_LIMIT: u128 = 10_000_000;

const CHOLESKY_JITTER: [f64; 3] = [0.0, 1e-12, 1e-10];

/// Regressors `Z` (N × D, row-major) and responses `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    n: usize,
    d: usize,
    z: Vec<f64>,
    y: Vec<f64>,
}

impl RegressionDataset {
    /// Builds a dataset from row-major regressors.
    pub fn new(n: usize, d: usize, z: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("dataset must have N >= 1 and D >= 1, got N={n}, D={d}")));
        }
        if z.len() != n * d || y.len() != n {
            return Err(Error::invalid(format!(
                "shape mismatch: expected {}x{} regressors and {} responses, got {} and {}",
                n,
                d,
                n,
                z.len(),
                y.len()
            )));
        }
        if z.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NumericDomain("dataset contains non-finite values".into()));
        }
        Ok(Self { n, d, z, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged regressor rows"));
        }
        Self::new(rows.len(), d, rows.concat(), y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.z[i * self.d + j]).collect()
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut z = Vec::with_capacity(idx.len() * self.d);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            z.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self::new(idx.len(), self.d, z, y)
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut z = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            let row = self.row(i);
            z.extend(cols.iter().map(|&j| row[j]));
        }
        Self::new(self.n, cols.len(), z, self.y.clone())
    }
}

/// Binary inclusion vector `γ` over the D regressors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct InclusionVector {
    gamma: Vec<bool>,
}

impl InclusionVector {
    pub fn new(gamma: Vec<bool>) -> Self {
        Self { gamma }
    }

    pub fn from_indices(d: usize, included: &[usize]) -> Result<Self> {
        let mut gamma = vec![false; d];
        for &i in included {
            *gamma
                .get_mut(i)
                .ok_or_else(|| Error::invalid(format!("regressor index {i} out of range for D={d}")))? =
                true;
        }
        Ok(Self { gamma })
    }

    /// The model with every regressor included.
    pub fn full(d: usize) -> Self {
        Self { gamma: vec![true; d] }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// `D_γ`, the number of included regressors.
    pub fn size(&self) -> usize {
        self.gamma.iter().filter(|&&g| g).count()
    }

    pub fn includes(&self, d: usize) -> bool {
        self.gamma[d]
    }

    pub fn indices(&self) -> Vec<usize> {
        self.gamma
            .iter()
            .enumerate()
            .filter_map(|(i, &g)| g.then_some(i))
            .collect()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.gamma
    }
}

/// Conjugate prior settings and the model-size cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NigHyperparams {
    pub a0: f64,
    pub b0: f64,
    pub lambda: f64,
    pub q0: f64,
    pub k_star: usize,
}

impl NigHyperparams {
    pub fn new(a0: f64, b0: f64, lambda: f64, q0: f64, k_star: usize) -> Result<Self> {
        let h = Self {
            a0,
            b0,
            lambda,
            q0,
            k_star,
        };
        h.validate()?;
        Ok(h)
    }

    /// Simulation-study defaults: `a0 = 2`, `b0 = 1`, `λ = 16`.
    pub fn simulation_defaults(q0: f64, k_star: usize) -> Result<Self> {
        Self::new(2.0, 1.0, 16.0, q0, k_star)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos("a0", self.a0)?;
        pos("b0", self.b0)?;
        pos("lambda", self.lambda)?;
        if !(self.q0 > 0.0 && self.q0 < 1.0) {
            return Err(Error::invalid(format!("q0 must lie in (0, 1), got {}", self.q0)));
        }
        if self.k_star == 0 {
            return Err(Error::invalid("k* must be at least 1"));
        }
        Ok(())
    }

    /// Checks `k* <= D` on top of [`validate`](Self::validate).
    pub fn validate_for(&self, d: usize) -> Result<()> {
        self.validate()?;
        if self.k_star > d {
            return Err(Error::invalid(format!("k* = {} exceeds D = {d}", self.k_star)));
        }
        Ok(())
    }
}

/// Weighted sufficient statistics `(M, ZᵀWZ, ZᵀWY, YᵀWY)`.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub m: f64,
    pub ztz: DMatrix<f64>,
    pub zty: DVector<f64>,
    pub yty: f64,
}

impl SufficientStats {
    /// Accumulates row `n` once per bootstrap copy, so a weighted dataset and
    /// its explicitly replicated counterpart produce bit-identical sums.
    pub fn compute(data: &RegressionDataset, weights: &WeightVector) -> Result<Self> {
        if weights.len() != data.n() {
            return Err(Error::invalid(format!(
                "weight vector has length {} but dataset has {} rows",
                weights.len(),
                data.n()
            )));
        }
        let d = data.d();
        // packed upper triangle of ZᵀWZ
        let mut tri = vec![0.0; d * (d + 1) / 2];
        let mut prod = vec![0.0; d * (d + 1) / 2];
        let mut zty = vec![0.0; d];
        let mut zy = vec![0.0; d];
        let mut yty = 0.0;
        for (i, &c) in weights.counts().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let row = data.row(i);
            let y = data.y[i];
            let mut p = 0;
            for a in 0..d {
                for b in a..d {
                    prod[p] = row[a] * row[b];
                    p += 1;
                }
                zy[a] = row[a] * y;
            }
            let yy = y * y;
            for _ in 0..c {
                for (t, v) in tri.iter_mut().zip(&prod) {
                    *t += v;
                }
                for (t, v) in zty.iter_mut().zip(&zy) {
                    *t += v;
                }
                yty += yy;
            }
        }
        let mut ztz = DMatrix::zeros(d, d);
        let mut p = 0;
        for a in 0..d {
            for b in a..d {
                ztz[(a, b)] = tri[p];
                ztz[(b, a)] = tri[p];
                p += 1;
            }
        }
        Ok(Self {
            m: weights.total() as f64,
            ztz,
            zty: DVector::from_vec(zty),
            yty,
        })
    }
}

/// `Λ_γ`, its Cholesky factor and the derived quantities shared by the
/// evidence and the posterior moments.
struct ConjugateFit {
    chol: Cholesky<f64, Dyn>,
    rhs: DVector<f64>,
    b_post: f64,
    log_det: f64,
}

fn fit(stats: &SufficientStats, idx: &[usize], hyper: &NigHyperparams) -> Result<ConjugateFit> {
    let k = idx.len();
    let mut lam = DMatrix::from_fn(k, k, |i, j| stats.ztz[(idx[i], idx[j])]);
    for i in 0..k {
        lam[(i, i)] += hyper.lambda;
    }
    let rhs = DVector::from_fn(k, |i, _| stats.zty[idx[i]]);
    let chol = cholesky_with_jitter(lam)?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let half = chol.l().solve_lower_triangular(&rhs).ok_or_else(|| {
        Error::NumericDomain("triangular solve failed for Λ_γ".into())
    })?;
    let quad = (stats.yty - half.norm_squared()).max(0.0);
    let b_post = hyper.b0 + 0.5 * quad;
    Ok(ConjugateFit {
        chol,
        rhs,
        b_post,
        log_det,
    })
}

fn cholesky_with_jitter(mat: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericDomain("Λ_γ has non-finite entries".into()));
    }
    for &eps in &CHOLESKY_JITTER {
        let mut m = mat.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += eps;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok(c);
        }
    }
    Err(Error::NumericDomain("Λ_γ is not positive definite".into()))
}

/// Log marginal likelihood of model `γ` given precomputed statistics.
pub fn log_ml_from_stats(stats: &SufficientStats, idx: &[usize], hyper: &NigHyperparams) -> Result<f64> {
    let f = fit(stats, idx, hyper)?;
    let a_post = hyper.a0 + 0.5 * stats.m;
    Ok(hyper.a0 * hyper.b0.ln() + ln_gamma(a_post)
        - 0.5 * stats.m * ln_2pi()
        - ln_gamma(hyper.a0)
        + 0.5 * idx.len() as f64 * hyper.lambda.ln()
        - a_post * f.b_post.ln()
        - 0.5 * f.log_det)
}

/// Log marginal likelihood of `γ` on the dataset replicated by `weights`.
pub fn log_marginal_likelihood(
    data: &RegressionDataset,
    weights: &WeightVector,
    gamma: &InclusionVector,
    hyper: &NigHyperparams,
) -> Result<f64> {
    check_gamma(data, gamma)?;
    let stats = SufficientStats::compute(data, weights)?;
    log_ml_from_stats(&stats, &gamma.indices(), hyper)
}

fn check_gamma(data: &RegressionDataset, gamma: &InclusionVector) -> Result<()> {
    if gamma.dim() != data.d() {
        return Err(Error::invalid(format!(
            "inclusion vector has length {} but dataset has D = {}",
            gamma.dim(),
            data.d()
        )));
    }
    Ok(())
}

/// `Σ_{j ≤ k*} C(D, j)`, or `None` on overflow.
pub fn model_count(d: usize, k_star: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for j in 0..=k_star.min(d) {
        total = total.checked_add(binom)?;
        binom = binom.checked_mul((d - j) as u128)? / (j as u128 + 1);
    }
    Some(total)
}

/// Every inclusion vector with at most `k_star` regressors.
///
/// Ordered by model size, then lexicographically by the sorted list of
/// included indices: `∅, {0}, {1}, …, {0,1}, {0,2}, …`.
pub fn enumerate_models(d: usize, k_star: usize) -> Result<Vec<InclusionVector>> {
    if d == 0 || k_star == 0 || k_star > d {
        return Err(Error::invalid(format!("need 1 <= k* <= D, got k*={k_star}, D={d}")));
    }
    let count = model_count(d, k_star);
    match count {
        Some(c) if c <= MODEL_ENUMERATION_LIMIT => {}
        other => {
            return Err(Error::ResourceLimit {
                what: format!("enumerating models with D={d}, k*={k_star}"),
                required: other.unwrap_or(u128::MAX),
                limit: MODEL_ENUMERATION_LIMIT,
            })
        }
    }
    let mut out = Vec::with_capacity(count.unwrap_or(0) as usize);
    for size in 0..=k_star {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(InclusionVector::from_indices(d, &idx)?);
            // advance to the next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&i| idx[i] < d - size + i) else {
                break;
            };
            idx[pos] += 1;
            for i in pos + 1..size {
                idx[i] = idx[i - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Unnormalized log prior `D_γ log q0 + (D − D_γ) log(1 − q0)`.
pub fn log_prior_gamma(gamma: &InclusionVector, hyper: &NigHyperparams) -> f64 {
    let k = gamma.size() as f64;
    let d = gamma.dim() as f64;
    k * hyper.q0.ln() + (d - k) * (1.0 - hyper.q0).ln()
}

/// Posterior inclusion probabilities from model probabilities aligned with `models`.
pub fn pips(probs: &[f64], models: &[InclusionVector]) -> Result<Vec<f64>> {
    if probs.len() != models.len() {
        return Err(Error::invalid(format!(
            "posterior has {} entries but {} models were enumerated",
            probs.len(),
            models.len()
        )));
    }
    let d = models.first().map_or(0, InclusionVector::dim);
    let mut out = vec![0.0; d];
    for (p, g) in probs.iter().zip(models) {
        for j in g.indices() {
            out[j] += p;
        }
    }
    Ok(out)
}

/// Posterior means and variances of `θ = (log σ², β_γ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamMoments {
    pub mean_log_sigma2: f64,
    pub var_log_sigma2: f64,
    pub mean_beta: Vec<f64>,
    pub var_beta: Vec<f64>,
}

impl ParamMoments {
    /// `(mean, variance)` per coordinate, `log σ²` first.
    pub fn coordinates(&self) -> Vec<(f64, f64)> {
        std::iter::once((self.mean_log_sigma2, self.var_log_sigma2))
            .chain(self.mean_beta.iter().copied().zip(self.var_beta.iter().copied()))
            .collect()
    }
}

pub fn moments_from_stats(
    stats: &SufficientStats,
    idx: &[usize],
    hyper: &NigHyperparams,
) -> Result<ParamMoments> {
    let a_post = hyper.a0 + 0.5 * stats.m;
    if a_post <= 1.0 {
        return Err(Error::VarianceUndefined { shape: a_post });
    }
    let f = fit(stats, idx, hyper)?;
    let mean_beta = f.chol.solve(&f.rhs);
    let inv = f.chol.inverse();
    let scale = f.b_post / (a_post - 1.0);
    Ok(ParamMoments {
        mean_log_sigma2: f.b_post.ln() - digamma(a_post),
        var_log_sigma2: trigamma(a_post),
        mean_beta: mean_beta.iter().copied().collect(),
        var_beta: (0..idx.len()).map(|i| scale * inv[(i, i)]).collect(),
    })
}

/// Conjugate posterior moments of `θ` under model `γ` on the weighted data.
pub fn posterior_param_moments(
    data: &RegressionDataset,
    weights: &WeightVector,
    gamma: &InclusionVector,
    hyper: &NigHyperparams,
) -> Result<ParamMoments> {
    check_gamma(data, gamma)?;
    let stats = SufficientStats::compute(data, weights)?;
    moments_from_stats(&stats, &gamma.indices(), hyper)
}

/// Weighted evidence for every model in `M_{k*}` on a fixed dataset.
pub struct LinRegEvidence<'a> {
    data: &'a RegressionDataset,
    models: Vec<InclusionVector>,
    model_idx: Vec<Vec<usize>>,
    hyper: NigHyperparams,
}

impl<'a> LinRegEvidence<'a> {
    pub fn new(data: &'a RegressionDataset, hyper: NigHyperparams) -> Result<Self> {
        hyper.validate_for(data.d())?;
        let models = enumerate_models(data.d(), hyper.k_star)?;
        let model_idx = models.iter().map(InclusionVector::indices).collect();
        Ok(Self {
            data,
            models,
            model_idx,
            hyper,
        })
    }

    pub fn models(&self) -> &[InclusionVector] {
        &self.models
    }

    pub fn log_prior(&self) -> Vec<f64> {
        self.models
            .iter()
            .map(|g| log_prior_gamma(g, &self.hyper))
            .collect()
    }
}

impl WeightedEvidence for LinRegEvidence<'_> {
    fn n_obs(&self) -> usize {
        self.data.n()
    }

    fn n_models(&self) -> usize {
        self.models.len()
    }

    fn log_evidence(&self, weights: &WeightVector) -> Result<Vec<f64>> {
        let stats = SufficientStats::compute(self.data, weights)?;
        self.model_idx
            .iter()
            .map(|idx| log_ml_from_stats(&stats, idx, &self.hyper))
            .collect()
    }
}

/// Standard and bagged feature-selection results for one dataset.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureSelection {
    pub standard: ModelPosterior,
    pub bagged: BaggedPosterior,
    pub standard_pips: Vec<f64>,
    pub bagged_pips: Vec<f64>,
}

/// Runs standard and bagged feature selection over `M_{k*}`.
pub fn select_features(
    data: &RegressionDataset,
    hyper: &NigHyperparams,
    config: &BootstrapConfig,
) -> Result<FeatureSelection> {
    let ev = LinRegEvidence::new(data, *hyper)?;
    let prior = ev.log_prior();
    let log_ml = ev.log_evidence(&WeightVector::unit(data.n()))?;
    let standard = standard_model_posterior(&log_ml, &prior)?;
    let bagged = bagged_model_posterior(&ev, &prior, config)?;
    let standard_pips = pips(&standard.probs, ev.models())?;
    let bagged_pips = pips(&bagged.mean_probs, ev.models())?;
    Ok(FeatureSelection {
        standard,
        bagged,
        standard_pips,
        bagged_pips,
    })
}
