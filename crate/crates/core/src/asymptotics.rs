//! Limit laws of standard and bagged posterior model probabilities.
//!
//! With per-observation log-likelihood ratios whose mean is `O(N^{-1/2})`,
//! the standard posterior probability of a model converges to a Bernoulli
//! variable while the bagged posterior converges to a continuous variable on
//! `[0, 1]` whose spread is governed by `c = lim M/N`. This module evaluates
//! those laws in closed form for two models, by Monte Carlo for `K` models,
//! and provides a degenerate-parameter Bernoulli testbed for checking them by
//! simulation.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::engine::{replicate_rng, WeightVector, WeightedEvidence};
use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_ppf};

/// Threshold below which the bagged posterior "strongly" disfavors a model.
pub const DEFAULT_STRONG_THRESHOLD: f64 = 0.1;

/// Minimum Monte Carlo sample size for orthant probabilities.
pub const MIN_MVN_SAMPLES: usize = 1000;

/// Two-model limit law: effect size `δ∞` and `c = lim M/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoModelLaw {
    pub delta_inf: f64,
    pub c: f64,
}

impl TwoModelLaw {
    pub fn new(delta_inf: f64, c: f64) -> Result<Self> {
        if !delta_inf.is_finite() {
            return Err(Error::invalid(format!("effect size must be finite, got {delta_inf}")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("c must be finite and >= 0, got {c}")));
        }
        Ok(Self { delta_inf, c })
    }

    fn require_positive_c(&self) -> Result<()> {
        if self.c == 0.0 {
            Err(Error::DegenerateLaw(
                "c = 0: the bagged probability is the point mass at 1/2".into(),
            ))
        } else {
            Ok(())
        }
    }
}

/// `K`-model limit law for the probability of the anchor model.
#[derive(Debug, Clone)]
pub struct KModelLaw {
    pub mu_inf: DVector<f64>,
    pub sigma_inf: DMatrix<f64>,
    pub c: f64,
    chol: Cholesky<f64, Dyn>,
}

impl KModelLaw {
    pub fn new(mu_inf: DVector<f64>, sigma_inf: DMatrix<f64>, c: f64) -> Result<Self> {
        let k = mu_inf.len();
        if k == 0 || sigma_inf.nrows() != k || sigma_inf.ncols() != k {
            return Err(Error::invalid(format!(
                "contrast mean has length {k} but covariance is {}x{}",
                sigma_inf.nrows(),
                sigma_inf.ncols()
            )));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("c must be finite and >= 0, got {c}")));
        }
        check_symmetric(&sigma_inf)?;
        let chol = Cholesky::new(sigma_inf.clone())
            .ok_or_else(|| Error::SingularLaw("contrast covariance is not positive definite".into()))?;
        Ok(Self {
            mu_inf,
            sigma_inf,
            c,
            chol,
        })
    }

    /// Builds the law of model `anchor` from the mean and covariance of the
    /// per-model log-likelihoods.
    pub fn from_loglik_moments(
        mu_prime: &DVector<f64>,
        sigma_prime: &DMatrix<f64>,
        anchor: usize,
        c: f64,
    ) -> Result<Self> {
        let (mu, sigma) = reduce_to_contrasts(mu_prime, sigma_prime, anchor)?;
        Self::new(mu, sigma, c)
    }

    pub fn dim(&self) -> usize {
        self.mu_inf.len()
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::invalid("covariance matrix is not symmetric"));
            }
        }
    }
    Ok(())
}

/// Per-observation log-likelihood differences `z_n` between two models.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikContrasts {
    z: Vec<f64>,
}

impl LogLikContrasts {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericDomain("log-likelihood contrasts must be finite".into()));
        }
        Ok(Self { z })
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }
}

/// Parameter `Φ(δ∞)` of the Bernoulli limit of the standard posterior
/// probability of model 1.
pub fn std_limit_bernoulli_2(law: &TwoModelLaw) -> f64 {
    norm_cdf(law.delta_inf)
}

/// `P(U = 0) = 1 - Φ(δ∞)`: the standard posterior overwhelmingly rejects model 1.
pub fn std_prob_rejects(law: &TwoModelLaw) -> f64 {
    norm_cdf(-law.delta_inf)
}

/// CDF of `U^bb = Φ(c^{1/2} W)`, `W ~ N(δ∞, 1)`:
/// `F(u) = Φ(c^{-1/2} Φ⁻¹(u) − δ∞)`.
pub fn ubb_cdf(u: f64, law: &TwoModelLaw) -> Result<f64> {
    law.require_positive_c()?;
    if u.is_nan() {
        return Err(Error::NumericDomain("u is NaN".into()));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    if u >= 1.0 {
        return Ok(1.0);
    }
    Ok(norm_cdf(norm_ppf(u) / law.c.sqrt() - law.delta_inf))
}

/// Density of `U^bb` on `(0, 1)`, evaluated in log space.
pub fn ubb_density(u: f64, law: &TwoModelLaw) -> Result<f64> {
    Ok(ubb_log_density(u, law)?.exp())
}

pub fn ubb_log_density(u: f64, law: &TwoModelLaw) -> Result<f64> {
    law.require_positive_c()?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::NumericDomain(format!("density is defined on (0, 1), got u = {u}")));
    }
    let x = norm_ppf(u);
    let s = law.c.sqrt();
    let t = x / s - law.delta_inf;
    Ok(0.5 * (x * x - t * t) - s.ln())
}

/// Draws from the two-model bagged limit `Φ(c^{1/2} W)`.
pub fn sample_ubb_2<R: Rng + ?Sized>(law: &TwoModelLaw, n: usize, rng: &mut R) -> Vec<f64> {
    let s = law.c.sqrt();
    (0..n)
        .map(|_| {
            let w: f64 = rng.sample(StandardNormal);
            norm_cdf(s * (law.delta_inf + w))
        })
        .collect()
}

/// Contrast mean and covariance of model `anchor` against every other model:
/// `μ_k = μ′_a − μ′_k`, `Σ_{kl} = Σ′_{aa} + Σ′_{kl} − Σ′_{ak} − Σ′_{al}`.
pub fn reduce_to_contrasts(
    mu_prime: &DVector<f64>,
    sigma_prime: &DMatrix<f64>,
    anchor: usize,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = mu_prime.len();
    if k < 2 {
        return Err(Error::invalid("need at least two models"));
    }
    if sigma_prime.nrows() != k || sigma_prime.ncols() != k {
        return Err(Error::invalid("log-likelihood covariance has the wrong shape"));
    }
    if anchor >= k {
        return Err(Error::invalid(format!("anchor {anchor} out of range for {k} models")));
    }
    check_symmetric(sigma_prime)?;
    let others: Vec<usize> = (0..k).filter(|&i| i != anchor).collect();
    let mut a = DMatrix::zeros(k - 1, k);
    for (row, &o) in others.iter().enumerate() {
        a[(row, anchor)] = 1.0;
        a[(row, o)] = -1.0;
    }
    let mu = &a * mu_prime;
    let mut sigma = &a * sigma_prime * a.transpose();
    // exact symmetry for downstream Cholesky
    for i in 0..k - 1 {
        for j in 0..i {
            let v = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    if Cholesky::new(sigma.clone()).is_none() {
        return Err(Error::SingularLaw(
            "contrast covariance is singular (perfectly correlated models)".into(),
        ));
    }
    Ok((mu, sigma))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub se: f64,
}

/// `P(X ≤ 0)` componentwise for `X ~ N(μ, Σ)`.
///
/// One dimension is exact; otherwise plain Monte Carlo with antithetic pairs.
pub fn mvn_cdf_at_zero(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if mu.is_empty() || sigma.nrows() != mu.len() || sigma.ncols() != mu.len() {
        return Err(Error::invalid("mean and covariance dimensions disagree"));
    }
    if n_samples < MIN_MVN_SAMPLES {
        return Err(Error::invalid(format!(
            "need at least {MIN_MVN_SAMPLES} samples, got {n_samples}"
        )));
    }
    check_symmetric(sigma)?;
    let chol = Cholesky::new(sigma.clone())
        .ok_or_else(|| Error::SingularLaw("covariance is not positive definite".into()))?;
    let mut rng = replicate_rng(seed, 0);
    Ok(orthant_probability(mu, &chol, n_samples, &mut rng))
}

fn orthant_probability<R: Rng + ?Sized>(
    mu: &DVector<f64>,
    chol: &Cholesky<f64, Dyn>,
    n_samples: usize,
    rng: &mut R,
) -> McEstimate {
    let d = mu.len();
    let l = chol.l();
    if d == 1 {
        return McEstimate {
            estimate: norm_cdf(-mu[0] / l[(0, 0)]),
            se: 0.0,
        };
    }
    let pairs = n_samples.div_ceil(2);
    let mut eps = DVector::zeros(d);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..pairs {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        let shift = &l * &eps;
        let plus = (0..d).all(|i| mu[i] + shift[i] <= 0.0);
        let minus = (0..d).all(|i| mu[i] - shift[i] <= 0.0);
        let v = 0.5 * (f64::from(u8::from(plus)) + f64::from(u8::from(minus)));
        sum += v;
        sum_sq += v * v;
    }
    let p = pairs as f64;
    let estimate = sum / p;
    let var = if pairs > 1 {
        ((sum_sq - p * estimate * estimate) / (p - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        estimate,
        se: (var / p).sqrt(),
    }
}

/// Parameter `Φ_{−μ∞, Σ∞}(0)` of the Bernoulli limit of the standard posterior
/// probability of the anchor model.
pub fn std_limit_bernoulli_k(law: &KModelLaw, n_samples: usize, seed: u64) -> Result<McEstimate> {
    mvn_cdf_at_zero(&(-&law.mu_inf), &law.sigma_inf, n_samples, seed)
}

/// Samples from the bagged limit `Φ_{0,Σ∞}(c^{1/2} W)`, `W ~ N(μ∞, Σ∞)`.
///
/// Each outer draw evaluates the orthant probability with `inner_samples`
/// Monte Carlo points (exact when the law is one-dimensional). With `c = 0`
/// every draw equals `Φ_{0,Σ∞}(0)`.
pub fn sample_ubb_k(
    law: &KModelLaw,
    n_samples: usize,
    inner_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if inner_samples < MIN_MVN_SAMPLES && law.dim() > 1 {
        return Err(Error::invalid(format!(
            "need at least {MIN_MVN_SAMPLES} inner samples, got {inner_samples}"
        )));
    }
    let d = law.dim();
    if law.c == 0.0 {
        let mut rng = replicate_rng(seed, 0);
        let zero = DVector::zeros(d);
        let v = orthant_probability(&zero, &law.chol, inner_samples, &mut rng).estimate;
        return Ok(vec![v; n_samples]);
    }
    let s = law.c.sqrt();
    let l = law.chol.l();
    let draw = |i: usize| -> f64 {
        let mut rng = replicate_rng(seed, i as u64 + 1);
        let eps = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = &law.mu_inf + &l * eps;
        // Φ_{0,Σ}(s w) = P(X − s w ≤ 0)
        orthant_probability(&(-s * w), &law.chol, inner_samples, &mut rng).estimate
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..n_samples).into_par_iter().map(draw).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok((0..n_samples).map(draw).collect())
    }
}

/// Which parameter the three-model scenario sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScenarioKind {
    /// `μ′ = (0, 0, μ₃)`, unit variances, correlation 0.5.
    VaryMean,
    /// `μ′ = 0`, model 3 has standard deviation `σ₃`.
    VaryVariance,
    /// `μ′ = 0`, identity covariance except `corr(1, 2) = ρ`.
    VaryCorrelation,
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vary_mean" | "mean" => Ok(Self::VaryMean),
            "vary_variance" | "variance" => Ok(Self::VaryVariance),
            "vary_correlation" | "correlation" => Ok(Self::VaryCorrelation),
            other => Err(Error::invalid(format!("unknown scenario kind '{other}'"))),
        }
    }
}

/// One grid point of a three-model scenario: log-likelihood mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub param: f64,
    pub mu_prime: DVector<f64>,
    pub sigma_prime: DMatrix<f64>,
}

/// Three-model log-likelihood moments along a parameter grid.
pub fn three_model_scenarios(kind: ScenarioKind, grid: &[f64]) -> Result<Vec<Scenario>> {
    // g(x, E) = x if E else 1
    let g = |x: f64, e: bool| if e { x } else { 1.0 };
    grid.iter()
        .map(|&t| {
            if !t.is_finite() {
                return Err(Error::invalid(format!("grid value {t} is not finite")));
            }
            let (mu, sigma) = match kind {
                ScenarioKind::VaryMean => (
                    DVector::from_vec(vec![0.0, 0.0, t]),
                    DMatrix::from_fn(3, 3, |i, j| g(0.5, i != j)),
                ),
                ScenarioKind::VaryVariance => {
                    if t <= 0.0 {
                        return Err(Error::invalid(format!("σ₃ must be positive, got {t}")));
                    }
                    (
                        DVector::zeros(3),
                        DMatrix::from_fn(3, 3, |i, j| g(0.5, i != j) * g(t, i == 2) * g(t, j == 2)),
                    )
                }
                ScenarioKind::VaryCorrelation => {
                    if t.abs() >= 1.0 {
                        return Err(Error::invalid(format!("|ρ| must be below 1, got {t}")));
                    }
                    (
                        DVector::zeros(3),
                        DMatrix::from_fn(3, 3, |i, j| {
                            let diag = if i == j { 1.0 } else { 0.0 };
                            let off = if (i, j) == (0, 1) || (i, j) == (1, 0) { t } else { 0.0 };
                            diag + off
                        }),
                    )
                }
            };
            Ok(Scenario {
                param: t,
                mu_prime: mu,
                sigma_prime: sigma,
            })
        })
        .collect()
}

/// `δ̂ = √N · mean(z) / sd(z)`.
pub fn estimate_effect_size(contrasts: &LogLikContrasts) -> Result<f64> {
    let z = contrasts.values();
    if z.len() < 2 {
        return Err(Error::DegenerateContrast(format!(
            "need at least 2 contrasts, got {}",
            z.len()
        )));
    }
    let n = z.len() as f64;
    let m = crate::stats::mean(z);
    let sd = crate::stats::sample_variance(z).sqrt();
    let scale = z.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if sd.is_nan() || sd <= 1e-12 * scale {
        return Err(Error::DegenerateContrast("contrasts have zero variance".into()));
    }
    Ok(n.sqrt() * m / sd)
}

/// Two single-point Bernoulli models `Bern(p1)` and `Bern(p2)` on a fixed
/// binary dataset.
#[derive(Debug, Clone)]
pub struct BernoulliProblem {
    pub x: Vec<bool>,
    pub p1: f64,
    pub p2: f64,
}

impl BernoulliProblem {
    pub fn new(x: Vec<bool>, p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::invalid(format!("Bernoulli parameter must be in (0, 1), got {p}")));
            }
        }
        Ok(Self { x, p1, p2 })
    }

    /// Per-observation log-likelihood ratio of model 1 over model 2.
    pub fn contrasts(&self) -> LogLikContrasts {
        let one = (self.p1 / self.p2).ln();
        let zero = ((1.0 - self.p1) / (1.0 - self.p2)).ln();
        LogLikContrasts {
            z: self.x.iter().map(|&b| if b { one } else { zero }).collect(),
        }
    }
}

impl WeightedEvidence for BernoulliProblem {
    fn n_obs(&self) -> usize {
        self.x.len()
    }

    fn n_models(&self) -> usize {
        2
    }

    fn log_evidence(&self, weights: &WeightVector) -> Result<Vec<f64>> {
        if weights.len() != self.x.len() {
            return Err(Error::invalid("weight vector length does not match the data"));
        }
        let (mut ones, mut zeros) = (0.0, 0.0);
        for (i, c) in weights.iter() {
            if self.x[i] {
                ones += c;
            } else {
                zeros += c;
            }
        }
        let ll = |p: f64| ones * p.ln() + zeros * (1.0 - p).ln();
        Ok(vec![ll(self.p1), ll(self.p2)])
    }
}

/// Draws `n` observations from `Bern(1/2)` and pairs them with the two models.
pub fn bernoulli_two_model_problem(p1: f64, p2: f64, n: usize, seed: u64) -> Result<BernoulliProblem> {
    let mut rng = replicate_rng(seed, u64::MAX);
    let x = (0..n).map(|_| rng.random_bool(0.5)).collect();
    BernoulliProblem::new(x, p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(d: f64, c: f64) -> TwoModelLaw {
        TwoModelLaw::new(d, c).unwrap()
    }

    #[test]
    fn standard_limit_values() {
        assert_eq!(std_limit_bernoulli_2(&law(0.0, 1.0)), 0.5);
        let p0 = std_prob_rejects(&law(2.0, 1.0));
        assert!((p0 - 0.022_750_131_948_179_2).abs() < 1e-15);
        assert!(p0 > 0.02);
        assert!(std_limit_bernoulli_2(&law(-40.0, 1.0)) < 1e-300);
    }

    #[test]
    fn cdf_examples() {
        for &u in &[0.05, 0.3, 0.5, 0.77] {
            assert!((ubb_cdf(u, &law(0.0, 1.0)).unwrap() - u).abs() < 1e-14);
        }
        for &c in &[0.1, 1.0, 7.0] {
            assert!((ubb_cdf(0.5, &law(0.0, c)).unwrap() - 0.5).abs() < 1e-15);
        }
        // Φ(Φ⁻¹(0.1) − 2), reference from scipy
        let v = ubb_cdf(0.1, &law(2.0, 1.0)).unwrap();
        assert!((v - 5.161_882_296_438_09e-4).abs() < 1e-15, "{v}");
        assert!(matches!(ubb_cdf(0.5, &law(0.0, 0.0)), Err(Error::DegenerateLaw(_))));
        assert_eq!(ubb_cdf(0.0, &law(1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(ubb_cdf(1.0, &law(1.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn density_examples() {
        for &u in &[0.01, 0.5, 0.99] {
            assert!((ubb_density(u, &law(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        }
        let f = ubb_density(0.5, &law(1.0, 1.0)).unwrap();
        assert!((f - (-0.5f64).exp()).abs() < 1e-15);
        assert!(ubb_density(0.0, &law(1.0, 1.0)).is_err());
        assert!(ubb_density(1.0, &law(1.0, 1.0)).is_err());
    }

    #[test]
    fn density_matches_cdf_derivative() {
        let h = 1e-5;
        for &(d, c) in &[(0.0, 1.0), (1.0, 0.5), (-2.0, 3.0)] {
            let l = law(d, c);
            for i in 1..=9 {
                let u = i as f64 / 10.0;
                let fd = (ubb_cdf(u + h, &l).unwrap() - ubb_cdf(u - h, &l).unwrap()) / (2.0 * h);
                let f = ubb_density(u, &l).unwrap();
                assert!((fd - f).abs() < 1e-6, "δ={d} c={c} u={u}: {fd} vs {f}");
            }
        }
    }

    #[test]
    fn contrast_reduction_examples() {
        let mu = DVector::from_vec(vec![0.7, -0.4]);
        let (m, s) = reduce_to_contrasts(&mu, &DMatrix::identity(2, 2), 0).unwrap();
        assert!((m[0] - 1.1).abs() < 1e-15);
        assert_eq!(s[(0, 0)], 2.0);

        let sig = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.5 });
        let (m, s) = reduce_to_contrasts(&DVector::zeros(3), &sig, 0).unwrap();
        assert_eq!(m, DVector::zeros(2));
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert!((s - expect).amax() < 1e-15);

        // perfectly correlated models cannot be separated
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert!(matches!(
            reduce_to_contrasts(&DVector::zeros(2), &ones, 0),
            Err(Error::SingularLaw(_))
        ));
    }

    #[test]
    fn two_model_anchors_are_complementary() {
        let mu = DVector::from_vec(vec![0.3, -0.2]);
        let sig = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let p: Vec<f64> = (0..2)
            .map(|a| {
                let law = KModelLaw::from_loglik_moments(&mu, &sig, a, 1.0).unwrap();
                std_limit_bernoulli_k(&law, 1000, 0).unwrap().estimate
            })
            .collect();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orthant_probabilities() {
        let one = mvn_cdf_at_zero(&DVector::zeros(1), &DMatrix::identity(1, 1), 1000, 1).unwrap();
        assert_eq!(one.estimate, 0.5);
        let ind = mvn_cdf_at_zero(&DVector::zeros(2), &DMatrix::identity(2, 2), 200_000, 2).unwrap();
        assert!((ind.estimate - 0.25).abs() < 3.0 * ind.se);
        for &rho in &[-0.6, 0.3, 0.8] {
            let s = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
            let est = mvn_cdf_at_zero(&DVector::zeros(2), &s, 200_000, 3).unwrap();
            let exact = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
            assert!((est.estimate - exact).abs() < 3.0 * est.se, "ρ={rho}");
        }
        assert!(mvn_cdf_at_zero(&DVector::zeros(2), &DMatrix::identity(2, 2), 10, 0).is_err());
    }

    #[test]
    fn bagged_k_law_with_c_zero_is_constant() {
        let sig = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let law = KModelLaw::new(DVector::from_vec(vec![0.4, -0.1]), sig, 0.0).unwrap();
        let xs = sample_ubb_k(&law, 50, 4000, 9).unwrap();
        assert!(xs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn scenario_grids() {
        let s = three_model_scenarios(ScenarioKind::VaryMean, &[0.0]).unwrap();
        assert_eq!(s[0].mu_prime, DVector::zeros(3));
        assert_eq!(s[0].sigma_prime, DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.5 }));
        let c = three_model_scenarios(ScenarioKind::VaryCorrelation, &[0.0]).unwrap();
        assert_eq!(c[0].sigma_prime, DMatrix::identity(3, 3));
        let v = three_model_scenarios(ScenarioKind::VaryVariance, &[1.0]).unwrap();
        assert_eq!(v[0].sigma_prime, s[0].sigma_prime);
        let v = three_model_scenarios(ScenarioKind::VaryVariance, &[2.0]).unwrap();
        assert_eq!(v[0].sigma_prime[(2, 2)], 4.0);
        assert_eq!(v[0].sigma_prime[(0, 2)], 1.0);
        assert!(three_model_scenarios(ScenarioKind::VaryCorrelation, &[1.0]).is_err());
        assert!(three_model_scenarios(ScenarioKind::VaryVariance, &[0.0]).is_err());
    }

    #[test]
    fn effect_size_examples() {
        let flat = LogLikContrasts::new(vec![0.3; 10]).unwrap();
        assert!(matches!(estimate_effect_size(&flat), Err(Error::DegenerateContrast(_))));
        let alt = LogLikContrasts::new((0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()).unwrap();
        assert_eq!(estimate_effect_size(&alt).unwrap(), 0.0);
    }

    #[test]
    fn identical_bernoulli_models_are_undecided() {
        let prob = bernoulli_two_model_problem(0.3, 0.3, 50, 4).unwrap();
        let post = crate::engine::standard_posterior_of(&prob, &[0.0, 0.0]).unwrap();
        assert_eq!(post.probs, vec![0.5, 0.5]);
    }
}
