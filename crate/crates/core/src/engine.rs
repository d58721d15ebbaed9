//! Standard and bagged posterior probabilities over a finite model set.
//!
//! A bootstrap dataset is represented by its multinomial count vector over
//! the original observations rather than by materialized rows. Backends only
//! see a [`WeightVector`] and return one log evidence per model, so any model
//! family whose likelihood factorizes over observations plugs in directly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{ln_gamma, log_sum_exp};

/// Number of bootstrap replicates used when the caller does not choose.
pub const DEFAULT_REPLICATES: usize = 100;

/// Upper bound on the number of count vectors the exact oracle will visit.
pub const EXACT_ENUMERATION_LIMIT: u128 = 100_000;

/// Normalized posterior over an enumerated model set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelPosterior {
    pub probs: Vec<f64>,
    /// Per-model `log p(x | m) + log Q0(m)`, unnormalized.
    pub log_evidence: Vec<f64>,
}

impl ModelPosterior {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Bootstrap dataset size `m`, replicate count `b` and master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BootstrapConfig {
    pub m: usize,
    pub b: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(m: usize, b: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("bootstrap dataset size M must be at least 1"));
        }
        if b == 0 {
            return Err(Error::invalid("replicate count B must be at least 1"));
        }
        Ok(Self { m, b, seed })
    }

    /// `M = N`, `B = 100`.
    pub fn defaults_for(n: usize, seed: u64) -> Result<Self> {
        Self::new(n, DEFAULT_REPLICATES, seed)
    }
}

/// Multinomial bootstrap counts, one entry per original observation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightVector {
    counts: Vec<u32>,
}

impl WeightVector {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    /// All-ones weights, i.e. the original dataset.
    pub fn unit(n: usize) -> Self {
        Self { counts: vec![1; n] }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of bootstrap draws, `M`.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, f64::from(c)))
    }
}

/// A weighted log-marginal-likelihood evaluator over a fixed model set.
///
/// Implementations must be callable from several threads at once when the
/// `parallel` feature is enabled.
pub trait WeightedEvidence: Sync {
    /// Number of observations `N` in the underlying dataset.
    fn n_obs(&self) -> usize;

    /// Number of models `K`.
    fn n_models(&self) -> usize;

    /// `log p(x_w | m)` for every model, where `x_w` replicates observation
    /// `n` exactly `weights[n]` times.
    fn log_evidence(&self, weights: &WeightVector) -> Result<Vec<f64>>;
}

/// Adapts a closure into a [`WeightedEvidence`].
pub struct FnEvidence<F> {
    n_obs: usize,
    n_models: usize,
    f: F,
}

impl<F> FnEvidence<F>
where
    F: Fn(&WeightVector) -> Result<Vec<f64>> + Sync,
{
    pub fn new(n_obs: usize, n_models: usize, f: F) -> Self {
        Self { n_obs, n_models, f }
    }
}

impl<F> WeightedEvidence for FnEvidence<F>
where
    F: Fn(&WeightVector) -> Result<Vec<f64>> + Sync,
{
    fn n_obs(&self) -> usize {
        self.n_obs
    }

    fn n_models(&self) -> usize {
        self.n_models
    }

    fn log_evidence(&self, weights: &WeightVector) -> Result<Vec<f64>> {
        (self.f)(weights)
    }
}

/// Deterministic RNG stream for replicate `index` under master `seed`.
///
/// Every replicate owns a distinct ChaCha stream, so results do not depend
/// on the order or thread in which replicates are evaluated.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `(c_1, ..., c_N) ~ Multinomial(M, 1/N)`.
pub fn bootstrap_counts<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::invalid("bootstrap over an empty dataset (N = 0)"));
    }
    if m == 0 {
        return Err(Error::invalid("bootstrap dataset size M must be at least 1"));
    }
    let mut counts = vec![0u32; n];
    for _ in 0..m {
        counts[rng.random_range(0..n)] += 1;
    }
    Ok(WeightVector { counts })
}

/// Posterior model probabilities from log marginal likelihoods and log priors.
pub fn standard_model_posterior(log_ml: &[f64], log_prior: &[f64]) -> Result<ModelPosterior> {
    if log_ml.len() != log_prior.len() {
        return Err(Error::invalid(format!(
            "log marginal likelihood has {} entries but log prior has {}",
            log_ml.len(),
            log_prior.len()
        )));
    }
    if log_ml.is_empty() {
        return Err(Error::invalid("model set is empty"));
    }
    if let Some(bad) = log_ml
        .iter()
        .chain(log_prior)
        .find(|x| x.is_nan() || **x == f64::INFINITY)
    {
        return Err(Error::NumericDomain(format!("non-finite log evidence term {bad}")));
    }
    let log_evidence: Vec<f64> = log_ml.iter().zip(log_prior).map(|(a, b)| a + b).collect();
    let lse = log_sum_exp(&log_evidence);
    if lse == f64::NEG_INFINITY {
        return Err(Error::DegenerateInput(
            "every model has zero posterior weight".into(),
        ));
    }
    let probs = crate::special::softmax(&log_evidence);
    Ok(ModelPosterior { probs, log_evidence })
}

/// Bagged posterior: per-replicate posteriors, their mean and Monte Carlo error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaggedPosterior {
    /// Row `b` holds the posterior under bootstrap dataset `b`.
    pub replicate_probs: Vec<Vec<f64>>,
    pub mean_probs: Vec<f64>,
    /// Sample standard deviation of each column over `sqrt(B)`; zero when `B = 1`.
    pub std_errors: Vec<f64>,
    /// False when `B = 1` and `std_errors` carries no information.
    pub se_available: bool,
}

impl BaggedPosterior {
    /// Aggregates replicate rows. Rows must share one length.
    pub fn from_replicates(replicate_probs: Vec<Vec<f64>>) -> Result<Self> {
        let b = replicate_probs.len();
        if b == 0 {
            return Err(Error::InsufficientReplicates { needed: 1, got: 0 });
        }
        let k = replicate_probs[0].len();
        if replicate_probs.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("replicate rows differ in length"));
        }
        let (mean_probs, sd) = column_mean_sd(&replicate_probs, k);
        let se_available = b >= 2;
        let std_errors = if se_available {
            sd.iter().map(|s| s / (b as f64).sqrt()).collect()
        } else {
            vec![0.0; k]
        };
        Ok(Self {
            replicate_probs,
            mean_probs,
            std_errors,
            se_available,
        })
    }

    pub fn n_replicates(&self) -> usize {
        self.replicate_probs.len()
    }
}

// Welford updates keep the spread exactly zero for identical rows.
fn column_mean_sd(rows: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mean = vec![0.0; k];
    let mut m2 = vec![0.0; k];
    for (i, row) in rows.iter().enumerate() {
        let n = (i + 1) as f64;
        for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(row) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }
    let sd = if rows.len() >= 2 {
        let denom = (rows.len() - 1) as f64;
        m2.iter().map(|s| (s / denom).sqrt()).collect()
    } else {
        vec![0.0; k]
    };
    (mean, sd)
}

/// Runs `f` on every bootstrap replicate of an `n`-observation dataset.
///
/// Output order follows replicate index. Errors carry the failing index.
pub fn map_replicates<T, F>(n: usize, config: &BootstrapConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &WeightVector) -> Result<T> + Sync,
{
    let run = |b: usize| -> Result<T> {
        let mut rng = replicate_rng(config.seed, b as u64);
        let w = bootstrap_counts(n, config.m, &mut rng)?;
        f(b, &w).map_err(|e| Error::Replicate {
            index: b,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.b).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.b).map(run).collect()
    }
}

/// Monte Carlo approximation of the bagged posterior with `config.b` replicates.
pub fn bagged_model_posterior<E: WeightedEvidence + ?Sized>(
    evaluator: &E,
    log_prior: &[f64],
    config: &BootstrapConfig,
) -> Result<BaggedPosterior> {
    check_prior_len(evaluator, log_prior)?;
    let rows = map_replicates(evaluator.n_obs(), config, |_, w| {
        let log_ml = evaluator.log_evidence(w)?;
        Ok(standard_model_posterior(&log_ml, log_prior)?.probs)
    })?;
    BaggedPosterior::from_replicates(rows)
}

/// Standard posterior on the original (unit-weighted) data.
pub fn standard_posterior_of<E: WeightedEvidence + ?Sized>(
    evaluator: &E,
    log_prior: &[f64],
) -> Result<ModelPosterior> {
    check_prior_len(evaluator, log_prior)?;
    let log_ml = evaluator.log_evidence(&WeightVector::unit(evaluator.n_obs()))?;
    standard_model_posterior(&log_ml, log_prior)
}

fn check_prior_len<E: WeightedEvidence + ?Sized>(evaluator: &E, log_prior: &[f64]) -> Result<()> {
    if evaluator.n_models() != log_prior.len() {
        return Err(Error::invalid(format!(
            "evaluator has {} models but prior has {} entries",
            evaluator.n_models(),
            log_prior.len()
        )));
    }
    Ok(())
}

/// Number of count vectors of length `n` summing to `m`, i.e. `C(m+n-1, n-1)`,
/// or `None` on overflow.
pub fn composition_count(n: usize, m: usize) -> Option<u128> {
    let k = (n as u128).checked_sub(1)?;
    let total = m as u128 + k;
    let k = k.min(total - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(total - i)? / (i + 1);
    }
    Some(acc)
}

/// Exact bagged posterior: the expectation of the posterior over every
/// multinomial count vector, weighted by its probability.
pub fn exact_bagged_posterior<E: WeightedEvidence + ?Sized>(
    evaluator: &E,
    m: usize,
    log_prior: &[f64],
) -> Result<Vec<f64>> {
    check_prior_len(evaluator, log_prior)?;
    let n = evaluator.n_obs();
    if n == 0 || m == 0 {
        return Err(Error::invalid("exact bagging needs N >= 1 and M >= 1"));
    }
    let count = composition_count(n, m);
    match count {
        Some(c) if c <= EXACT_ENUMERATION_LIMIT => {}
        other => {
            return Err(Error::ResourceLimit {
                what: format!("enumerating bootstrap count vectors for N={n}, M={m}"),
                required: other.unwrap_or(u128::MAX),
                limit: EXACT_ENUMERATION_LIMIT,
            })
        }
    }

    let log_m_fact = ln_gamma(m as f64 + 1.0);
    let log_n = (n as f64).ln();
    let mut acc = vec![0.0; evaluator.n_models()];
    let mut counts = vec![0u32; n];
    counts[0] = m as u32;
    loop {
        let log_pmf = log_m_fact
            - counts.iter().map(|&c| ln_gamma(f64::from(c) + 1.0)).sum::<f64>()
            - m as f64 * log_n;
        let w = WeightVector::from_counts(counts.clone());
        let log_ml = evaluator.log_evidence(&w)?;
        let post = standard_model_posterior(&log_ml, log_prior)?;
        let pmf = log_pmf.exp();
        for (a, p) in acc.iter_mut().zip(&post.probs) {
            *a += pmf * p;
        }
        if !next_composition(&mut counts) {
            break;
        }
    }
    Ok(acc)
}

/// Advances to the next weak composition of `sum(c)` into `c.len()` parts,
/// starting from `[m, 0, ..., 0]`. Returns false after `[0, ..., 0, m]`.
fn next_composition(c: &mut [u32]) -> bool {
    let n = c.len();
    let Some(j) = (0..n.saturating_sub(1)).rev().find(|&i| c[i] > 0) else {
        return false;
    };
    let tail = c[n - 1];
    c[n - 1] = 0;
    c[j] -= 1;
    c[j + 1] = tail + 1;
    true
}

/// Per-model Monte Carlo standard error of `mean_probs`.
pub fn mc_standard_error(bagged: &BaggedPosterior) -> Result<Vec<f64>> {
    let b = bagged.n_replicates();
    if b < 2 {
        return Err(Error::InsufficientReplicates { needed: 2, got: b });
    }
    let k = bagged.mean_probs.len();
    let (_, sd) = column_mean_sd(&bagged.replicate_probs, k);
    Ok(sd.iter().map(|s| s / (b as f64).sqrt()).collect())
}
