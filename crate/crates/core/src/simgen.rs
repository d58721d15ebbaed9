//! Synthetic regression data with correlated, mixed-tail regressors.
//!
//! Regressors are drawn from a Gaussian scale mixture: a shared
//! `ξ ~ χ²(h)` rescales the odd-numbered coordinates (1-based) by
//! `1/√(ξ/(h−2))`, making them rescaled Student-t with unit variance, while
//! the even-numbered coordinates stay standard normal. All coordinates share
//! the squared-exponential correlation `exp(−(d−d')²/64)` before rescaling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::engine::replicate_rng;
use crate::error::{Error, Result};
use crate::linreg::RegressionDataset;

/// Default χ² degrees of freedom for the regressor scale mixture.
pub const DEFAULT_DOF: f64 = 10.0;

/// Minimum draws for the KL-optimal parameter oracle.
pub const MIN_KL_DRAWS: usize = 10_000;

const KL_BATCHES: usize = 20;
const CORRELATION_LENGTH_SQ: f64 = 64.0;

/// Regression function applied to the regressors before `β†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResponseKind {
    /// `f(z) = z` (well specified).
    Linear,
    /// `f(z) = (z_1³, …, z_D³)` (misspecified).
    Nonlinear,
}

impl std::str::FromStr for ResponseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "nonlinear" | "cubic" => Ok(Self::Nonlinear),
            other => Err(Error::invalid(format!("unknown response kind '{other}'"))),
        }
    }
}

impl ResponseKind {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Linear => z,
            Self::Nonlinear => z * z * z,
        }
    }
}

/// Distribution of the regressor vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegressorDesign {
    /// Correlated scale mixture described in the module docs.
    Correlated,
    /// Independent standard normal coordinates.
    IndependentGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub d: usize,
    /// Number of causal regressors.
    pub k: usize,
    pub n: usize,
    pub response: ResponseKind,
    /// χ² degrees of freedom, must exceed 2.
    pub h: f64,
    pub seed: u64,
    pub design: RegressorDesign,
}

impl SimConfig {
    pub fn new(d: usize, k: usize, n: usize, response: ResponseKind, seed: u64) -> Result<Self> {
        let cfg = Self {
            d,
            k,
            n,
            response,
            h: DEFAULT_DOF,
            seed,
            design: RegressorDesign::Correlated,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("simulation needs D >= 1 and N >= 1"));
        }
        if self.k == 0 || self.k > self.d {
            return Err(Error::invalid(format!("need 1 <= k <= D, got k={}, D={}", self.k, self.d)));
        }
        if self.h.is_nan() || self.h <= 2.0 {
            return Err(Error::invalid(format!("degrees of freedom h must exceed 2, got {}", self.h)));
        }
        Ok(())
    }
}

/// Sparse coefficient vector: ones at the 1-based positions
/// `⌊j (D + ½) / (k + 1)⌋`, `j = 1..k`.
pub fn make_beta_dagger(d: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut beta = vec![0.0; d];
    for j in 1..=k {
        let pos = ((j as f64) * (d as f64 + 0.5) / (k as f64 + 1.0)).floor() as usize;
        if pos == 0 || pos > d {
            return Err(Error::invalid(format!(
                "causal component {pos} (j={j}) is outside 1..={d}"
            )));
        }
        if beta[pos - 1] != 0.0 {
            return Err(Error::invalid(format!("causal components collide at {pos}")));
        }
        beta[pos - 1] = 1.0;
    }
    Ok(beta)
}

/// Reusable sampler for regressor rows.
#[derive(Debug, Clone)]
pub struct RegressorSampler {
    d: usize,
    h: f64,
    design: RegressorDesign,
    factor: DMatrix<f64>,
    chi2: ChiSquared<f64>,
}

impl RegressorSampler {
    pub fn new(d: usize, h: f64, design: RegressorDesign) -> Result<Self> {
        if h.is_nan() || h <= 2.0 {
            return Err(Error::invalid(format!("degrees of freedom h must exceed 2, got {h}")));
        }
        let chi2 = ChiSquared::new(h).map_err(|e| Error::invalid(e.to_string()))?;
        let factor = match design {
            RegressorDesign::Correlated => {
                let k = DMatrix::from_fn(d, d, |i, j| {
                    let diff = i as f64 - j as f64;
                    (-diff * diff / CORRELATION_LENGTH_SQ).exp()
                });
                // the kernel is numerically rank-deficient for large D, so use
                // an eigen square root with clipped eigenvalues
                let eig = SymmetricEigen::new(k);
                let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
                &eig.eigenvectors * DMatrix::from_diagonal(&roots)
            }
            RegressorDesign::IndependentGaussian => DMatrix::identity(d, d),
        };
        Ok(Self {
            d,
            h,
            design,
            factor,
            chi2,
        })
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.d, cfg.h, cfg.design)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Writes one row into `out`, using `eps` as scratch.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, eps: &mut DVector<f64>, out: &mut [f64]) {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        match self.design {
            RegressorDesign::IndependentGaussian => out.copy_from_slice(eps.as_slice()),
            RegressorDesign::Correlated => {
                let xi: f64 = self.chi2.sample(rng);
                let inv_scale = ((self.h - 2.0) / xi).sqrt();
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..self.d {
                        acc += self.factor[(i, j)] * eps[j];
                    }
                    // 0-based even index = 1-based odd component
                    *o = if i % 2 == 0 { acc * inv_scale } else { acc };
                }
            }
        }
    }
}

/// `N × D` regressors, row-major.
pub fn sample_regressors<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = RegressorSampler::from_config(config)?;
    let mut z = vec![0.0; config.n * config.d];
    let mut eps = DVector::zeros(config.d);
    for row in z.chunks_mut(config.d) {
        sampler.sample_into(rng, &mut eps, row);
    }
    Ok(z)
}

/// `Y = f(Z)ᵀ β† + ε`, `ε ~ N(0, 1)`, seeded by `config.seed`.
pub fn sample_dataset(config: &SimConfig) -> Result<RegressionDataset> {
    let beta = make_beta_dagger(config.d, config.k)?;
    let mut rng = replicate_rng(config.seed, 0);
    let z = sample_regressors(config, &mut rng)?;
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let y = z
        .chunks(config.d)
        .map(|row| {
            let signal: f64 = row
                .iter()
                .zip(&beta)
                .map(|(&zi, &b)| config.response.apply(zi) * b)
                .sum();
            signal + noise.sample(&mut rng)
        })
        .collect();
    RegressionDataset::new(config.n, config.d, z, y)
}

/// KL-optimal linear-model parameters for the simulated data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlOptimal {
    pub beta_circ: Vec<f64>,
    /// Positive part of [`sigma2_unclamped`](Self::sigma2_unclamped).
    pub sigma2_circ: f64,
    pub sigma2_unclamped: f64,
    /// Batch-means standard error of each `beta_circ` coordinate.
    pub beta_se: Vec<f64>,
    pub sigma2_se: f64,
    /// Largest of the reported standard errors.
    pub moment_se: f64,
}

#[derive(Clone)]
struct MomentSums {
    zz: DMatrix<f64>,
    zg: DVector<f64>,
    gg: f64,
    n: f64,
}

impl MomentSums {
    fn new(d: usize) -> Self {
        Self {
            zz: DMatrix::zeros(d, d),
            zg: DVector::zeros(d),
            gg: 0.0,
            n: 0.0,
        }
    }

    fn add(&mut self, other: &Self) {
        self.zz += &other.zz;
        self.zg += &other.zg;
        self.gg += other.gg;
        self.n += other.n;
    }

    /// `β∘ = Σ_ZZ⁻¹ Σ_Zf β†` and the unclamped `σ²∘`.
    fn solve(&self) -> Result<(DVector<f64>, f64)> {
        let zz = &self.zz / self.n;
        let zg = &self.zg / self.n;
        let gg = self.gg / self.n;
        let chol = zz
            .cholesky()
            .ok_or_else(|| Error::SingularMoment("estimated E(ZZᵀ) is not positive definite".into()))?;
        let beta = chol.solve(&zg);
        let sigma2 = 1.0 + gg - zg.dot(&beta);
        Ok((beta, sigma2))
    }
}

/// Monte Carlo estimate of `β∘ = E(ZZᵀ)⁻¹ E(Z f(Z)ᵀ) β†` and
/// `σ²∘ = (1 + β†ᵀ Σ_ff β† − β†ᵀ Σ_Zfᵀ Σ_ZZ⁻¹ Σ_Zf β†)₊`.
pub fn kl_optimal_params(config: &SimConfig, n_mc: usize, seed: u64) -> Result<KlOptimal> {
    if n_mc < MIN_KL_DRAWS {
        return Err(Error::invalid(format!("need at least {MIN_KL_DRAWS} draws, got {n_mc}")));
    }
    let sampler = RegressorSampler::from_config(config)?;
    let beta_dagger = make_beta_dagger(config.d, config.k)?;
    let d = config.d;
    let per_batch = n_mc / KL_BATCHES;
    let batch = |bi: usize| -> MomentSums {
        let mut rng = replicate_rng(seed, bi as u64);
        let mut sums = MomentSums::new(d);
        let mut eps = DVector::zeros(d);
        let mut z = vec![0.0; d];
        let count = if bi + 1 == KL_BATCHES {
            n_mc - per_batch * (KL_BATCHES - 1)
        } else {
            per_batch
        };
        for _ in 0..count {
            sampler.sample_into(&mut rng, &mut eps, &mut z);
            let g: f64 = z
                .iter()
                .zip(&beta_dagger)
                .map(|(&zi, &b)| config.response.apply(zi) * b)
                .sum();
            for i in 0..d {
                for j in i..d {
                    sums.zz[(i, j)] += z[i] * z[j];
                }
                sums.zg[i] += z[i] * g;
            }
            sums.gg += g * g;
        }
        sums.n = count as f64;
        sums.zz.fill_lower_triangle_with_upper_triangle();
        sums
    };
    #[cfg(feature = "parallel")]
    let batches: Vec<MomentSums> = {
        use rayon::prelude::*;
        (0..KL_BATCHES).into_par_iter().map(batch).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let batches: Vec<MomentSums> = (0..KL_BATCHES).map(batch).collect();

    let mut pooled = MomentSums::new(d);
    for b in &batches {
        pooled.add(b);
    }
    let (beta, sigma2) = pooled.solve()?;
    let per: Vec<(DVector<f64>, f64)> = batches.iter().map(MomentSums::solve).collect::<Result<_>>()?;

    let nb = KL_BATCHES as f64;
    let se_of = |vals: Vec<f64>| -> f64 { (crate::stats::sample_variance(&vals) / nb).sqrt() };
    let beta_se: Vec<f64> = (0..d).map(|i| se_of(per.iter().map(|(b, _)| b[i]).collect())).collect();
    let sigma2_se = se_of(per.iter().map(|(_, s)| *s).collect());
    let moment_se = beta_se.iter().copied().fold(sigma2_se, f64::max);
    Ok(KlOptimal {
        beta_circ: beta.iter().copied().collect(),
        sigma2_circ: sigma2.max(0.0),
        sigma2_unclamped: sigma2,
        beta_se,
        sigma2_se,
        moment_se,
    })
}
