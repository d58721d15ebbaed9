//! Scalar special functions and log-space helpers.
//!
//! `lnΓ` and digamma come from `statrs`, `erfc` from `libm`; the normal
//! wrappers and trigamma live here.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub use statrs::function::gamma::{digamma, ln_gamma};
use libm::erfc;
use statrs::function::erf::erfc_inv;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal CDF, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile function.
///
/// Evaluated on the lower tail only (`p <= 0.5`) and reflected, so that
/// `1 - p` is exact for the upper half.
pub fn norm_ppf(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -norm_ppf(1.0 - p);
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step against the CDF tightens the last few ulps
    let e = norm_cdf(x) - p;
    let u = e / norm_pdf(x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Trigamma function ψ₁(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    if x <= 0.0 || x.is_nan() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 16.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    // asymptotic series in Bernoulli numbers
    let tail = r
        + 0.5 * r2
        + r * r2
            * (1.0 / 6.0
                + r2 * (-1.0 / 30.0
                    + r2 * (1.0 / 42.0 + r2 * (-1.0 / 30.0 + r2 * (5.0 / 66.0)))));
    acc + tail
}

/// `log(sum(exp(xs)))`; returns `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Numerically stable softmax. The caller guarantees at least one finite entry.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![f64::NAN; xs.len()];
    }
    let e: Vec<f64> = xs.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

pub(crate) fn ln_2pi() -> f64 {
    (2.0 * PI).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        // values from scipy.stats.norm
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(2.0) - 0.977_249_868_051_820_8).abs() < 1e-14);
        assert!((norm_cdf(-2.0) - 0.022_750_131_948_179_21).abs() < 1e-15);
        assert!((norm_cdf(-8.0) - 6.220_960_574_271_74e-16).abs() < 1e-28);
    }

    #[test]
    fn ppf_inverts_cdf() {
        for &p in &[1e-300, 1e-12, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999, 1.0 - 1e-12] {
            let x = norm_ppf(p);
            let back = norm_cdf(x);
            assert!((back - p).abs() <= 1e-12 * p.max(1e-3), "p={p} x={x} back={back}");
        }
        assert!((norm_ppf(0.1) + 1.281_551_565_544_600_4).abs() < 1e-12);
        assert_eq!(norm_ppf(0.0), f64::NEG_INFINITY);
        assert!(norm_ppf(1.5).is_nan());
    }

    #[test]
    fn trigamma_identities() {
        let pi2_6 = PI * PI / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-13);
        assert!((trigamma(2.0) - (pi2_6 - 1.0)).abs() < 1e-13);
        assert!((trigamma(0.5) - PI * PI / 2.0).abs() < 1e-12);
        // recurrence ψ₁(x) = ψ₁(x+1) + 1/x²
        for &x in &[0.3, 1.7, 12.5, 250.0] {
            assert!((trigamma(x) - trigamma(x + 1.0) - 1.0 / (x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn log_sum_exp_is_overflow_safe() {
        let v = log_sum_exp(&[1e6, 1e6]);
        assert!((v - (1e6 + 2f64.ln())).abs() < 1e-9);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let p = softmax(&[-1.0, -2.0, -3.0]);
        let z: f64 = [-1f64, -2.0, -3.0].iter().map(|x| x.exp()).sum();
        for (i, x) in [-1f64, -2.0, -3.0].iter().enumerate() {
            assert!((p[i] - x.exp() / z).abs() < 1e-15);
        }
    }
}
