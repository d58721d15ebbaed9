use bayesbag_core::engine::{standard_model_posterior, WeightVector};
use bayesbag_core::linreg::{
    enumerate_models, log_marginal_likelihood, log_prior_gamma, pips, posterior_param_moments, InclusionVector,
    LinRegEvidence, NigHyperparams, RegressionDataset,
};
use bayesbag_core::special::ln_gamma;
use bayesbag_core::WeightedEvidence;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

mod common;

const LN_2PI: f64 = 1.8378770664093453;

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> RegressionDataset {
    let z: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 0.8 * z[i * d] + rng.sample::<f64, _>(StandardNormal))
        .collect();
    RegressionDataset::new(n, d, z, y).unwrap()
}

/// `log ∫∫ Π_n N(y_n | z_n β, σ²)^{w_n} N(β | 0, σ²/λ) InvGamma(σ² | a0, b0) dβ dσ²`
/// by nested adaptive Gauss–Kronrod quadrature over `(β, t = log σ²)`.
fn quadrature_log_ml(z: &[f64], y: &[f64], w: &[f64], h: &NigHyperparams) -> f64 {
    let m: f64 = w.iter().sum();
    let szz: f64 = z.iter().zip(w).map(|(a, c)| c * a * a).sum();
    let szy: f64 = z.iter().zip(y).zip(w).map(|((a, b), c)| c * a * b).sum();
    let log_joint = |beta: f64, t: f64| -> f64 {
        let s2 = t.exp();
        let rss: f64 = z
            .iter()
            .zip(y)
            .zip(w)
            .map(|((a, b), c)| c * (b - a * beta).powi(2))
            .sum();
        let lik = -0.5 * m * (LN_2PI + t) - rss / (2.0 * s2);
        let beta_prior = -0.5 * (LN_2PI + t - h.lambda.ln()) - h.lambda * beta * beta / (2.0 * s2);
        let s2_prior = h.a0 * h.b0.ln() - ln_gamma(h.a0) - (h.a0 + 1.0) * t - h.b0 / s2;
        lik + beta_prior + s2_prior + t
    };
    // β centre and spread only set integration windows
    let centre = szy / (szz + h.lambda);
    let beta_sd = |t: f64| (t.exp() / (szz + h.lambda)).sqrt();
    let (mut t_peak, mut peak) = (0.0, f64::NEG_INFINITY);
    for i in 0..=4000 {
        let t = -20.0 + i as f64 * 0.01;
        let v = log_joint(centre, t);
        if v > peak {
            peak = v;
            t_peak = t;
        }
    }
    let inner = |t: f64| {
        let sd = beta_sd(t);
        common::integrate(&|b| (log_joint(b, t) - peak).exp(), centre - 14.0 * sd, centre + 14.0 * sd, 1e-15, 1e-11)
    };
    let outer = common::integrate(&inner, t_peak - 30.0, t_peak + 30.0, 1e-14, 1e-10);
    peak + outer.ln()
}

#[test]
fn log_ml_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..10 {
        let n = 5;
        let data = random_dataset(&mut rng, n, 1);
        let counts: Vec<u32> = if case < 5 {
            vec![1; n]
        } else {
            (0..n).map(|_| rng.random_range(0..4)).collect()
        };
        let h = NigHyperparams::new(
            rng.random_range(1.5..4.0),
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..20.0),
            0.5,
            1,
        )
        .unwrap();
        let w = WeightVector::from_counts(counts.clone());
        let g = InclusionVector::full(1);
        let closed = log_marginal_likelihood(&data, &w, &g, &h).unwrap();
        let wf: Vec<f64> = counts.iter().map(|&c| f64::from(c)).collect();
        let quad = quadrature_log_ml(data.z(), data.y(), &wf, &h);
        let rel = (closed - quad).exp() - 1.0;
        assert!(rel.abs() < 1e-6, "case {case}: closed {closed}, quadrature {quad}");
    }
}

#[test]
fn weighting_equals_replication_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let n = rng.random_range(2..12);
        let d = rng.random_range(1..5);
        let data = random_dataset(&mut rng, n, d);
        let counts: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let rows: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
            .collect();
        let rep = data.select_rows(&rows).unwrap();
        let included: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.6)).collect();
        let g = InclusionVector::from_indices(d, &included).unwrap();
        let h = NigHyperparams::new(2.0, 1.0, 16.0, 0.3, d).unwrap();
        let a = log_marginal_likelihood(&data, &WeightVector::from_counts(counts), &g, &h).unwrap();
        let b = log_marginal_likelihood(&rep, &WeightVector::unit(rows.len()), &g, &h).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn enumeration_counts() {
    assert_eq!(enumerate_models(10, 2).unwrap().len(), 56);
    assert_eq!(enumerate_models(3, 3).unwrap().len(), 8);
    assert_eq!(enumerate_models(20, 3).unwrap().len(), 1351);
    let err = enumerate_models(60, 30).unwrap_err();
    assert!(matches!(err, bayesbag_core::Error::ResourceLimit { .. }));
}

#[test]
fn prior_examples() {
    let h = NigHyperparams::new(2.0, 1.0, 16.0, 0.1, 2).unwrap();
    let g = InclusionVector::new(vec![true, false]);
    assert!((log_prior_gamma(&g, &h) - (0.1f64.ln() + 0.9f64.ln())).abs() < 1e-15);
    let h = NigHyperparams::new(2.0, 1.0, 16.0, 0.25, 2).unwrap();
    let both = log_prior_gamma(&InclusionVector::new(vec![true, true]), &h);
    let none = log_prior_gamma(&InclusionVector::new(vec![false, false]), &h);
    assert!(((both - none).exp() - 1.0 / 9.0).abs() < 1e-14);
    let h = NigHyperparams::new(2.0, 1.0, 16.0, 0.5, 3).unwrap();
    let vals: Vec<f64> = enumerate_models(3, 3).unwrap().iter().map(|g| log_prior_gamma(g, &h)).collect();
    assert!(vals.iter().all(|v| *v == vals[0]));
}

#[test]
fn pip_examples() {
    let models = enumerate_models(2, 2).unwrap();
    assert_eq!(pips(&[0.25; 4], &models).unwrap(), vec![0.5, 0.5]);
    let models = enumerate_models(3, 1).unwrap();
    assert_eq!(pips(&[0.1, 0.2, 0.3, 0.4], &models).unwrap(), vec![0.2, 0.3, 0.4]);
    assert_eq!(pips(&[0.0, 1.0, 0.0, 0.0], &models).unwrap(), vec![1.0, 0.0, 0.0]);
    assert!(pips(&[1.0], &models).is_err());
}

#[test]
fn moment_special_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_dataset(&mut rng, 4, 2);
    let g = InclusionVector::full(2);
    // a_N = 2 with two observations and a0 = 1
    let h = NigHyperparams::new(1.0, 1.0, 3.0, 0.5, 2).unwrap();
    let w = WeightVector::from_counts(vec![1, 1, 0, 0]);
    let m = posterior_param_moments(&data, &w, &g, &h).unwrap();
    assert!((m.var_log_sigma2 - (std::f64::consts::PI.powi(2) / 6.0 - 1.0)).abs() < 1e-12);

    let h = NigHyperparams::new(3.0, 2.0, 1e6, 0.5, 2).unwrap();
    let m = posterior_param_moments(&data, &WeightVector::from_counts(vec![0; 4]), &g, &h).unwrap();
    let expected = 2.0 / (2.0 * 1e6);
    for v in &m.var_beta {
        assert!((v / expected - 1.0).abs() < 1e-9);
    }

    let h = NigHyperparams::new(0.5, 1.0, 1.0, 0.5, 2).unwrap();
    let err = posterior_param_moments(&data, &WeightVector::from_counts(vec![1, 0, 0, 0]), &g, &h).unwrap_err();
    assert!(matches!(err, bayesbag_core::Error::VarianceUndefined { .. }));
}

#[test]
fn moments_match_posterior_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let data = random_dataset(&mut rng, 20, 2);
    let h = NigHyperparams::new(2.0, 1.0, 4.0, 0.5, 2).unwrap();
    let g = InclusionVector::full(2);
    let m = posterior_param_moments(&data, &WeightVector::unit(20), &g, &h).unwrap();

    // conjugate posterior parameters assembled by hand
    let (mut a11, mut a12, mut a22, mut r1, mut r2, mut yy) = (h.lambda, 0.0, h.lambda, 0.0, 0.0, 0.0);
    for i in 0..20 {
        let z = data.row(i);
        let y = data.y()[i];
        a11 += z[0] * z[0];
        a12 += z[0] * z[1];
        a22 += z[1] * z[1];
        r1 += z[0] * y;
        r2 += z[1] * y;
        yy += y * y;
    }
    let det = a11 * a22 - a12 * a12;
    let (i11, i12, i22) = (a22 / det, -a12 / det, a11 / det);
    let mu = [i11 * r1 + i12 * r2, i12 * r1 + i22 * r2];
    let a_n = h.a0 + 10.0;
    let b_n = h.b0 + 0.5 * (yy - (mu[0] * r1 + mu[1] * r2));
    let chol = [i11.sqrt(), i12 / i11.sqrt()];
    let chol22 = (i22 - chol[1] * chol[1]).sqrt();

    let gamma = Gamma::new(a_n, 1.0 / b_n).unwrap();
    let draws = 1_000_000;
    let mut samples = vec![[0.0; 3]; draws];
    for s in samples.iter_mut() {
        let s2 = 1.0 / gamma.sample(&mut rng);
        let (e1, e2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let sd = s2.sqrt();
        *s = [
            s2.ln(),
            mu[0] + sd * chol[0] * e1,
            mu[1] + sd * (chol[1] * e1 + chol22 * e2),
        ];
    }
    let analytic = m.coordinates();
    for (j, &(mean, var)) in analytic.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        let sm = bayesbag_core::stats::mean(&xs);
        let sv = bayesbag_core::stats::sample_variance(&xs);
        let fourth = xs.iter().map(|x| (x - sm).powi(4)).sum::<f64>() / draws as f64;
        let mean_se = (sv / draws as f64).sqrt();
        let var_se = ((fourth - sv * sv) / draws as f64).sqrt();
        assert!((sm - mean).abs() < 3.0 * mean_se, "coord {j}: mean {sm} vs {mean}");
        assert!((sv - var).abs() < 3.0 * var_se, "coord {j}: var {sv} vs {var}");
    }
}

fn pips_for(data: &RegressionDataset, h: NigHyperparams) -> Vec<f64> {
    let ev = LinRegEvidence::new(data, h).unwrap();
    let lml = ev.log_evidence(&WeightVector::unit(data.n())).unwrap();
    let post = standard_model_posterior(&lml, &ev.log_prior()).unwrap();
    pips(&post.probs, ev.models()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pips_monotone_in_prior_inclusion(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 15, d);
        let mut last = vec![0.0; d];
        for q0 in [0.05, 0.2, 0.4, 0.6, 0.8, 0.95] {
            let p = pips_for(&data, NigHyperparams::new(2.0, 1.0, 16.0, q0, d).unwrap());
            for j in 0..d {
                prop_assert!(p[j] >= last[j] - 1e-12, "q0 {q0}, component {j}: {} < {}", p[j], last[j]);
            }
            last = p;
        }
    }

    #[test]
    fn column_permutation_permutes_pips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 12, 4);
        let perm = [2usize, 0, 3, 1];
        let permuted = data.select_columns(&perm).unwrap();
        let h = NigHyperparams::new(2.0, 1.0, 16.0, 0.3, 4).unwrap();
        let a = pips_for(&data, h);
        let b = pips_for(&permuted, h);
        for (j, &src) in perm.iter().enumerate() {
            prop_assert!((b[j] - a[src]).abs() < 1e-10);
        }
    }

    #[test]
    fn standard_posterior_is_normalized(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 10, d);
        let ev = LinRegEvidence::new(&data, NigHyperparams::new(2.0, 1.0, 16.0, 0.3, d).unwrap()).unwrap();
        let lml = ev.log_evidence(&WeightVector::unit(10)).unwrap();
        let post = standard_model_posterior(&lml, &ev.log_prior()).unwrap();
        prop_assert!((post.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let p = pips(&post.probs, ev.models()).unwrap();
        prop_assert!(p.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    }
}

