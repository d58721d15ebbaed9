//! Browser bindings for three small bagged-posterior demonstrations.

use bayesbag_core::asymptotics::{bernoulli_two_model_problem, std_prob_rejects, ubb_cdf, ubb_density, TwoModelLaw};
use bayesbag_core::engine::{bagged_model_posterior, standard_posterior_of, BootstrapConfig};
use bayesbag_core::linreg::{select_features, NigHyperparams};
use bayesbag_core::simgen::{sample_dataset, ResponseKind, SimConfig};
use bayesbag_core::stats::ks_statistic_uniform;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_js<T: Serialize>(v: &T) -> Result<JsValue, JsError> {
    serde_wasm_bindgen::to_value(v).map_err(js_err)
}

#[derive(Serialize)]
pub struct LimitCurves {
    pub u: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
    pub p_std_zero: f64,
    pub p_bb_strong: f64,
}

pub fn limit_curves(delta: f64, c: f64, points: usize) -> bayesbag_core::Result<LimitCurves> {
    let law = TwoModelLaw::new(delta, c)?;
    let points = points.clamp(2, 5000);
    let u: Vec<f64> = (1..=points).map(|i| i as f64 / (points + 1) as f64).collect();
    let density = u.iter().map(|&x| ubb_density(x, &law)).collect::<Result<_, _>>()?;
    let cdf = u.iter().map(|&x| ubb_cdf(x, &law)).collect::<Result<_, _>>()?;
    Ok(LimitCurves {
        u,
        density,
        cdf,
        p_std_zero: std_prob_rejects(&law),
        p_bb_strong: ubb_cdf(0.1, &law)?,
    })
}

/// Limiting density and CDF of the bagged posterior probability of model 1
/// for effect size `delta` and `c = M/N`.
#[wasm_bindgen(js_name = limitCurves)]
pub fn limit_curves_js(delta: f64, c: f64, points: usize) -> Result<JsValue, JsError> {
    to_js(&limit_curves(delta, c, points).map_err(js_err)?)
}

#[derive(Serialize)]
pub struct BernoulliRun {
    pub standard: Vec<f64>,
    pub bagged: Vec<f64>,
    pub ks_bagged: f64,
}

/// Two Bernoulli models `p1 = 0.6`, `p2 = 0.4` on fair-coin data: the
/// posterior probability of model 1 over `reps` datasets.
pub fn bernoulli_run(n: usize, m: usize, b: usize, reps: usize, seed: u64) -> bayesbag_core::Result<BernoulliRun> {
    let prior = [0.5f64.ln(); 2];
    let mut standard = Vec::with_capacity(reps);
    let mut bagged = Vec::with_capacity(reps);
    for r in 0..reps as u64 {
        let prob = bernoulli_two_model_problem(0.6, 0.4, n, seed.wrapping_add(2 * r))?;
        standard.push(standard_posterior_of(&prob, &prior)?.probs[0]);
        let cfg = BootstrapConfig::new(m, b, seed.wrapping_add(2 * r + 1))?;
        bagged.push(bagged_model_posterior(&prob, &prior, &cfg)?.mean_probs[0]);
    }
    let ks_bagged = ks_statistic_uniform(&bagged);
    Ok(BernoulliRun {
        standard,
        bagged,
        ks_bagged,
    })
}

#[wasm_bindgen(js_name = bernoulliExperiment)]
pub fn bernoulli_run_js(n: usize, m: usize, b: usize, reps: usize, seed: u32) -> Result<JsValue, JsError> {
    if n * b * reps > 50_000_000 {
        return Err(JsError::new("N x B x replicates is too large for the browser demo"));
    }
    to_js(&bernoulli_run(n, m, b, reps, u64::from(seed)).map_err(js_err)?)
}

#[derive(Serialize)]
pub struct PipRun {
    pub standard: Vec<f64>,
    pub bagged: Vec<f64>,
    pub causal: Vec<usize>,
}

/// Standard and bagged inclusion probabilities on one simulated dataset with
/// ten regressors and one causal component.
pub fn pip_run(n: usize, nonlinear: bool, b: usize, seed: u64) -> bayesbag_core::Result<PipRun> {
    let response = if nonlinear { ResponseKind::Nonlinear } else { ResponseKind::Linear };
    let cfg = SimConfig::new(10, 1, n, response, seed)?;
    let data = sample_dataset(&cfg)?;
    let hyper = NigHyperparams::simulation_defaults(0.1, 2)?;
    let boot = BootstrapConfig::new(n, b, seed.wrapping_add(1))?;
    let sel = select_features(&data, &hyper, &boot)?;
    let causal = bayesbag_core::simgen::make_beta_dagger(10, 1)?
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(PipRun {
        standard: sel.standard_pips,
        bagged: sel.bagged_pips,
        causal,
    })
}

#[wasm_bindgen(js_name = pipExperiment)]
pub fn pip_run_js(n: usize, nonlinear: bool, b: usize, seed: u32) -> Result<JsValue, JsError> {
    if n * b > 2_000_000 {
        return Err(JsError::new("N x B is too large for the browser demo"));
    }
    to_js(&pip_run(n, nonlinear, b, u64::from(seed)).map_err(js_err)?)
}
