//! Bagged posterior model selection and diagnostics.
//!
//! The [`engine`] module averages model posteriors over multinomial bootstrap
//! reweightings of the data. [`linreg`] supplies conjugate linear-regression
//! feature selection on top of it, [`asymptotics`] the limiting laws of
//! standard and bagged model probabilities, [`mismatch`] a misspecification
//! index, [`simgen`] the synthetic data generator and [`compare`] HPD-region
//! overlap for discrete posteriors.

pub mod asymptotics;
pub mod compare;
pub mod engine;
pub mod error;
pub mod linreg;
pub mod mismatch;
pub mod simgen;
pub mod special;
pub mod stats;

pub use engine::{
    bagged_model_posterior, exact_bagged_posterior, BaggedPosterior, BootstrapConfig, ModelPosterior, WeightVector,
    WeightedEvidence,
};
pub use error::{Error, Result};
