//! Adaptive Hamiltonian Monte Carlo.
//!
//! An HMC sampler whose step size `eps` and maximum leapfrog count `L` are
//! re-tuned throughout the run by Bayesian optimization. Rewards are the
//! expected squared jumping distance per `sqrt(L)`, a Gaussian process models
//! the reward surface over the `(eps, L)` grid, and a UCB-style acquisition
//! picks the next setting. The probability of re-tuning decays as
//! `max(i - k + 1, 1)^-0.5`, which keeps the adaptive chain ergodic.
//!
//! ```no_run
//! use ahmc::models::GaussianTarget;
//! use ahmc::sampler::{run_adaptive, AdaptiveRunConfig};
//! use ahmc::gp::SearchSpace;
//! use ahmc::hmc::HyperParams;
//!
//! let target = GaussianTarget::standard(10);
//! let space = SearchSpace::new((0.01, 1.0), (1, 50), 200).unwrap();
//! let config = AdaptiveRunConfig::new(space, HyperParams::new(0.1, 10).unwrap(), 2000, 5000, 7);
//! let run = run_adaptive(&target, &vec![0.0; 10], &config).unwrap();
//! println!("{} samples, {} rounds", run.samples.len(), run.trace.rounds.len());
//! ```

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes_opt;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod gp;
pub mod hmc;
pub mod models;
pub mod objective;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
