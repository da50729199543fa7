//! UCB-style acquisition with a diminishing-adaptation schedule.
//!
//! The score of a candidate `gamma` at round `i` is
//! `s * mu_i(gamma) + p_i * sqrt(beta_{i+1}) * sigma_i(gamma)`, where `mu_i`
//! and `sigma_i` come from the GP fitted to unscaled rewards, `s` rescales
//! rewards so the best one maps to `scale_alpha`, and
//! `p_i = max(i - k + 1, 1)^-0.5` both damps exploration and gates whether
//! the tuner moves at all.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::gp::{GaussianProcess, GpPosterior, SearchSpace};
use crate::hmc::HyperParams;
use crate::{Error, Result};

/// Schedule constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedules {
    /// Rounds of always-on adaptation before `p_i` starts to decay.
    pub k: usize,
    /// Confidence parameter of `beta`.
    pub delta: f64,
    /// Target value of the best rescaled reward.
    pub scale_alpha: f64,
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules {
            k: 100,
            delta: 0.1,
            scale_alpha: 4.0,
        }
    }
}

impl Schedules {
    /// Dimension of the search space, `(eps, L)`.
    pub const SEARCH_DIM: usize = 2;

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", "must lie in (0, 1)"));
        }
        if !(self.scale_alpha > 0.0 && self.scale_alpha.is_finite()) {
            return Err(Error::invalid("scale_alpha", "must be positive"));
        }
        Ok(())
    }
}

/// `beta_{i+1} = 2 ln((i + 1)^(d/2 + 2) pi^2 / (3 delta))`.
pub fn beta(i: usize, d: usize, delta: f64) -> f64 {
    let exponent = d as f64 / 2.0 + 2.0;
    2.0 * (exponent * ((i + 1) as f64).ln() + (PI * PI / (3.0 * delta)).ln())
}

/// `p_i = max(i - k + 1, 1)^-0.5` for round `i >= 1`.
pub fn adapt_probability(i: usize, k: usize) -> f64 {
    let base = (i + 1).saturating_sub(k).max(1);
    (base as f64).powf(-0.5)
}

/// Reward scale `s` and the best reward seen so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleState {
    pub s: f64,
    /// `None` until the first reward (the supremum of an empty set is `-inf`).
    pub best_reward: Option<f64>,
}

impl Default for ScaleState {
    fn default() -> Self {
        ScaleState {
            s: 1.0,
            best_reward: None,
        }
    }
}

/// What [`update_scale`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleUpdate {
    Unchanged,
    Rescaled,
    /// A new maximum that is not positive: `s` was kept.
    NonPositiveMaximum,
}

/// On a strictly new maximum `r`, sets `s = scale_alpha / r`.
pub fn update_scale(scale: ScaleState, reward: f64, scale_alpha: f64) -> (ScaleState, ScaleUpdate) {
    let is_new_max = scale.best_reward.is_none_or(|best| reward > best);
    if !is_new_max || !reward.is_finite() {
        return (scale, ScaleUpdate::Unchanged);
    }
    if reward > 0.0 {
        (
            ScaleState {
                s: scale_alpha / reward,
                best_reward: Some(reward),
            },
            ScaleUpdate::Rescaled,
        )
    } else {
        (
            ScaleState {
                s: scale.s,
                best_reward: Some(reward),
            },
            ScaleUpdate::NonPositiveMaximum,
        )
    }
}

/// Acquisition value from a posterior: `s * mean + p_i * sqrt(beta_{i+1}) * sd`.
pub fn ucb_from_posterior(post: GpPosterior, s: f64, p_i: f64, beta_next: f64) -> f64 {
    s * post.mean + p_i * beta_next.sqrt() * post.std_dev()
}

/// Acquisition value at `gamma` for round `i >= 1`.
pub fn ucb_score(gamma: &HyperParams, s: f64, gp: &GaussianProcess, i: usize, schedules: &Schedules) -> f64 {
    let p = adapt_probability(i, schedules.k);
    ucb_from_posterior(gp.predict(gamma), s, p, beta(i, Schedules::SEARCH_DIM, schedules.delta))
}

/// Exhaustive argmax of the acquisition over the search grid.
///
/// Grid order is `eps` ascending, then `L` ascending; ties go to the earliest
/// point. `p_i` is passed explicitly so callers can share one value per round.
pub fn propose_next_with(
    gp: &GaussianProcess,
    s: f64,
    i: usize,
    p_i: f64,
    space: &SearchSpace,
    schedules: &Schedules,
    exec: Execution,
) -> HyperParams {
    let eps_grid = space.eps_grid();
    let steps: Vec<usize> = space.steps_grid().collect();
    let kernel = gp.kernel();
    let points = gp.points();
    // the kernel factorizes over (eps, L): tabulate each factor once
    let eps_tab: Vec<Vec<f64>> = eps_grid
        .iter()
        .map(|e| points.iter().map(|p| kernel.eps_factor(*e, p.eps)).collect())
        .collect();
    let steps_tab: Vec<Vec<f64>> = steps
        .iter()
        .map(|l| points.iter().map(|p| kernel.steps_factor(*l, p.steps)).collect())
        .collect();
    let beta_next = beta(i, Schedules::SEARCH_DIM, schedules.delta);
    let n_steps = steps.len();

    let best = exec
        .argmax(eps_grid.len() * n_steps, |idx| {
            let (ie, il) = (idx / n_steps, idx % n_steps);
            let k: Vec<f64> = eps_tab[ie].iter().zip(&steps_tab[il]).map(|(a, b)| a * b).collect();
            ucb_from_posterior(gp.predict_with(&k, 1.0), s, p_i, beta_next)
        })
        .unwrap_or(0);
    HyperParams {
        eps: eps_grid[best / n_steps],
        steps: steps[best % n_steps],
    }
}

/// [`propose_next_with`] using `p_i` from the schedule and the default executor.
pub fn propose_next(gp: &GaussianProcess, s: f64, i: usize, space: &SearchSpace, schedules: &Schedules) -> HyperParams {
    let p_i = adapt_probability(i, schedules.k);
    propose_next_with(gp, s, i, p_i, space, schedules, Execution::default())
}
