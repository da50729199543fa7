//! The HMC transition kernel.
//!
//! Identity mass matrix, full momentum refresh every transition and a
//! trajectory length drawn uniformly from `{1, ..., L}` (the random-time
//! kernel `P = sum_l Q_{l,eps} / L`). Proposals leaving the support box are
//! rejected without a Metropolis test.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::models::{support_of, SupportBox, TargetModel};
use crate::rng::ChainRng;
use crate::{Error, Result};

/// Step size and maximum leapfrog count of one HMC kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub eps: f64,
    pub steps: usize,
}

impl HyperParams {
    pub fn new(eps: f64, steps: usize) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("eps", format!("step size must be positive, got {eps}")));
        }
        if steps == 0 {
            return Err(Error::invalid("steps", "leapfrog count must be at least 1"));
        }
        Ok(HyperParams { eps, steps })
    }
}

/// How many leapfrog steps a transition takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryLength {
    /// `l ~ Uniform{1, ..., L}` each transition.
    #[default]
    Randomized,
    /// Always `L` steps.
    Fixed,
}

/// The integrator produced a non-finite gradient or log-density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    /// 1-based leapfrog step at which it happened.
    pub step: usize,
}

/// Position, cached log-density and gradient, random stream and support box.
#[derive(Debug, Clone)]
pub struct ChainState {
    position: Vec<f64>,
    log_density: f64,
    grad: Vec<f64>,
    support: SupportBox,
    pub rng: ChainRng,
}

impl ChainState {
    pub fn new<M: TargetModel + ?Sized>(model: &M, position: Vec<f64>, rng: ChainRng) -> Result<Self> {
        Self::with_support(model, position, rng, support_of(model))
    }

    pub fn with_support<M: TargetModel + ?Sized>(
        model: &M,
        position: Vec<f64>,
        rng: ChainRng,
        support: SupportBox,
    ) -> Result<Self> {
        if support.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: support.dim(),
            });
        }
        let mut grad = vec![0.0; model.dim()];
        let log_density = crate::models::log_density(model, &position)?;
        model.log_density_and_grad(&position, &mut grad);
        if !support.contains(&position) {
            return Err(Error::invalid(
                "position",
                "initial position lies outside the support box",
            ));
        }
        if !log_density.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid(
                "position",
                "log-density or gradient is not finite at the initial position",
            ));
        }
        Ok(ChainState {
            position,
            log_density,
            grad,
            support,
            rng,
        })
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    pub fn log_density(&self) -> f64 {
        self.log_density
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }
}

/// Outcome of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRecord {
    pub accepted: bool,
    pub steps_used: usize,
    /// `|x_{t+1} - x_t|^2`; zero when rejected.
    pub squared_jump: f64,
    /// `H(x', p') - H(x, p)`; infinite for divergent or out-of-support proposals.
    pub energy_error: f64,
    pub diverged: bool,
    pub out_of_support: bool,
}

/// `-log pi(x) + |p|^2 / 2`.
pub fn hamiltonian<M: TargetModel + ?Sized>(model: &M, x: &[f64], p: &[f64]) -> f64 {
    -model.log_density(x) + kinetic(p)
}

fn kinetic(p: &[f64]) -> f64 {
    0.5 * p.iter().map(|v| v * v).sum::<f64>()
}

/// In-place leapfrog. On entry `grad` holds the gradient at `x`; on success
/// `x`, `p`, `grad` hold the end point and the returned value is `log pi(x')`.
fn leapfrog_in_place<M: TargetModel + ?Sized>(
    model: &M,
    x: &mut [f64],
    p: &mut [f64],
    grad: &mut [f64],
    eps: f64,
    steps: usize,
) -> std::result::Result<f64, Divergence> {
    let half = 0.5 * eps;
    let mut lp = f64::NAN;
    for step in 1..=steps {
        for (pi, gi) in p.iter_mut().zip(grad.iter()) {
            *pi += half * gi;
        }
        for (xi, pi) in x.iter_mut().zip(p.iter()) {
            *xi += eps * pi;
        }
        lp = model.log_density_and_grad(x, grad);
        if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Divergence { step });
        }
        for (pi, gi) in p.iter_mut().zip(grad.iter()) {
            *pi += half * gi;
        }
    }
    Ok(lp)
}

/// `l` leapfrog steps of size `eps` from `(x, p)` under `U(x) = -log pi(x)`.
pub fn leapfrog<M: TargetModel + ?Sized>(
    model: &M,
    x: &[f64],
    p: &[f64],
    eps: f64,
    l: usize,
) -> std::result::Result<(Vec<f64>, Vec<f64>), Divergence> {
    assert!(l >= 1 && eps > 0.0, "leapfrog needs l >= 1 and eps > 0");
    let mut x = x.to_vec();
    let mut p = p.to_vec();
    let mut grad = vec![0.0; x.len()];
    let lp = model.log_density_and_grad(&x, &mut grad);
    if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Divergence { step: 0 });
    }
    leapfrog_in_place(model, &mut x, &mut p, &mut grad, eps, l)?;
    Ok((x, p))
}

/// One HMC transition. Draw order from `state.rng`: `dim` standard normals
/// for the momentum, the trajectory length (randomized mode only), then one
/// uniform for the Metropolis test (always drawn, even for rejected-outright
/// proposals, so the stream layout does not depend on the outcome).
pub fn hmc_transition<M: TargetModel + ?Sized>(
    state: &mut ChainState,
    model: &M,
    params: HyperParams,
    length: TrajectoryLength,
) -> TransitionRecord {
    let dim = state.position.len();
    let p0: Vec<f64> = (0..dim).map(|_| state.rng.sample(StandardNormal)).collect();
    let steps = match length {
        TrajectoryLength::Randomized => state.rng.random_range(1..=params.steps),
        TrajectoryLength::Fixed => params.steps,
    };
    let u: f64 = state.rng.random();

    let h0 = -state.log_density + kinetic(&p0);
    let mut x = state.position.clone();
    let mut p = p0;
    let mut grad = state.grad.clone();
    let rejected = |diverged: bool, out_of_support: bool| TransitionRecord {
        accepted: false,
        steps_used: steps,
        squared_jump: 0.0,
        energy_error: f64::INFINITY,
        diverged,
        out_of_support,
    };

    let lp = match leapfrog_in_place(model, &mut x, &mut p, &mut grad, params.eps, steps) {
        Ok(lp) => lp,
        Err(_) => return rejected(true, false),
    };
    if !state.support.contains(&x) {
        return rejected(false, true);
    }
    let h1 = -lp + kinetic(&p);
    let energy_error = h1 - h0;
    if !energy_error.is_finite() {
        return rejected(true, false);
    }
    // accept with probability min(1, exp(h0 - h1))
    if u.ln() < -energy_error {
        let squared_jump = x.iter().zip(&state.position).map(|(a, b)| (a - b) * (a - b)).sum();
        state.position = x;
        state.log_density = lp;
        state.grad = grad;
        TransitionRecord {
            accepted: true,
            steps_used: steps,
            squared_jump,
            energy_error,
            diverged: false,
            out_of_support: false,
        }
    } else {
        TransitionRecord {
            accepted: false,
            steps_used: steps,
            squared_jump: 0.0,
            energy_error,
            diverged: false,
            out_of_support: false,
        }
    }
}
