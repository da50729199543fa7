//! Reward signals for the tuner.

use crate::hmc::{HyperParams, TransitionRecord};
use crate::{Error, Result};

/// `m + 1` consecutive chain positions: the state before the window's first
/// transition followed by the state after each of the `m` transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    positions: Vec<Vec<f64>>,
    leapfrog_steps: u64,
}

impl SampleWindow {
    pub fn new(positions: Vec<Vec<f64>>, leapfrog_steps: u64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::invalid("positions", "a window needs at least two positions"));
        }
        let dim = positions[0].len();
        if let Some(bad) = positions.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(SampleWindow {
            positions,
            leapfrog_steps,
        })
    }

    /// Number of transitions `m`.
    pub fn transitions(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn leapfrog_steps(&self) -> u64 {
        self.leapfrog_steps
    }

    pub fn reversed(&self) -> SampleWindow {
        let mut positions = self.positions.clone();
        positions.reverse();
        SampleWindow {
            positions,
            leapfrog_steps: self.leapfrog_steps,
        }
    }
}

/// A reward measured at `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reward {
    pub value: f64,
    pub gamma: HyperParams,
}

/// Mean squared Euclidean jump over consecutive positions.
pub fn esjd(window: &SampleWindow) -> f64 {
    let total: f64 = window
        .positions
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a) * (b - a)).sum::<f64>())
        .sum();
    total / window.transitions() as f64
}

/// `esjd / sqrt(L)`.
pub fn normalized_esjd(window: &SampleWindow, gamma: HyperParams) -> Reward {
    Reward {
        value: esjd(window) / (gamma.steps as f64).sqrt(),
        gamma,
    }
}

/// Fraction of accepted transitions.
pub fn acceptance_rate(records: &[TransitionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::invalid("records", "acceptance rate of an empty window"));
    }
    Ok(records.iter().filter(|r| r.accepted).count() as f64 / records.len() as f64)
}

/// A reward computed from one window of transitions run at `gamma`.
///
/// Implementors that want a constant leapfrog budget per evaluation must
/// arrange that themselves (e.g. by choosing `m` from `L`).
pub trait RewardFunction: Sync {
    fn reward(&self, window: &SampleWindow, records: &[TransitionRecord], gamma: HyperParams) -> f64;
}

/// The default reward, `ESJD / sqrt(L)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalizedEsjd;

impl RewardFunction for NormalizedEsjd {
    fn reward(&self, window: &SampleWindow, _: &[TransitionRecord], gamma: HyperParams) -> f64 {
        normalized_esjd(window, gamma).value
    }
}

impl<F> RewardFunction for F
where
    F: Fn(&SampleWindow, &[TransitionRecord], HyperParams) -> f64 + Sync,
{
    fn reward(&self, window: &SampleWindow, records: &[TransitionRecord], gamma: HyperParams) -> f64 {
        self(window, records, gamma)
    }
}
