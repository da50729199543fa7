//! The adaptive loop and the fixed-parameter baseline.
//!
//! Each round runs `m` HMC transitions at the current `gamma_i`, turns the
//! window into a reward, appends it to the GP data, rescales on a new best
//! reward and, with probability `p_i`, moves to the acquisition maximizer.
//! Adaptation never stops; samples are the post-burn-in states.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bayes_opt::{adapt_probability, propose_next_with, update_scale, ScaleState, ScaleUpdate, Schedules};
use crate::exec::Execution;
use crate::gp::{ArdKernel, GaussianProcess, RewardDataset, SearchSpace, DEFAULT_KERNEL_WIDTH, DEFAULT_NOISE_VARIANCE};
use crate::hmc::{hmc_transition, ChainState, HyperParams, TrajectoryLength, TransitionRecord};
use crate::models::TargetModel;
use crate::objective::{NormalizedEsjd, RewardFunction, SampleWindow};
use crate::rng::{self, STREAM_ADAPT, STREAM_HMC};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRunConfig {
    pub space: SearchSpace,
    pub schedules: Schedules,
    pub initial: HyperParams,
    pub burnin: usize,
    pub n_samples: usize,
    /// Transitions per round; `None` means `max(burnin / k, 1)`.
    pub window: Option<usize>,
    pub seed: u64,
    pub noise_variance: f64,
    pub kernel_width: f64,
    pub trajectory: TrajectoryLength,
    /// `false` forces `p_i = 0`: the run reduces to plain HMC at `initial`.
    pub adapt: bool,
    /// Condition the GP on unique points with averaged rewards.
    pub collapse_duplicates: bool,
    pub execution: Execution,
}

impl AdaptiveRunConfig {
    pub fn new(space: SearchSpace, initial: HyperParams, burnin: usize, n_samples: usize, seed: u64) -> Self {
        AdaptiveRunConfig {
            space,
            schedules: Schedules::default(),
            initial,
            burnin,
            n_samples,
            window: None,
            seed,
            noise_variance: DEFAULT_NOISE_VARIANCE,
            kernel_width: DEFAULT_KERNEL_WIDTH,
            trajectory: TrajectoryLength::Randomized,
            adapt: true,
            collapse_duplicates: true,
            execution: Execution::default(),
        }
    }

    pub fn window_len(&self) -> usize {
        self.window.unwrap_or((self.burnin / self.schedules.k).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.schedules.validate()?;
        HyperParams::new(self.initial.eps, self.initial.steps)?;
        if !self.space.contains(&self.initial) {
            return Err(Error::invalid(
                "initial",
                "initial (eps, L) lies outside the search space",
            ));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be positive"));
        }
        if self.window == Some(0) {
            return Err(Error::invalid("window", "must be positive"));
        }
        if !(self.noise_variance > 0.0) {
            return Err(Error::invalid("noise_variance", "must be positive"));
        }
        ArdKernel::new(&self.space, self.kernel_width)?;
        Ok(())
    }

    /// `ceil((burnin + n_samples) / m)`.
    pub fn round_count(&self) -> usize {
        (self.burnin + self.n_samples).div_ceil(self.window_len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Burnin,
    Sampling,
}

/// One adaptation round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    /// Parameters the round's transitions ran at.
    pub gamma: HyperParams,
    pub reward: f64,
    pub p: f64,
    /// Scale after this round's update.
    pub s: f64,
    /// Whether `gamma_{i+1}` came from a fresh acquisition argmax.
    pub adapted: bool,
    pub scale_update: ScaleUpdate,
    /// Phase of the round's first transition.
    pub phase: Phase,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptationTrace {
    pub rounds: Vec<RoundRecord>,
    pub total_leapfrog: u64,
}

impl AdaptationTrace {
    /// Number of rounds that started during burn-in.
    pub fn burnin_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.phase == Phase::Burnin).count()
    }
}

/// Cost and acceptance bookkeeping for the retained samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplingLedger {
    /// Leapfrog steps spent producing the post-burn-in samples.
    pub sampling_leapfrog: u64,
    /// Leapfrog steps over the whole run, burn-in included.
    pub total_leapfrog: u64,
    /// Post-burn-in transition records.
    pub records: Vec<TransitionRecord>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub samples: Vec<Vec<f64>>,
    pub trace: AdaptationTrace,
    pub ledger: SamplingLedger,
}

#[derive(Debug, Clone)]
pub struct FixedRun {
    pub samples: Vec<Vec<f64>>,
    pub ledger: SamplingLedger,
}

pub fn run_adaptive<M: TargetModel + ?Sized>(
    model: &M,
    init: &[f64],
    config: &AdaptiveRunConfig,
) -> Result<AdaptiveRun> {
    run_adaptive_with_reward(model, init, config, &NormalizedEsjd)
}

/// Adaptive HMC with a caller-supplied reward.
pub fn run_adaptive_with_reward<M, R>(
    model: &M,
    init: &[f64],
    config: &AdaptiveRunConfig,
    reward_fn: &R,
) -> Result<AdaptiveRun>
where
    M: TargetModel + ?Sized,
    R: RewardFunction + ?Sized,
{
    config.validate()?;
    let mut state = ChainState::new(model, init.to_vec(), rng::stream(config.seed, STREAM_HMC))?;
    let mut adapt_rng = rng::stream(config.seed, STREAM_ADAPT);
    let kernel = ArdKernel::new(&config.space, config.kernel_width)?;
    let mut dataset = RewardDataset::new(config.noise_variance)?;
    let mut scale = ScaleState::default();
    let mut gamma = config.initial;

    let m = config.window_len();
    let total = config.burnin + config.n_samples;
    let mut samples = Vec::with_capacity(config.n_samples);
    let mut ledger = SamplingLedger::default();
    let mut trace = AdaptationTrace::default();
    let mut done = 0usize;
    let mut round = 0usize;

    while done < total {
        round += 1;
        let phase = if done < config.burnin {
            Phase::Burnin
        } else {
            Phase::Sampling
        };
        let len = m.min(total - done);
        let mut positions = Vec::with_capacity(len + 1);
        positions.push(state.position().to_vec());
        let mut records = Vec::with_capacity(len);
        let mut window_leapfrog = 0u64;
        for _ in 0..len {
            let rec = hmc_transition(&mut state, model, gamma, config.trajectory);
            done += 1;
            window_leapfrog += rec.steps_used as u64;
            positions.push(state.position().to_vec());
            if done > config.burnin {
                samples.push(state.position().to_vec());
                ledger.sampling_leapfrog += rec.steps_used as u64;
                ledger.records.push(rec);
            }
            records.push(rec);
        }
        ledger.total_leapfrog += window_leapfrog;

        let window = SampleWindow::new(positions, window_leapfrog)?;
        let reward = match reward_fn.reward(&window, &records, gamma) {
            r if r.is_finite() => r,
            _ => 0.0,
        };
        dataset.add_observation(gamma, reward)?;
        let (new_scale, scale_update) = update_scale(scale, reward, config.schedules.scale_alpha);
        scale = new_scale;

        let u: f64 = adapt_rng.random();
        let p = if config.adapt {
            adapt_probability(round, config.schedules.k)
        } else {
            0.0
        };
        let adapted = u < p;
        let current = gamma;
        if adapted {
            let gp = if config.collapse_duplicates {
                GaussianProcess::from_collapsed(kernel, &dataset.collapsed())?
            } else {
                GaussianProcess::from_dataset(kernel, &dataset)?
            };
            gamma = propose_next_with(
                &gp,
                scale.s,
                round,
                p,
                &config.space,
                &config.schedules,
                config.execution,
            );
        }
        trace.rounds.push(RoundRecord {
            round,
            gamma: current,
            reward,
            p,
            s: scale.s,
            adapted,
            scale_update,
            phase,
        });
    }
    trace.total_leapfrog = ledger.total_leapfrog;
    Ok(AdaptiveRun { samples, trace, ledger })
}

/// Plain HMC at fixed `gamma`.
pub fn run_fixed<M: TargetModel + ?Sized>(
    model: &M,
    init: &[f64],
    gamma: HyperParams,
    burnin: usize,
    n_samples: usize,
    seed: u64,
    trajectory: TrajectoryLength,
) -> Result<FixedRun> {
    HyperParams::new(gamma.eps, gamma.steps)?;
    let mut state = ChainState::new(model, init.to_vec(), rng::stream(seed, STREAM_HMC))?;
    let mut samples = Vec::with_capacity(n_samples);
    let mut ledger = SamplingLedger::default();
    for t in 1..=burnin + n_samples {
        let rec = hmc_transition(&mut state, model, gamma, trajectory);
        ledger.total_leapfrog += rec.steps_used as u64;
        if t > burnin {
            samples.push(state.position().to_vec());
            ledger.sampling_leapfrog += rec.steps_used as u64;
            ledger.records.push(rec);
        }
    }
    Ok(FixedRun { samples, ledger })
}
