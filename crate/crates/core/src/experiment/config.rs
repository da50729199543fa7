use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes_opt::Schedules;
use crate::gp::{SearchSpace, DEFAULT_EPS_GRID_SIZE, DEFAULT_KERNEL_WIDTH, DEFAULT_NOISE_VARIANCE};
use crate::hmc::{HyperParams, TrajectoryLength};
use crate::models::{
    read_vector_csv, simulate_lgc_data, simulate_sv_data, GaussianTarget, LgcParams, LogGaussianCoxModel,
    LogisticRegressionModel, StochasticVolatilityModel, TargetModel,
};
use crate::sampler::AdaptiveRunConfig;
use crate::{Error, Result};

/// A complete experiment description, read from TOML.
///
/// ```toml
/// seed = 42
/// chains = 10
///
/// [model]
/// name = "logistic"
/// design = "x.csv"
/// labels = "y.csv"
///
/// [sampler]
/// mode = "adaptive"
/// burnin = 1000
/// samples = 5000
/// eps_bounds = [0.01, 0.2]
/// steps_bounds = [1, 100]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "defaults::chains")]
    pub chains: usize,
    /// Worker threads for concurrent chains; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelSpec,
    pub sampler: SamplerSpec,
}

mod defaults {
    pub fn chains() -> usize {
        1
    }
    pub fn k() -> usize {
        100
    }
    pub fn delta() -> f64 {
        0.1
    }
    pub fn scale_alpha() -> f64 {
        4.0
    }
    pub fn kernel_width() -> f64 {
        super::DEFAULT_KERNEL_WIDTH
    }
    pub fn noise_variance() -> f64 {
        super::DEFAULT_NOISE_VARIANCE
    }
    pub fn eps_grid_size() -> usize {
        super::DEFAULT_EPS_GRID_SIZE
    }
    pub fn yes() -> bool {
        true
    }
    pub fn prior_variance() -> f64 {
        100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Standard normal, or a randomly rotated Gaussian with the given condition number.
    Gaussian {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        condition: Option<f64>,
        #[serde(default)]
        basis_seed: u64,
    },
    Logistic(LogisticSpec),
    Lgc(LgcSpec),
    Sv(SvSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticLogistic>,
    #[serde(default = "defaults::prior_variance")]
    pub prior_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticLogistic {
    pub observations: usize,
    pub features: usize,
    pub data_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LgcSpec {
    pub grid: usize,
    pub mu: f64,
    pub sigma2: f64,
    pub beta: f64,
    /// Single-column CSV of `grid^2` counts in row-major cell order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<PathBuf>,
    /// Seed for simulated counts when `counts` is absent.
    #[serde(default)]
    pub data_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSv>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSv {
    pub length: usize,
    pub beta: f64,
    pub phi: f64,
    pub sigma: f64,
    pub data_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub mode: SamplerMode,
    pub burnin: usize,
    pub samples: usize,
    /// Fixed step size, or the initial one for adaptive runs (default: box midpoint).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_bounds: Option<[usize; 2]>,
    /// Transitions per adaptation round; default `burnin / k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default = "defaults::k")]
    pub k: usize,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::scale_alpha")]
    pub scale_alpha: f64,
    #[serde(default = "defaults::kernel_width")]
    pub kernel_width: f64,
    #[serde(default = "defaults::noise_variance")]
    pub noise_variance: f64,
    #[serde(default = "defaults::eps_grid_size")]
    pub eps_grid_size: usize,
    /// Always take exactly `L` leapfrog steps instead of `Uniform{1..L}`.
    #[serde(default)]
    pub fixed_length: bool,
    /// `false` disables adaptation (`p_i = 0`) while keeping the round structure.
    #[serde(default = "defaults::yes")]
    pub adapt: bool,
    /// Standard deviation of Gaussian jitter added to each chain's start.
    #[serde(default)]
    pub init_jitter: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("`{field}`: {why}")));
        if self.chains == 0 {
            return bad("chains", "must be at least 1");
        }
        let s = &self.sampler;
        if s.samples == 0 {
            return bad("sampler.samples", "must be positive");
        }
        if s.init_jitter < 0.0 || !s.init_jitter.is_finite() {
            return bad("sampler.init_jitter", "must be a nonnegative number");
        }
        match s.mode {
            SamplerMode::Fixed => {
                if s.eps.is_none() || s.steps.is_none() {
                    return bad("sampler", "fixed mode needs `eps` and `steps`");
                }
                self.fixed_gamma()?;
            }
            SamplerMode::Adaptive => {
                self.adaptive_config(0)?;
            }
        }
        match &self.model {
            ModelSpec::Gaussian { dim, condition, .. } => {
                if *dim == 0 {
                    return bad("model.dim", "must be positive");
                }
                if condition.is_some_and(|c| !(c >= 1.0)) {
                    return bad("model.condition", "must be >= 1");
                }
            }
            ModelSpec::Logistic(l) => match (&l.design, &l.labels, &l.synthetic) {
                (Some(_), Some(_), None) | (None, None, Some(_)) => {}
                _ => return bad("model", "logistic needs either `design` + `labels` or `synthetic`"),
            },
            ModelSpec::Lgc(l) => {
                if l.grid < 2 {
                    return bad("model.grid", "must be at least 2");
                }
            }
            ModelSpec::Sv(v) => {
                if v.observations.is_some() == v.synthetic.is_some() {
                    return bad("model", "sv needs exactly one of `observations` or `synthetic`");
                }
            }
        }
        Ok(())
    }

    pub fn fixed_gamma(&self) -> Result<HyperParams> {
        let s = &self.sampler;
        HyperParams::new(s.eps.unwrap_or(f64::NAN), s.steps.unwrap_or(0))
            .map_err(|e| Error::Config(format!("sampler: {e}")))
    }

    pub fn trajectory(&self) -> TrajectoryLength {
        if self.sampler.fixed_length {
            TrajectoryLength::Fixed
        } else {
            TrajectoryLength::Randomized
        }
    }

    /// Adaptive run settings for one chain.
    pub fn adaptive_config(&self, seed: u64) -> Result<AdaptiveRunConfig> {
        let s = &self.sampler;
        let cfg_err = |e: Error| Error::Config(format!("sampler: {e}"));
        let (Some(eb), Some(lb)) = (s.eps_bounds, s.steps_bounds) else {
            return Err(Error::Config(
                "sampler: adaptive mode needs `eps_bounds` and `steps_bounds`".into(),
            ));
        };
        let space = SearchSpace::new((eb[0], eb[1]), (lb[0], lb[1]), s.eps_grid_size).map_err(cfg_err)?;
        let initial = HyperParams {
            eps: s.eps.unwrap_or(0.5 * (eb[0] + eb[1])),
            steps: s.steps.unwrap_or((lb[0] + lb[1]) / 2),
        };
        let config = AdaptiveRunConfig {
            schedules: Schedules {
                k: s.k,
                delta: s.delta,
                scale_alpha: s.scale_alpha,
            },
            window: s.window,
            noise_variance: s.noise_variance,
            kernel_width: s.kernel_width,
            trajectory: self.trajectory(),
            adapt: s.adapt,
            ..AdaptiveRunConfig::new(space, initial, s.burnin, s.samples, seed)
        };
        config.validate().map_err(cfg_err)?;
        Ok(config)
    }

    /// Builds the target; relative data paths resolve against `base_dir`.
    pub fn build_model(&self, base_dir: &Path) -> Result<Box<dyn TargetModel>> {
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base_dir.join(p) };
        Ok(match &self.model {
            ModelSpec::Gaussian {
                dim,
                condition,
                basis_seed,
            } => match condition {
                Some(c) => Box::new(GaussianTarget::ill_conditioned(*dim, *c, *basis_seed)?),
                None => Box::new(GaussianTarget::standard(*dim)),
            },
            ModelSpec::Logistic(l) => match (&l.design, &l.labels, &l.synthetic) {
                (Some(x), Some(y), _) => Box::new(LogisticRegressionModel::from_csv(
                    &resolve(x),
                    &resolve(y),
                    l.prior_variance,
                )?),
                (_, _, Some(syn)) => Box::new(LogisticRegressionModel::synthetic(
                    syn.observations,
                    syn.features,
                    l.prior_variance,
                    syn.data_seed,
                )?),
                _ => unreachable!("validated"),
            },
            ModelSpec::Lgc(l) => {
                let params = LgcParams {
                    mu: l.mu,
                    sigma2: l.sigma2,
                    beta: l.beta,
                };
                let counts = match &l.counts {
                    Some(p) => read_vector_csv(&resolve(p))?,
                    None => simulate_lgc_data(l.grid, &params, l.data_seed)?.counts,
                };
                Box::new(LogGaussianCoxModel::new(l.grid, counts, params)?)
            }
            ModelSpec::Sv(v) => {
                let y = match (&v.observations, &v.synthetic) {
                    (Some(p), _) => read_vector_csv(&resolve(p))?,
                    (_, Some(s)) => simulate_sv_data(s.length, s.beta, s.phi, s.sigma, s.data_seed)?.observations,
                    _ => unreachable!("validated"),
                };
                Box::new(StochasticVolatilityModel::new(y)?)
            }
        })
    }
}
