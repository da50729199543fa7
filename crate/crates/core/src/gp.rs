//! Gaussian-process surrogate over the `(eps, L)` search space.
//!
//! Zero-mean prior with a squared-exponential ARD kernel whose length scales
//! are a fixed fraction of the search box widths:
//! `k(a, b) = exp(-0.5 * sum_j (a_j - b_j)^2 / (w * (hi_j - lo_j))^2)`.
//! Posterior mean and variance are the exact noisy-observation equations,
//! solved through a Cholesky factor of `K + diag(noise)`.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::hmc::HyperParams;
use crate::{Error, Result};

/// Default kernel width as a fraction of each box side.
pub const DEFAULT_KERNEL_WIDTH: f64 = 0.2;
/// Default observation noise variance.
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.1;
/// Default number of grid values for `eps`.
pub const DEFAULT_EPS_GRID_SIZE: usize = 200;

/// Box `[eps_lo, eps_hi] x {L_lo, ..., L_hi}` with a uniform `eps` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub eps_bounds: (f64, f64),
    pub steps_bounds: (usize, usize),
    pub eps_grid_size: usize,
}

impl SearchSpace {
    pub fn new(eps_bounds: (f64, f64), steps_bounds: (usize, usize), eps_grid_size: usize) -> Result<Self> {
        let space = SearchSpace {
            eps_bounds,
            steps_bounds,
            eps_grid_size,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.eps_bounds;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid(
                "eps_bounds",
                format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
            ));
        }
        let (llo, lhi) = self.steps_bounds;
        if llo < 1 || llo > lhi {
            return Err(Error::invalid(
                "steps_bounds",
                format!("need 1 <= lo <= hi, got [{llo}, {lhi}]"),
            ));
        }
        if self.eps_grid_size == 0 || (lo < hi && self.eps_grid_size < 2) {
            return Err(Error::invalid(
                "eps_grid_size",
                "a non-degenerate eps range needs at least 2 grid points",
            ));
        }
        Ok(())
    }

    /// Uniform grid over the `eps` bounds, both endpoints included exactly.
    pub fn eps_grid(&self) -> Vec<f64> {
        let (lo, hi) = self.eps_bounds;
        if lo == hi {
            return vec![lo];
        }
        let n = self.eps_grid_size;
        (0..n)
            .map(|i| match i {
                0 => lo,
                i if i == n - 1 => hi,
                i => lo + (hi - lo) * i as f64 / (n - 1) as f64,
            })
            .collect()
    }

    pub fn steps_grid(&self) -> std::ops::RangeInclusive<usize> {
        self.steps_bounds.0..=self.steps_bounds.1
    }

    pub fn steps_count(&self) -> usize {
        self.steps_bounds.1 - self.steps_bounds.0 + 1
    }

    pub fn contains(&self, gamma: &HyperParams) -> bool {
        let (lo, hi) = self.eps_bounds;
        lo <= gamma.eps && gamma.eps <= hi && self.steps_grid().contains(&gamma.steps)
    }
}

/// Squared-exponential ARD kernel on `(eps, L)` in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArdKernel {
    /// `1 / length^2` per dimension; `None` for a zero-width dimension.
    inv_sq_eps: Option<f64>,
    inv_sq_steps: Option<f64>,
}

impl ArdKernel {
    pub fn new(space: &SearchSpace, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("kernel_width", "must be positive"));
        }
        let inv = |span: f64| (span > 0.0).then(|| 1.0 / (width * span).powi(2));
        Ok(ArdKernel {
            inv_sq_eps: inv(space.eps_bounds.1 - space.eps_bounds.0),
            inv_sq_steps: inv((space.steps_bounds.1 - space.steps_bounds.0) as f64),
        })
    }

    /// Factor of the kernel contributed by the `eps` coordinate.
    pub fn eps_factor(&self, a: f64, b: f64) -> f64 {
        match self.inv_sq_eps {
            Some(inv) => (-0.5 * (a - b) * (a - b) * inv).exp(),
            None => 1.0,
        }
    }

    /// Factor of the kernel contributed by the `L` coordinate.
    pub fn steps_factor(&self, a: usize, b: usize) -> f64 {
        match self.inv_sq_steps {
            Some(inv) => {
                let d = a as f64 - b as f64;
                (-0.5 * d * d * inv).exp()
            }
            None => 1.0,
        }
    }

    /// Kernel value; a zero-width dimension contributes nothing. Assumes both
    /// points lie in the space the kernel was built for.
    pub fn eval(&self, a: &HyperParams, b: &HyperParams) -> f64 {
        self.eps_factor(a.eps, b.eps) * self.steps_factor(a.steps, b.steps)
    }
}

/// Checked kernel evaluation.
pub fn kernel(a: &HyperParams, b: &HyperParams, space: &SearchSpace, width: f64) -> Result<f64> {
    for g in [a, b] {
        if !space.contains(g) {
            return Err(Error::invalid(
                "gamma",
                format!("({}, {}) lies outside the search space", g.eps, g.steps),
            ));
        }
    }
    Ok(ArdKernel::new(space, width)?.eval(a, b))
}

/// Observed `(gamma, reward)` pairs with a shared noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardDataset {
    points: Vec<HyperParams>,
    rewards: Vec<f64>,
    noise_variance: f64,
}

impl RewardDataset {
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::invalid("noise_variance", "must be positive"));
        }
        Ok(RewardDataset {
            points: Vec::new(),
            rewards: Vec::new(),
            noise_variance,
        })
    }

    /// Appends an observation. Repeated points are kept individually.
    pub fn add_observation(&mut self, gamma: HyperParams, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::invalid("reward", format!("must be finite, got {reward}")));
        }
        self.points.push(gamma);
        self.rewards.push(reward);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[HyperParams] {
        &self.points
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn prefix(&self, n: usize) -> RewardDataset {
        RewardDataset {
            points: self.points[..n].to_vec(),
            rewards: self.rewards[..n].to_vec(),
            noise_variance: self.noise_variance,
        }
    }

    /// Unique points (in order of first appearance) with averaged rewards and
    /// noise `noise_variance / count`. Gives the same posterior as the full set.
    pub fn collapsed(&self) -> CollapsedDataset {
        let mut index: HashMap<(u64, usize), usize> = HashMap::new();
        let mut points = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (g, r) in self.points.iter().zip(&self.rewards) {
            let slot = *index.entry((g.eps.to_bits(), g.steps)).or_insert_with(|| {
                points.push(*g);
                sums.push(0.0);
                counts.push(0);
                points.len() - 1
            });
            sums[slot] += r;
            counts[slot] += 1;
        }
        let rewards = sums.iter().zip(&counts).map(|(s, c)| s / *c as f64).collect();
        CollapsedDataset {
            points,
            rewards,
            counts,
            noise_variance: self.noise_variance,
        }
    }
}

/// Unique-point summary of a [`RewardDataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedDataset {
    pub points: Vec<HyperParams>,
    pub rewards: Vec<f64>,
    pub counts: Vec<usize>,
    pub noise_variance: f64,
}

/// Posterior predictive mean and variance at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpPosterior {
    pub mean: f64,
    pub variance: f64,
}

impl GpPosterior {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// A GP conditioned on observations with per-observation noise variances.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    kernel: ArdKernel,
    points: Vec<HyperParams>,
    chol: Option<Cholesky<f64, Dyn>>,
    /// `(K + diag(noise))^-1 r`
    alpha: DVector<f64>,
}

impl GaussianProcess {
    pub fn fit(kernel: ArdKernel, points: Vec<HyperParams>, rewards: &[f64], noise: &[f64]) -> Result<Self> {
        let n = points.len();
        if rewards.len() != n || noise.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rewards.len().min(noise.len()),
            });
        }
        if n == 0 {
            return Ok(GaussianProcess {
                kernel,
                points,
                chol: None,
                alpha: DVector::zeros(0),
            });
        }
        let gram = DMatrix::from_fn(n, n, |i, j| {
            kernel.eval(&points[i], &points[j]) + if i == j { noise[i] } else { 0.0 }
        });
        let chol = gram.cholesky().ok_or_else(|| Error::Singular {
            context: format!("GP Gram matrix with {n} observations"),
        })?;
        let alpha = chol.solve(&DVector::from_column_slice(rewards));
        Ok(GaussianProcess {
            kernel,
            points,
            chol: Some(chol),
            alpha,
        })
    }

    /// Conditions on every observation individually.
    pub fn from_dataset(kernel: ArdKernel, data: &RewardDataset) -> Result<Self> {
        let noise = vec![data.noise_variance; data.len()];
        Self::fit(kernel, data.points.clone(), &data.rewards, &noise)
    }

    /// Conditions on the unique-point summary.
    pub fn from_collapsed(kernel: ArdKernel, data: &CollapsedDataset) -> Result<Self> {
        let noise: Vec<f64> = data.counts.iter().map(|c| data.noise_variance / *c as f64).collect();
        Self::fit(kernel, data.points.clone(), &data.rewards, &noise)
    }

    pub fn kernel(&self) -> &ArdKernel {
        &self.kernel
    }

    pub fn points(&self) -> &[HyperParams] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Posterior given the cross-covariance vector `k_star` between the query
    /// and the conditioning points, and the prior variance `k(q, q)`.
    pub fn predict_with(&self, k_star: &[f64], prior_variance: f64) -> GpPosterior {
        let Some(chol) = &self.chol else {
            return GpPosterior {
                mean: 0.0,
                variance: prior_variance,
            };
        };
        let mean = k_star.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum();
        // v = L^-1 k by forward substitution on the lower factor
        let l = chol.l_dirty();
        let n = k_star.len();
        let mut v = vec![0.0; n];
        let mut explained = 0.0;
        for i in 0..n {
            let mut s = k_star[i];
            for (j, vj) in v.iter().enumerate().take(i) {
                s -= l[(i, j)] * vj;
            }
            v[i] = s / l[(i, i)];
            explained += v[i] * v[i];
        }
        GpPosterior {
            mean,
            variance: (prior_variance - explained).max(0.0),
        }
    }

    pub fn predict(&self, gamma: &HyperParams) -> GpPosterior {
        let k: Vec<f64> = self.points.iter().map(|p| self.kernel.eval(gamma, p)).collect();
        self.predict_with(&k, self.kernel.eval(gamma, gamma))
    }
}

/// Posterior at `gamma` conditioned on `data`.
pub fn posterior(data: &RewardDataset, kernel: &ArdKernel, gamma: &HyperParams) -> Result<GpPosterior> {
    Ok(GaussianProcess::from_dataset(*kernel, data)?.predict(gamma))
}
