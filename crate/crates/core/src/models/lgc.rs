use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::TargetModel;
use crate::{rng, Error, Result};

/// Hyperparameters of the latent Gaussian field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgcParams {
    pub mu: f64,
    pub sigma2: f64,
    pub beta: f64,
}

impl LgcParams {
    /// Values commonly used with the 64x64 synthetic benchmark.
    pub fn standard() -> Self {
        let sigma2 = 1.91;
        LgcParams {
            mu: 126f64.ln() - sigma2 / 2.0,
            sigma2,
            beta: 1.0 / 33.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid("sigma2", "must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", "must be positive"));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        Ok(())
    }
}

/// Covariance of the latent field on a `d x d` grid: cell `(i, j)` has index
/// `i * d + j` and `Sigma = sigma2 * exp(-dist / (beta * d))`.
pub fn lgc_covariance(d: usize, params: &LgcParams) -> DMatrix<f64> {
    let n = d * d;
    let scale = params.beta * d as f64;
    DMatrix::from_fn(n, n, |a, b| {
        let (i, j) = ((a / d) as f64, (a % d) as f64);
        let (k, l) = ((b / d) as f64, (b % d) as f64);
        let dist = ((i - k).powi(2) + (j - l).powi(2)).sqrt();
        params.sigma2 * (-dist / scale).exp()
    })
}

fn factor(d: usize, params: &LgcParams) -> Result<Cholesky<f64, Dyn>> {
    lgc_covariance(d, params).cholesky().ok_or_else(|| Error::Singular {
        context: format!(
            "LGC covariance on a {d}x{d} grid with sigma2={}, beta={}",
            params.sigma2, params.beta
        ),
    })
}

/// Log-Gaussian Cox process on a regular `d x d` grid with fixed hyperparameters.
///
/// Counts are Poisson with mean `s * exp(x_ij)`, `s = 1/d^2`. The state is
/// the latent field `x` (length `d^2`). The log-density is
/// `sum_ij (y_ij x_ij - s exp(x_ij)) - 0.5 (x - mu)^T Sigma^-1 (x - mu)`;
/// `log y_ij!` and the Gaussian normalizer are dropped. The Cholesky factor of
/// `Sigma` is computed once at construction.
#[derive(Debug, Clone)]
pub struct LogGaussianCoxModel {
    d: usize,
    counts: Vec<f64>,
    params: LgcParams,
    chol: Cholesky<f64, Dyn>,
    cell_scale: f64,
}

impl LogGaussianCoxModel {
    pub fn new(d: usize, counts: Vec<f64>, params: LgcParams) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("d", "grid side must be positive"));
        }
        if counts.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: counts.len(),
            });
        }
        if counts.iter().any(|&c| !(c >= 0.0) || c.fract() != 0.0) {
            return Err(Error::invalid("counts", "must be nonnegative integers"));
        }
        params.validate()?;
        let chol = factor(d, &params)?;
        Ok(LogGaussianCoxModel {
            d,
            counts,
            params,
            chol,
            cell_scale: 1.0 / (d * d) as f64,
        })
    }

    pub fn grid_side(&self) -> usize {
        self.d
    }

    pub fn params(&self) -> &LgcParams {
        &self.params
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Poisson mean multiplier `s = 1/d^2`.
    pub fn cell_scale(&self) -> f64 {
        self.cell_scale
    }

    fn centered(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().map(|v| v - self.params.mu))
    }

    fn likelihood(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.counts)
            .map(|(xi, yi)| yi * xi - self.cell_scale * xi.exp())
            .sum()
    }
}

impl TargetModel for LogGaussianCoxModel {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let mut w = self.centered(x);
        self.chol.l_dirty().solve_lower_triangular_mut(&mut w);
        self.likelihood(x) - 0.5 * w.norm_squared()
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let z = self.centered(x);
        let prec_z = self.chol.solve(&z);
        for (((g, xi), yi), pz) in grad.iter_mut().zip(x).zip(&self.counts).zip(prec_z.iter()) {
            *g = yi - self.cell_scale * xi.exp() - pz;
        }
        self.likelihood(x) - 0.5 * z.dot(&prec_z)
    }

    fn initial_position(&self) -> Vec<f64> {
        vec![self.params.mu; self.dim()]
    }
}

/// One draw from the generative model.
#[derive(Debug, Clone, PartialEq)]
pub struct LgcData {
    pub counts: Vec<f64>,
    pub latent: Vec<f64>,
}

/// Draws `x ~ N(mu 1, Sigma)` on a `d x d` grid and `y_ij ~ Poisson(exp(x_ij) / d^2)`.
pub fn simulate_lgc_data(d: usize, params: &LgcParams, seed: u64) -> Result<LgcData> {
    if d < 2 {
        return Err(Error::invalid("d", "grid side must be at least 2"));
    }
    params.validate()?;
    let chol = factor(d, params)?;
    let n = d * d;
    let mut rng = rng::stream(seed, 0);
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let latent: Vec<f64> = (chol.l() * z).iter().map(|v| v + params.mu).collect();
    let s = 1.0 / n as f64;
    let counts = latent
        .iter()
        .map(|x| {
            let rate = s * x.exp();
            if rate > 0.0 && rate.is_finite() {
                Poisson::new(rate)
                    .map(|p| rng.sample(p))
                    .map_err(|e| Error::invalid("rate", e.to_string()))
            } else if rate == 0.0 {
                Ok(0.0)
            } else {
                Err(Error::invalid("rate", format!("Poisson mean {rate} is not finite")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LgcData { counts, latent })
}
