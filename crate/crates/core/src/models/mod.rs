//! Target distributions on unconstrained coordinates.
//!
//! Every model exposes an unnormalized log-density and its analytic gradient.
//! Each model documents which additive constants it drops; only differences
//! of log-densities are meaningful.

mod data;
mod gaussian;
mod lgc;
mod logistic;
mod sv;

pub use data::{read_matrix_csv, read_vector_csv};
pub use gaussian::GaussianTarget;
pub use lgc::{lgc_covariance, simulate_lgc_data, LgcData, LgcParams, LogGaussianCoxModel};
pub use logistic::{synthetic_data as synthetic_logistic_data, LogisticRegressionModel};
pub use sv::{simulate_sv_data, StochasticVolatilityModel, SvData, SvParameters};

use crate::{Error, Result};

/// Half-width of the default compact support box.
pub const DEFAULT_SUPPORT_HALF_WIDTH: f64 = 1e6;

/// Per-coordinate closed intervals. Proposals outside are rejected outright.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SupportBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::invalid(
                "support_box",
                "every lower bound must be below its upper bound",
            ));
        }
        Ok(SupportBox { lower, upper })
    }

    /// `[-1e6, 1e6]` on every coordinate.
    pub fn default_for(dim: usize) -> Self {
        SupportBox {
            lower: vec![-DEFAULT_SUPPORT_HALF_WIDTH; dim],
            upper: vec![DEFAULT_SUPPORT_HALF_WIDTH; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lower.len()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// A differentiable log-density on `R^dim`.
///
/// Implementations must be pure functions of `x`, so one model can be shared
/// by many chains running on different threads.
pub trait TargetModel: Sync {
    fn dim(&self) -> usize;

    /// Unnormalized log-density. Callers guarantee `x.len() == dim()`.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Writes the gradient into `grad` and returns the log-density at `x`.
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Compact support. `None` means the default `[-1e6, 1e6]^dim` box.
    fn support_box(&self) -> Option<SupportBox> {
        None
    }

    /// A reasonable starting point for chains.
    fn initial_position(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

impl<T: TargetModel + ?Sized> TargetModel for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(x, grad)
    }
    fn support_box(&self) -> Option<SupportBox> {
        (**self).support_box()
    }
    fn initial_position(&self) -> Vec<f64> {
        (**self).initial_position()
    }
}

impl<T: TargetModel + ?Sized> TargetModel for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(x, grad)
    }
    fn support_box(&self) -> Option<SupportBox> {
        (**self).support_box()
    }
    fn initial_position(&self) -> Vec<f64> {
        (**self).initial_position()
    }
}

pub fn support_of<M: TargetModel + ?Sized>(model: &M) -> SupportBox {
    model
        .support_box()
        .unwrap_or_else(|| SupportBox::default_for(model.dim()))
}

fn check_point<M: TargetModel + ?Sized>(model: &M, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    Ok(())
}

/// Checked log-density evaluation.
pub fn log_density<M: TargetModel + ?Sized>(model: &M, x: &[f64]) -> Result<f64> {
    check_point(model, x)?;
    Ok(model.log_density(x))
}

/// Checked gradient evaluation.
pub fn grad_log_density<M: TargetModel + ?Sized>(model: &M, x: &[f64]) -> Result<Vec<f64>> {
    check_point(model, x)?;
    let mut g = vec![0.0; x.len()];
    model.log_density_and_grad(x, &mut g);
    Ok(g)
}

/// `log(1 + exp(z))` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + exp(-z))`.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
