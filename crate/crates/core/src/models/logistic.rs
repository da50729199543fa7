use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{read_matrix_csv, read_vector_csv, sigmoid, softplus, TargetModel};
use crate::{rng, Error, Result};

/// Bayesian logistic regression with independent `N(0, sigma^2)` priors on
/// the bias and every coefficient.
///
/// State layout is `[beta_0, beta_1, ..., beta_D]`. The log-density is
/// `-sum_i log(1 + exp(-y_i (beta_0 + x_i . beta))) - |beta_0, beta|^2 / (2 sigma^2)`;
/// the Gaussian prior normalizers are dropped.
#[derive(Debug, Clone)]
pub struct LogisticRegressionModel {
    /// Row-major `N x D`.
    design: Vec<f64>,
    labels: Vec<f64>,
    n: usize,
    d: usize,
    prior_variance: f64,
}

impl LogisticRegressionModel {
    /// `labels` must be in `{-1, +1}`; `0` is accepted and mapped to `-1`.
    pub fn new(design: &DMatrix<f64>, labels: &[f64], prior_variance: f64) -> Result<Self> {
        let (n, d) = design.shape();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        if !(prior_variance > 0.0 && prior_variance.is_finite()) {
            return Err(Error::invalid("prior_variance", "must be positive and finite"));
        }
        let labels = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| match y {
                1.0 => Ok(1.0),
                y if y == -1.0 || y == 0.0 => Ok(-1.0),
                _ => Err(Error::invalid(
                    "labels",
                    format!("label {i} is {y}, expected -1/+1 or 0/1"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(n * d);
        for i in 0..n {
            rows.extend(design.row(i).iter().copied());
        }
        Ok(LogisticRegressionModel {
            design: rows,
            labels,
            n,
            d,
            prior_variance,
        })
    }

    /// Loads the design matrix and labels from header-row CSV files.
    pub fn from_csv(design: &Path, labels: &Path, prior_variance: f64) -> Result<Self> {
        let x = read_matrix_csv(design)?;
        let y = read_vector_csv(labels)?;
        if y.len() != x.nrows() {
            return Err(Error::Data {
                path: labels.to_path_buf(),
                reason: format!("{} labels for {} design rows", y.len(), x.nrows()),
            });
        }
        Self::new(&x, &y, prior_variance).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => Error::Data {
                path: labels.to_path_buf(),
                reason,
            },
            e => e,
        })
    }

    /// Synthetic data: standard-normal features and true coefficients,
    /// labels drawn from the logistic likelihood.
    pub fn synthetic(n: usize, d: usize, prior_variance: f64, seed: u64) -> Result<Self> {
        let (x, y) = synthetic_data(n, d, seed);
        Self::new(&x, &y, prior_variance)
    }

    pub fn observations(&self) -> usize {
        self.n
    }

    pub fn features(&self) -> usize {
        self.d
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.design[i * self.d..(i + 1) * self.d]
    }

    fn linear(&self, i: usize, coef: &[f64]) -> f64 {
        coef[0] + self.row(i).iter().zip(&coef[1..]).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Design matrix and `{-1, +1}` labels for [`LogisticRegressionModel::synthetic`].
pub fn synthetic_data(n: usize, d: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = rng::stream(seed, 0);
    let truth: Vec<f64> = (0..=d).map(|_| rng.sample(StandardNormal)).collect();
    let x = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y = (0..n)
        .map(|i| {
            let eta = truth[0] + (0..d).map(|j| x[(i, j)] * truth[j + 1]).sum::<f64>();
            if rng.random::<f64>() < sigmoid(eta) {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    (x, y)
}

impl TargetModel for LogisticRegressionModel {
    fn dim(&self) -> usize {
        self.d + 1
    }

    fn log_density(&self, coef: &[f64]) -> f64 {
        let mut lik = 0.0;
        for i in 0..self.n {
            lik -= softplus(-self.labels[i] * self.linear(i, coef));
        }
        lik - coef.iter().map(|c| c * c).sum::<f64>() / (2.0 * self.prior_variance)
    }

    fn log_density_and_grad(&self, coef: &[f64], grad: &mut [f64]) -> f64 {
        for (g, c) in grad.iter_mut().zip(coef) {
            *g = -c / self.prior_variance;
        }
        let mut lik = 0.0;
        for i in 0..self.n {
            let margin = self.labels[i] * self.linear(i, coef);
            lik -= softplus(-margin);
            // d/d eta of -log(1 + exp(-y eta)) = y * sigmoid(-y eta)
            let w = self.labels[i] * sigmoid(-margin);
            grad[0] += w;
            for (g, xij) in grad[1..].iter_mut().zip(self.row(i)) {
                *g += w * xij;
            }
        }
        let lp = lik - coef.iter().map(|c| c * c).sum::<f64>() / (2.0 * self.prior_variance);
        lp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_give_minus_n_log_two() {
        let m = LogisticRegressionModel::synthetic(37, 4, 100.0, 1).unwrap();
        let lp = m.log_density(&[0.0; 5]);
        assert!((lp + 37.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_formula() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 0.0, -1.0]);
        let y = [1.0, -1.0, 1.0];
        let m = LogisticRegressionModel::new(&x, &y, 2.0).unwrap();
        let c = [0.1, -0.4, 0.7];
        let mut want = 0.0;
        for i in 0..3 {
            let eta = c[0] + x[(i, 0)] * c[1] + x[(i, 1)] * c[2];
            want -= (1.0 + (-y[i] * eta).exp()).ln();
        }
        want -= c[0] * c[0] / 4.0 + (c[1] * c[1] + c[2] * c[2]) / 4.0;
        assert!((m.log_density(&c) - want).abs() < 1e-12);
    }

    #[test]
    fn zero_one_labels_are_mapped() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let a = LogisticRegressionModel::new(&x, &[0.0, 1.0], 1.0).unwrap();
        let b = LogisticRegressionModel::new(&x, &[-1.0, 1.0], 1.0).unwrap();
        assert_eq!(a.log_density(&[0.2, 0.3]), b.log_density(&[0.2, 0.3]));
        assert!(LogisticRegressionModel::new(&x, &[2.0, 1.0], 1.0).is_err());
        assert!(LogisticRegressionModel::new(&x, &[1.0], 1.0).is_err());
    }
}
