use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::TargetModel;
use crate::{rng, Error, Result};

/// Multivariate normal target.
///
/// Drops `-0.5 * (dim * ln(2 pi) + ln det(cov))`; the log-density is
/// `-0.5 (x - mean)^T cov^-1 (x - mean)`.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    /// True when `precision` is diagonal, which skips the dense matvec.
    diagonal: bool,
}

impl GaussianTarget {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: covariance.nrows(),
            });
        }
        if n == 0 {
            return Err(Error::invalid("mean", "dimension must be positive"));
        }
        let asym = (&covariance - covariance.transpose()).abs().max();
        if asym > 1e-12 * covariance.abs().max().max(1.0) {
            return Err(Error::invalid("covariance", "must be symmetric"));
        }
        let chol = covariance.clone().cholesky().ok_or_else(|| Error::Singular {
            context: format!("Gaussian target covariance ({n}x{n})"),
        })?;
        let precision = chol.inverse();
        let precision = (&precision + precision.transpose()) * 0.5;
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || precision[(i, j)] == 0.0));
        Ok(GaussianTarget {
            mean: DVector::from_vec(mean),
            covariance,
            precision,
            diagonal,
        })
    }

    /// Zero mean, identity covariance.
    pub fn standard(dim: usize) -> Self {
        GaussianTarget {
            mean: DVector::zeros(dim),
            covariance: DMatrix::identity(dim, dim),
            precision: DMatrix::identity(dim, dim),
            diagonal: true,
        }
    }

    /// Zero-mean Gaussian with eigenvalues log-spaced over `[1/condition, 1]`
    /// and a random orthogonal eigenbasis (QR of a Gaussian matrix drawn from `seed`).
    pub fn ill_conditioned(dim: usize, condition: f64, seed: u64) -> Result<Self> {
        if dim == 0 || !(condition >= 1.0) {
            return Err(Error::invalid("condition", "need dim >= 1 and condition >= 1"));
        }
        let mut rng = rng::stream(seed, 0);
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let eig = DVector::from_fn(dim, |i, _| {
            if dim == 1 {
                1.0
            } else {
                condition.powf(-(i as f64) / (dim - 1) as f64)
            }
        });
        let cov = &q * DMatrix::from_diagonal(&eig) * q.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianTarget::new(vec![0.0; dim], cov)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    fn centered(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().zip(self.mean.iter()).map(|(a, m)| a - m))
    }
}

impl TargetModel for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let z = self.centered(x);
        if self.diagonal {
            -0.5 * z
                .iter()
                .enumerate()
                .map(|(i, v)| v * v * self.precision[(i, i)])
                .sum::<f64>()
        } else {
            -0.5 * z.dot(&(&self.precision * &z))
        }
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let z = self.centered(x);
        if self.diagonal {
            let mut lp = 0.0;
            for (i, (g, v)) in grad.iter_mut().zip(z.iter()).enumerate() {
                let pz = self.precision[(i, i)] * v;
                *g = -pz;
                lp -= 0.5 * v * pz;
            }
            lp
        } else {
            let pz = &self.precision * &z;
            for (g, v) in grad.iter_mut().zip(pz.iter()) {
                *g = -v;
            }
            -0.5 * z.dot(&pz)
        }
    }

    fn initial_position(&self) -> Vec<f64> {
        self.mean.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::grad_log_density;

    #[test]
    fn standard_normal_values() {
        let g = GaussianTarget::standard(1);
        assert_eq!(g.log_density(&[0.0]), 0.0);
        assert!((g.log_density(&[0.0]) - g.log_density(&[1.0]) - 0.5).abs() < 1e-15);
        let g2 = GaussianTarget::standard(2);
        assert_eq!(grad_log_density(&g2, &[1.0, -2.0]).unwrap(), vec![-1.0, 2.0]);
    }

    #[test]
    fn rejects_non_pd_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianTarget::new(vec![0.0, 0.0], cov),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn ill_conditioned_has_requested_spectrum() {
        let g = GaussianTarget::ill_conditioned(10, 100.0, 3).unwrap();
        let eig = g.covariance().clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        assert!((hi / lo - 100.0).abs() < 1e-6, "{}", hi / lo);
        assert!((hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dense_and_diagonal_paths_agree() {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let a = GaussianTarget::new(vec![1.0, -1.0], cov).unwrap();
        assert!(a.diagonal);
        let mut b = a.clone();
        b.diagonal = false;
        let x = [0.3, 0.7];
        let (mut ga, mut gb) = ([0.0; 2], [0.0; 2]);
        let la = a.log_density_and_grad(&x, &mut ga);
        let lb = b.log_density_and_grad(&x, &mut gb);
        assert!((la - lb).abs() < 1e-14 && (ga[0] - gb[0]).abs() < 1e-14 && (ga[1] - gb[1]).abs() < 1e-14);
        assert!((a.log_density(&x) - la).abs() < 1e-14);
    }
}
