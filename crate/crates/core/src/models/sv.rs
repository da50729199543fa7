use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{softplus, TargetModel};
use crate::{rng, Error, Result};

/// Stochastic volatility model with AR(1) log-volatility:
///
/// ```text
/// y_t = e_t * beta * exp(x_t / 2),      e_t ~ N(0, 1)
/// x_{t+1} = phi * x_t + n_{t+1},        n_t ~ N(0, sigma^2)
/// x_1 ~ N(0, sigma^2 / (1 - phi^2))
/// ```
///
/// with `p(beta) ∝ 1/beta`, `(phi + 1)/2 ~ Beta(a, b)` and
/// `sigma^2 ~ Scale-inv-chi^2(nu, s^2)`.
///
/// The sampled state is `[x_1, ..., x_T, log beta, g, a]` with
/// `sigma = exp(g)` and `phi = tanh(a)`. The `1/beta` prior is exactly the
/// Jacobian of the log transform, so `log beta` has a flat prior. The
/// log-density includes `log |d sigma / d g| + log |d phi / d a| = g + log(1 - phi^2)`.
/// Dropped constants: `-T/2 ln(2 pi)` in the observation and transition
/// densities, and the normalizers of the Beta and inverse-chi^2 priors.
#[derive(Debug, Clone)]
pub struct StochasticVolatilityModel {
    y2: Vec<f64>,
    phi_prior: (f64, f64),
    sigma2_prior: (f64, f64),
}

/// Natural-scale parameters of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvParameters {
    pub beta: f64,
    pub phi: f64,
    pub sigma: f64,
}

impl StochasticVolatilityModel {
    /// Uses the `Beta(20, 1.5)` and `Scale-inv-chi^2(10, 0.05)` priors.
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        Self::with_priors(observations, (20.0, 1.5), (10.0, 0.05))
    }

    pub fn with_priors(observations: Vec<f64>, phi_prior: (f64, f64), sigma2_prior: (f64, f64)) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::invalid("observations", "need at least one observation"));
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observations", "must be finite"));
        }
        if !(phi_prior.0 > 0.0 && phi_prior.1 > 0.0) {
            return Err(Error::invalid("phi_prior", "Beta shape parameters must be positive"));
        }
        if !(sigma2_prior.0 > 0.0 && sigma2_prior.1 > 0.0) {
            return Err(Error::invalid("sigma2_prior", "nu and s^2 must be positive"));
        }
        Ok(StochasticVolatilityModel {
            y2: observations.iter().map(|y| y * y).collect(),
            phi_prior,
            sigma2_prior,
        })
    }

    pub fn len(&self) -> usize {
        self.y2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y2.is_empty()
    }

    /// Maps an unconstrained state to `(beta, phi, sigma)`.
    pub fn parameters(&self, theta: &[f64]) -> SvParameters {
        let t = self.len();
        SvParameters {
            beta: theta[t].exp(),
            phi: theta[t + 2].tanh(),
            sigma: theta[t + 1].exp(),
        }
    }

    /// Inverse of [`parameters`](Self::parameters) together with the latent path.
    pub fn to_unconstrained(&self, latent: &[f64], p: SvParameters) -> Result<Vec<f64>> {
        if latent.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: latent.len(),
            });
        }
        if p.phi.abs() >= 1.0 {
            return Err(Error::NonStationary { phi: p.phi });
        }
        if !(p.beta > 0.0 && p.sigma > 0.0) {
            return Err(Error::invalid("parameters", "beta and sigma must be positive"));
        }
        let mut theta = latent.to_vec();
        theta.extend([p.beta.ln(), p.sigma.ln(), p.phi.atanh()]);
        Ok(theta)
    }

    /// Log-density without the `g + log(1 - phi^2)` change-of-variables term.
    pub fn log_density_excluding_jacobian(&self, theta: &[f64]) -> f64 {
        let (a, g) = (theta[self.len() + 2], theta[self.len() + 1]);
        self.eval(theta, None) - (g + log_one_minus_tanh_sq(a))
    }

    fn eval(&self, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let t = self.len();
        let x = &theta[..t];
        let (b, g, a) = (theta[t], theta[t + 1], theta[t + 2]);
        let phi = a.tanh();
        let log_omp = log_one_minus_tanh_sq(a);
        let omp = log_omp.exp();
        let inv_s2 = (-2.0 * g).exp();
        let (pa, pb) = self.phi_prior;
        let (nu, s2) = self.sigma2_prior;

        let mut lp = 0.0;
        let mut d_b = -(t as f64);
        let mut d_g = 0.0;
        // derivative w.r.t. phi, already multiplied by d phi / d a = 1 - phi^2
        let mut d_phi_omp = 0.0;

        let mut gx = grad;
        // observations
        for (i, (xi, yi2)) in x.iter().zip(&self.y2).enumerate() {
            let e = yi2 * (-2.0 * b - xi).exp();
            lp += -b - 0.5 * xi - 0.5 * e;
            d_b += e;
            if let Some(gr) = gx.as_deref_mut() {
                gr[i] = -0.5 + 0.5 * e;
            }
        }
        // stationary start
        lp += -g + 0.5 * log_omp - 0.5 * x[0] * x[0] * omp * inv_s2;
        d_g += -1.0 + x[0] * x[0] * omp * inv_s2;
        d_phi_omp += -phi + x[0] * x[0] * phi * omp * inv_s2;
        if let Some(gr) = gx.as_deref_mut() {
            gr[0] -= x[0] * omp * inv_s2;
        }
        // AR(1) transitions
        for i in 1..t {
            let r = x[i] - phi * x[i - 1];
            lp += -g - 0.5 * r * r * inv_s2;
            d_g += -1.0 + r * r * inv_s2;
            d_phi_omp += omp * r * x[i - 1] * inv_s2;
            if let Some(gr) = gx.as_deref_mut() {
                gr[i] -= r * inv_s2;
                gr[i - 1] += phi * r * inv_s2;
            }
        }
        // priors: Beta on (phi+1)/2, scaled inverse-chi^2 on sigma^2 expressed in sigma
        let log1p_phi = LN_2 - softplus(-2.0 * a);
        let log1m_phi = LN_2 - softplus(2.0 * a);
        lp += (pa - 1.0) * log1p_phi + (pb - 1.0) * log1m_phi;
        d_phi_omp += (pa - 1.0) * (1.0 - phi) - (pb - 1.0) * (1.0 + phi);
        lp += -(nu + 2.0) * g - 0.5 * nu * s2 * inv_s2 + g;
        d_g += -(nu + 2.0) + nu * s2 * inv_s2 + 1.0;
        // change of variables
        lp += g + log_omp;
        d_g += 1.0;
        d_phi_omp += -2.0 * phi;

        if let Some(gr) = gx {
            gr[t] = d_b;
            gr[t + 1] = d_g;
            gr[t + 2] = d_phi_omp;
        }
        lp
    }
}

/// `log(1 - tanh(a)^2) = log sech(a)^2`, stable for large `|a|`.
fn log_one_minus_tanh_sq(a: f64) -> f64 {
    let a = a.abs();
    2.0 * (LN_2 - a - (-2.0 * a).exp().ln_1p())
}

impl TargetModel for StochasticVolatilityModel {
    fn dim(&self) -> usize {
        self.len() + 3
    }

    fn log_density(&self, theta: &[f64]) -> f64 {
        self.eval(theta, None)
    }

    fn log_density_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(theta, Some(grad))
    }

    /// Flat latent path, `beta` at the observation scale, `sigma = 0.2`, `phi = 0.9`.
    fn initial_position(&self) -> Vec<f64> {
        let t = self.len();
        let mean_sq = self.y2.iter().sum::<f64>() / t as f64;
        let log_beta = if mean_sq > 0.0 { 0.5 * mean_sq.ln() } else { 0.0 };
        let mut theta = vec![0.0; t];
        theta.extend([log_beta, 0.2f64.ln(), 0.9f64.atanh()]);
        theta
    }
}

/// Simulated observations together with the latent log-volatility path.
#[derive(Debug, Clone, PartialEq)]
pub struct SvData {
    pub observations: Vec<f64>,
    pub latent: Vec<f64>,
}

pub fn simulate_sv_data(len: usize, beta: f64, phi: f64, sigma: f64, seed: u64) -> Result<SvData> {
    if !(phi.abs() < 1.0) {
        return Err(Error::NonStationary { phi });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be positive"));
    }
    if len == 0 {
        return Err(Error::invalid("len", "must be positive"));
    }
    let mut rng = rng::stream(seed, 0);
    let mut latent = Vec::with_capacity(len);
    let mut x = sigma / (1.0 - phi * phi).sqrt() * rng.sample::<f64, _>(StandardNormal);
    latent.push(x);
    for _ in 1..len {
        x = phi * x + sigma * rng.sample::<f64, _>(StandardNormal);
        latent.push(x);
    }
    let observations = latent
        .iter()
        .map(|x| rng.sample::<f64, _>(StandardNormal) * beta * (0.5 * x).exp())
        .collect();
    Ok(SvData { observations, latent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_log_joint(y: &[f64], theta: &[f64]) -> f64 {
        // straightforward transcription in natural parameters, same dropped constants
        let t = y.len();
        let beta = theta[t].exp();
        let sigma = theta[t + 1].exp();
        let phi = theta[t + 2].tanh();
        let s2 = sigma * sigma;
        let x = &theta[..t];
        let mut lp = 0.0;
        for i in 0..t {
            let var = beta * beta * x[i].exp();
            lp += -0.5 * var.ln() - 0.5 * y[i] * y[i] / var;
        }
        let v1 = s2 / (1.0 - phi * phi);
        lp += -0.5 * v1.ln() - 0.5 * x[0] * x[0] / v1;
        for i in 1..t {
            let r = x[i] - phi * x[i - 1];
            lp += -0.5 * s2.ln() - 0.5 * r * r / s2;
        }
        lp += 19.0 * (1.0 + phi).ln() + 0.5 * (1.0 - phi).ln();
        // Scale-inv-chi^2(10, 0.05) on sigma^2 times |d sigma^2 / d sigma| = 2 sigma
        lp += -6.0 * s2.ln() - 0.25 / s2 + sigma.ln();
        // Jacobians of sigma = exp(g), phi = tanh(a)
        lp += sigma.ln() + (1.0 - phi * phi).ln();
        lp
    }

    #[test]
    fn matches_direct_transcription() {
        let data = simulate_sv_data(25, 0.65, 0.98, 0.15, 9).unwrap();
        let m = StochasticVolatilityModel::new(data.observations.clone()).unwrap();
        let theta = m
            .to_unconstrained(
                &data.latent,
                SvParameters {
                    beta: 0.7,
                    phi: 0.9,
                    sigma: 0.2,
                },
            )
            .unwrap();
        let want = direct_log_joint(&data.observations, &theta);
        assert!((m.log_density(&theta) - want).abs() < 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn jacobian_difference_is_exact() {
        let data = simulate_sv_data(10, 0.65, 0.9, 0.2, 1).unwrap();
        let m = StochasticVolatilityModel::new(data.observations).unwrap();
        let mut theta = data.latent.clone();
        theta.extend([0.1, -1.3, 1.7]);
        let diff = m.log_density(&theta) - m.log_density_excluding_jacobian(&theta);
        let want = -1.3 + (1.0 - 1.7f64.tanh().powi(2)).ln();
        assert!((diff - want).abs() < 1e-12);
    }

    #[test]
    fn transformed_parameters_respect_constraints() {
        let m = StochasticVolatilityModel::new(vec![0.1, -0.2]).unwrap();
        for a in [-30.0, -3.0, 0.0, 2.5, 30.0] {
            for g in [-20.0, 0.0, 5.0] {
                let p = m.parameters(&[0.0, 0.0, 0.3, g, a]);
                assert!(p.phi.abs() <= 1.0 && p.sigma > 0.0);
                assert!(m.log_density(&[0.0, 0.0, 0.3, g, a]).is_finite() || a.abs() > 20.0);
            }
        }
        assert!(log_one_minus_tanh_sq(400.0).is_finite());
    }

    #[test]
    fn simulation_contracts() {
        assert!(matches!(
            simulate_sv_data(10, 1.0, 1.0, 0.1, 0),
            Err(Error::NonStationary { .. })
        ));
        assert!(simulate_sv_data(10, 1.0, 0.5, 0.0, 0).is_err());
        let a = simulate_sv_data(50, 0.65, 0.98, 0.15, 3).unwrap();
        assert_eq!(a, simulate_sv_data(50, 0.65, 0.98, 0.15, 3).unwrap());
        // degenerate volatility: x ~ 0 and y = e_t * beta
        let d = simulate_sv_data(100, 2.0, 0.0, 1e-12, 5).unwrap();
        assert!(d.latent.iter().all(|x| x.abs() < 1e-10));
    }
}
