//! Autocorrelation, effective sample size and ESS per leapfrog step.

use std::fmt::Write as _;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::exec::Execution;
use crate::hmc::TransitionRecord;
use crate::objective::acceptance_rate;
use crate::{Error, Result};

fn centered(series: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let z: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = z.iter().map(|v| v * v).sum::<f64>() / n;
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::ZeroVariance);
    }
    Ok((z, c0))
}

/// Biased autocorrelations `rho_0, ..., rho_max_lag` by direct summation:
/// `rho_k = (1/n) sum_t z_t z_{t+k} / c_0`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() < 2 * max_lag || series.len() < 2 {
        return Err(Error::invalid(
            "max_lag",
            format!("series of length {} is too short for lag {max_lag}", series.len()),
        ));
    }
    let (z, c0) = centered(series)?;
    let n = z.len() as f64;
    Ok((0..=max_lag)
        .map(|k| z.iter().zip(&z[k..]).map(|(a, b)| a * b).sum::<f64>() / n / c0)
        .collect())
}

/// The same estimator for every lag `0..n`, via a zero-padded FFT.
pub fn autocorrelation_fft(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::invalid("series", "need at least two values"));
    }
    let (z, c0) = centered(series)?;
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = z
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let norm = size as f64 * n as f64 * c0;
    Ok(buf[..n].iter().map(|c| c.re / norm).collect())
}

/// Effective sample size of one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssEstimate {
    pub ess: f64,
    /// Number of lag pairs `(rho_2t, rho_2t+1)` included in the sum.
    pub pairs: usize,
    /// Set for constant series, which report `ess = 0`.
    pub degenerate: bool,
}

/// `R / (1 + 2 sum_k rho_k)` with the sum truncated by the initial monotone
/// positive sequence rule: pair sums `rho_2t + rho_2t+1` are added while they
/// stay positive and non-increasing, up to lag `R/2`. The estimate is capped
/// at `R`.
pub fn ess(series: &[f64]) -> Result<EssEstimate> {
    let r = series.len();
    if r < 10 {
        return Err(Error::invalid(
            "series",
            format!("ESS needs at least 10 values, got {r}"),
        ));
    }
    let rho = match autocorrelation_fft(series) {
        Ok(rho) => rho,
        Err(Error::ZeroVariance) => {
            return Ok(EssEstimate {
                ess: 0.0,
                pairs: 0,
                degenerate: true,
            })
        }
        Err(e) => return Err(e),
    };
    let max_lag = r / 2;
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut pairs = 0;
    while 2 * pairs < max_lag {
        let g = rho[2 * pairs] + rho[2 * pairs + 1];
        if !(g > 0.0) || g > prev {
            break;
        }
        sum += g;
        prev = g;
        pairs += 1;
    }
    // 1 + 2 sum_{k>=1} rho_k == -1 + 2 sum_t (rho_2t + rho_2t+1)
    let tau = (2.0 * sum - 1.0).max(1.0);
    Ok(EssEstimate {
        ess: r as f64 / tau,
        pairs,
        degenerate: false,
    })
}

/// Median; the midpoint of the two central values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        Summary {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            median: median(values),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Per-dimension ESS with min/median/max summaries, raw and per leapfrog step.
///
/// ESS/L is the ESS divided by the total number of leapfrog steps spent
/// producing the samples (not per sample).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub ess: Vec<f64>,
    pub degenerate_dims: Vec<usize>,
    pub ess_summary: Summary,
    pub total_leapfrog: u64,
    pub ess_per_leapfrog: Summary,
    /// `None` when no transition records were supplied.
    pub acceptance_rate: Option<f64>,
    pub samples: usize,
}

impl DiagnosticsReport {
    pub fn from_ess(
        ess: Vec<f64>,
        degenerate_dims: Vec<usize>,
        samples: usize,
        total_leapfrog: u64,
        acceptance_rate: Option<f64>,
    ) -> Self {
        let ess_summary = Summary::of(&ess);
        let per = |v: f64| v / total_leapfrog as f64;
        DiagnosticsReport {
            ess_per_leapfrog: Summary {
                min: per(ess_summary.min),
                median: per(ess_summary.median),
                max: per(ess_summary.max),
            },
            ess,
            degenerate_dims,
            ess_summary,
            total_leapfrog,
            acceptance_rate,
            samples,
        }
    }

    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "samples={}", self.samples);
        let _ = writeln!(out, "dims={}", self.ess.len());
        let _ = writeln!(out, "total_leapfrog={}", self.total_leapfrog);
        let _ = writeln!(out, "acceptance_rate={}", fmt_opt(self.acceptance_rate));
        let _ = writeln!(out, "ess_min={}", self.ess_summary.min);
        let _ = writeln!(out, "ess_median={}", self.ess_summary.median);
        let _ = writeln!(out, "ess_max={}", self.ess_summary.max);
        let _ = writeln!(out, "ess_per_leapfrog_min={}", self.ess_per_leapfrog.min);
        let _ = writeln!(out, "ess_per_leapfrog_median={}", self.ess_per_leapfrog.median);
        let _ = writeln!(out, "ess_per_leapfrog_max={}", self.ess_per_leapfrog.max);
        let degenerate: Vec<String> = self.degenerate_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "degenerate_dims={}", degenerate.join(" "));
        let ess: Vec<String> = self.ess.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "ess={}", ess.join(" "));
        out
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Column-wise ESS of `samples` (rows are draws).
pub fn report_with(
    samples: &[Vec<f64>],
    total_leapfrog: u64,
    records: &[TransitionRecord],
    exec: Execution,
) -> Result<DiagnosticsReport> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "no samples"));
    }
    let dim = samples[0].len();
    let estimates = exec.map_range(dim, |j| {
        let column: Vec<f64> = samples.iter().map(|row| row[j]).collect();
        ess(&column)
    });
    let mut values = Vec::with_capacity(dim);
    let mut degenerate = Vec::new();
    for (j, e) in estimates.into_iter().enumerate() {
        let e = e?;
        if e.degenerate {
            degenerate.push(j);
        }
        values.push(e.ess);
    }
    let acc = if records.is_empty() {
        None
    } else {
        Some(acceptance_rate(records)?)
    };
    Ok(DiagnosticsReport::from_ess(
        values,
        degenerate,
        samples.len(),
        total_leapfrog,
        acc,
    ))
}

pub fn report(samples: &[Vec<f64>], total_leapfrog: u64, records: &[TransitionRecord]) -> Result<DiagnosticsReport> {
    report_with(samples, total_leapfrog, records, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, 0);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn alternating_series_is_perfectly_anticorrelated() {
        let x: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let rho = autocorrelation(&x, 3).unwrap();
        assert!((rho[0] - 1.0).abs() < 1e-12);
        assert!((rho[1] + 0.99).abs() < 1e-12); // biased estimator: (n-1)/n
                                                // antithetic: the estimate is capped at R
        assert_eq!(ess(&x).unwrap().ess, 100.0);
    }

    #[test]
    fn fft_and_direct_agree() {
        let x = noise(513, 2);
        let direct = autocorrelation(&x, 200).unwrap();
        let fft = autocorrelation_fft(&x).unwrap();
        for k in 0..=200 {
            assert!((direct[k] - fft[k]).abs() < 1e-12, "lag {k}");
        }
    }

    #[test]
    fn zero_variance_handling() {
        assert!(matches!(autocorrelation(&[2.0; 20], 3), Err(Error::ZeroVariance)));
        let e = ess(&[2.0; 20]).unwrap();
        assert!(e.degenerate && e.ess == 0.0);
        assert!(ess(&[1.0, 2.0]).is_err());
        assert!(autocorrelation(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[1000.0, 3000.0]), 2000.0);
    }

    #[test]
    fn report_summaries() {
        let r = DiagnosticsReport::from_ess(vec![1000.0, 3000.0], vec![], 5000, 10_000, Some(0.9));
        assert_eq!(r.ess_per_leapfrog.min, 0.1);
        assert_eq!(r.ess_per_leapfrog.median, 0.2);
        assert_eq!(r.ess_per_leapfrog.max, 0.3);
        let doubled = DiagnosticsReport::from_ess(vec![1000.0, 3000.0], vec![], 5000, 20_000, Some(0.9));
        assert_eq!(doubled.ess_per_leapfrog.min, 0.05);
        assert_eq!(doubled.ess_per_leapfrog.max, 0.15);
        assert!(r.to_key_value().contains("ess_per_leapfrog_median=0.2\n"));
    }

    #[test]
    fn identical_columns_have_equal_summaries() {
        let x = noise(400, 5);
        let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![*v, *v, *v]).collect();
        let r = report(&rows, 1000, &[]).unwrap();
        assert_eq!(r.ess_summary.min, r.ess_summary.max);
        assert_eq!(r.ess_summary.min, r.ess_summary.median);
        assert_eq!(r.ess[0], ess(&x).unwrap().ess);
    }
}
