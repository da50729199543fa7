use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{ExperimentConfig, SamplerMode};
use crate::diagnostics::{report, DiagnosticsReport};
use crate::models::{support_of, TargetModel};
use crate::rng::{self, STREAM_INIT};
use crate::sampler::{run_adaptive, run_fixed, AdaptationTrace, SamplingLedger};
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "i,eps,L,reward,p_i,s,adapted";
pub const SUMMARY_HEADER: &str = "chain,seed,ess_min,ess_median,ess_max,ess_per_leapfrog_min,ess_per_leapfrog_median,ess_per_leapfrog_max,acceptance_rate,sampling_leapfrog,total_leapfrog";

#[derive(Debug, Clone)]
pub struct ChainSummary {
    pub chain: usize,
    pub seed: u64,
    pub report: DiagnosticsReport,
    /// Leapfrog steps across burn-in and sampling.
    pub total_leapfrog: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub out_dir: PathBuf,
    pub chains: Vec<ChainSummary>,
}

struct ChainOutput {
    samples: Vec<Vec<f64>>,
    trace: Option<AdaptationTrace>,
    ledger: SamplingLedger,
}

/// Runs every chain and writes samples, traces, diagnostics and `summary.csv` under `out_dir`.
///
/// `base_dir` anchors relative data paths in the config.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path, out_dir: &Path) -> Result<ExperimentOutcome> {
    config.validate()?;
    let model = config.build_model(base_dir)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let echo = config.to_toml();
    write_file(&out_dir.join("config.toml"), &echo)?;

    let run_chain = |c: usize| -> Result<ChainSummary> {
        let seed = rng::chain_seed(config.seed, c);
        let init = initial_position(model.as_ref(), config.sampler.init_jitter, seed);
        let out = sample_chain(config, model.as_ref(), &init, seed)?;
        let rep = report(&out.samples, out.ledger.sampling_leapfrog, &out.ledger.records)?;
        write_file(
            &out_dir.join(format!("chain_{c}_samples.csv")),
            &samples_csv(&out.samples),
        )?;
        write_file(
            &out_dir.join(format!("chain_{c}_trace.csv")),
            &trace_csv(&echo, out.trace.as_ref()),
        )?;
        let mut kv = format!("chain={c}\nseed={seed}\n");
        kv.push_str(&rep.to_key_value());
        writeln!(kv, "total_leapfrog_all={}", out.ledger.total_leapfrog).unwrap();
        write_file(&out_dir.join(format!("chain_{c}_diagnostics.txt")), &kv)?;
        Ok(ChainSummary {
            chain: c,
            seed,
            report: rep,
            total_leapfrog: out.ledger.total_leapfrog,
        })
    };

    let results = run_chains(config.chains, config.workers, &run_chain)?;
    let chains = results.into_iter().collect::<Result<Vec<_>>>()?;
    write_file(&out_dir.join("summary.csv"), &summary_csv(&chains))?;
    Ok(ExperimentOutcome {
        out_dir: out_dir.to_path_buf(),
        chains,
    })
}

#[cfg(feature = "parallel")]
fn run_chains<F>(chains: usize, workers: usize, f: &F) -> Result<Vec<Result<ChainSummary>>>
where
    F: Fn(usize) -> Result<ChainSummary> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    Ok(pool.install(|| (0..chains).into_par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_chains<F>(chains: usize, _workers: usize, f: &F) -> Result<Vec<Result<ChainSummary>>>
where
    F: Fn(usize) -> Result<ChainSummary> + Sync,
{
    Ok((0..chains).map(f).collect())
}

fn initial_position(model: &dyn TargetModel, jitter: f64, seed: u64) -> Vec<f64> {
    let mut x = model.initial_position();
    if jitter > 0.0 {
        let mut r = rng::stream(seed, STREAM_INIT);
        for xi in &mut x {
            let z: f64 = r.sample(StandardNormal);
            *xi += jitter * z;
        }
        let support = support_of(model);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = xi.clamp(support.lower()[i], support.upper()[i]);
        }
    }
    x
}

fn sample_chain(config: &ExperimentConfig, model: &dyn TargetModel, init: &[f64], seed: u64) -> Result<ChainOutput> {
    let s = &config.sampler;
    Ok(match s.mode {
        SamplerMode::Adaptive => {
            let run = run_adaptive(model, init, &config.adaptive_config(seed)?)?;
            ChainOutput {
                samples: run.samples,
                trace: Some(run.trace),
                ledger: run.ledger,
            }
        }
        SamplerMode::Fixed => {
            let run = run_fixed(
                model,
                init,
                config.fixed_gamma()?,
                s.burnin,
                s.samples,
                seed,
                config.trajectory(),
            )?;
            ChainOutput {
                samples: run.samples,
                trace: None,
                ledger: run.ledger,
            }
        }
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn samples_csv(samples: &[Vec<f64>]) -> String {
    let dim = samples.first().map_or(0, Vec::len);
    let mut out = (0..dim).map(|j| format!("dim_{j}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in samples {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn trace_csv(echo: &str, trace: Option<&AdaptationTrace>) -> String {
    let mut out = String::new();
    for line in echo.lines() {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "# burnin_rounds={}", trace.map_or(0, |t| t.burnin_rounds())).unwrap();
    writeln!(out, "{TRACE_HEADER}").unwrap();
    if let Some(t) = trace {
        for r in &t.rounds {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.round,
                r.gamma.eps,
                r.gamma.steps,
                r.reward,
                r.p,
                r.s,
                u8::from(r.adapted)
            )
            .unwrap();
        }
    }
    out
}

fn summary_csv(chains: &[ChainSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for c in chains {
        let r = &c.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.chain,
            c.seed,
            r.ess_summary.min,
            r.ess_summary.median,
            r.ess_summary.max,
            r.ess_per_leapfrog.min,
            r.ess_per_leapfrog.median,
            r.ess_per_leapfrog.max,
            crate::diagnostics::fmt_opt(r.acceptance_rate),
            r.total_leapfrog,
            c.total_leapfrog
        )
        .unwrap();
    }
    out
}
