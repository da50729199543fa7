mod common;

use ahmc::bayes_opt::Schedules;
use ahmc::gp::SearchSpace;
use ahmc::hmc::{HyperParams, TrajectoryLength};
use ahmc::models::GaussianTarget;
use ahmc::sampler::{run_adaptive, run_fixed, AdaptiveRun, AdaptiveRunConfig, Phase};

const SEEDS: u64 = 20;

/// Cheap long runs: one transition per round, small grid.
fn long_run(seed: u64) -> AdaptiveRun {
    let space = SearchSpace::new((0.05, 1.5), (1, 5), 20).unwrap();
    let config = AdaptiveRunConfig {
        window: Some(1),
        ..AdaptiveRunConfig::new(space, HyperParams { eps: 0.5, steps: 3 }, 100, 1100, seed)
    };
    run_adaptive(&GaussianTarget::standard(1), &[0.0], &config).unwrap()
}

#[test]
fn adaptation_trace_contracts() {
    let runs: Vec<AdaptiveRun> = (0..SEEDS).map(long_run).collect();
    let k = Schedules::default().k;
    let space = SearchSpace::new((0.05, 1.5), (1, 5), 20).unwrap();

    let mut window_adapted = [0.0; 10];
    let mut window_p = [0.0; 10];
    for run in &runs {
        let rounds = &run.trace.rounds;
        assert_eq!(rounds.len(), 1200);
        assert_eq!(run.samples.len(), 1100);
        assert_eq!(run.trace.burnin_rounds(), 100);
        for (i, r) in rounds.iter().enumerate() {
            assert_eq!(r.round, i + 1);
            assert!(space.contains(&r.gamma));
            assert_eq!(r.phase, if i < 100 { Phase::Burnin } else { Phase::Sampling });
            if r.round <= k {
                assert_eq!(r.p, 1.0);
                assert!(r.adapted);
            }
            if i > 0 && !rounds[i - 1].adapted {
                assert_eq!(r.gamma, rounds[i - 1].gamma);
            }
        }

        // adapted rounds after k are independent Bernoulli(p_i)
        let tail = &rounds[k..];
        let expected: f64 = tail.iter().map(|r| r.p).sum();
        let sd = tail.iter().map(|r| r.p * (1.0 - r.p)).sum::<f64>().sqrt();
        let observed = tail.iter().filter(|r| r.adapted).count() as f64;
        assert!(
            (observed - expected).abs() <= 4.0 * sd,
            "{observed} vs {expected} +- {sd}"
        );

        for (w, chunk) in tail.chunks(100).enumerate().take(10) {
            window_adapted[w] += chunk.iter().filter(|r| r.adapted).count() as f64;
            window_p[w] += chunk.iter().map(|r| r.p).sum::<f64>();
        }
    }
    // diminishing adaptation, pooled over seeds
    for (a, p) in window_adapted.iter().zip(&window_p) {
        assert!(*a <= 1.5 * p, "adapted {a} vs expected {p}");
    }
}

#[test]
fn round_count_is_ceiling() {
    let model = GaussianTarget::standard(2);
    let space = SearchSpace::new((0.05, 1.0), (1, 5), 10).unwrap();
    for (burnin, n, m) in [(10, 25, 4), (0, 7, 3), (6, 6, 6), (3, 1, 10)] {
        let config = AdaptiveRunConfig {
            window: Some(m),
            ..AdaptiveRunConfig::new(space.clone(), HyperParams { eps: 0.1, steps: 2 }, burnin, n, 1)
        };
        assert_eq!(config.round_count(), (burnin + n).div_ceil(m));
        let run = run_adaptive(&model, &[0.0; 2], &config).unwrap();
        assert_eq!(run.trace.rounds.len(), (burnin + n).div_ceil(m));
        assert_eq!(run.samples.len(), n);
        assert_eq!(run.ledger.records.len(), n);
        let used: u64 = run.ledger.records.iter().map(|r| r.steps_used as u64).sum();
        assert_eq!(used, run.ledger.sampling_leapfrog);
    }
}

#[test]
fn disabled_adaptation_reduces_to_fixed() {
    let model = GaussianTarget::ill_conditioned(4, 20.0, 2).unwrap();
    let space = SearchSpace::new((0.01, 0.5), (1, 20), 50).unwrap();
    let gamma = HyperParams { eps: 0.13, steps: 7 };
    for trajectory in [TrajectoryLength::Randomized, TrajectoryLength::Fixed] {
        let config = AdaptiveRunConfig {
            adapt: false,
            trajectory,
            ..AdaptiveRunConfig::new(space.clone(), gamma, 200, 300, 99)
        };
        let a = run_adaptive(&model, &[0.5; 4], &config).unwrap();
        let f = run_fixed(&model, &[0.5; 4], gamma, 200, 300, 99, trajectory).unwrap();
        assert_eq!(a.samples, f.samples);
        assert_eq!(a.ledger, f.ledger);
        assert!(a.trace.rounds.iter().all(|r| r.gamma == gamma && !r.adapted));
    }
}

#[test]
fn fixed_run_moments() {
    let run = run_fixed(
        &GaussianTarget::standard(1),
        &[0.0],
        HyperParams { eps: 0.5, steps: 10 },
        1000,
        20_000,
        8,
        TrajectoryLength::Randomized,
    )
    .unwrap();
    let x: Vec<f64> = run.samples.iter().map(|s| s[0]).collect();
    let ess = ahmc::diagnostics::ess(&x).unwrap().ess;
    assert!(common::mean(&x).abs() <= 3.0 * (common::variance(&x) / ess).sqrt());
}
