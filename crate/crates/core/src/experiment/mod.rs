//! Batch experiment driver behind the `ahmc` binary.

mod compare;
mod config;
mod run;

pub use compare::{compare, ComparisonTable};
pub use config::{
    ExperimentConfig, LgcSpec, LogisticSpec, ModelSpec, SamplerMode, SamplerSpec, SvSpec, SyntheticLogistic,
    SyntheticSv,
};
pub use run::{run_experiment, ChainSummary, ExperimentOutcome, SUMMARY_HEADER, TRACE_HEADER};
