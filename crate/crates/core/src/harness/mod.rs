//! Experiment orchestration: configs, runs with their records, amplitude
//! bisection and the verification batteries.

mod config;
mod run;
mod sweep;
mod verify;

pub use config::{
    odd_random_coefficients, Deltas, Densities, ExperimentConfig, InitialData, System,
};
pub use run::{
    run_experiment, simulate, write_record, ExperimentRecord, RecordPaths, Series, Summary,
};
pub use sweep::{threshold_bisect, BisectReport, Class, HypothesisCheck, SweepRun};
pub use verify::{
    cubic_battery, flat_battery, kernel_decay_battery, kernel_symmetry_battery,
    operator_battery, verify_suite, Check, KernelFn, Level, VerifyReport,
};

use crate::timestepper::IntegrateError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("run aborted at step {step} (t = {t}): {message}")]
    Run { step: usize, t: f64, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl HarnessError {
    fn from_integrate(e: IntegrateError) -> Self {
        match e {
            IntegrateError::Hook { step, t, message } => HarnessError::Run { step, t, message },
            IntegrateError::Control(c) => HarnessError::Config(c.to_string()),
            IntegrateError::Initial(m) => HarnessError::Run {
                step: 0,
                t: 0.0,
                message: m,
            },
        }
    }
}
