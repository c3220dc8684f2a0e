//! Experiment harness: builds the designs of each class, evaluates the
//! simulator once per distinct point, fits every requested surrogate and
//! scores it on a Latin hypercube validation design.

mod config;
mod plot;
mod run;
mod simulator;
mod tables;

pub use config::{ExperimentConfig, SurrogateMethod, MAX_ORDER};
pub use plot::emit_plots;
pub use run::{
    run_experiment, run_experiment_with_cache, write_run, CellResult, CellTiming, FitSummary,
    PrefixCheck, RunOutcome, RunResult, RunTiming, WrittenFiles,
};
pub use simulator::{
    point_key, product_polynomial, quadratic_bowl, toy_simulator, Evaluator, ExternalSpec,
    SimulatorSpec, CACHE_DIR_ENV,
};
pub use tables::{write_tables, METRICS};
