//! Scoring surrogates against simulator runs on an independent design:
//! RMSE, moments, exceedance probabilities and kernel density estimates,
//! with bootstrap intervals on the simulator side and posterior-resampling
//! intervals for Gaussian processes.

mod bootstrap;
mod kde;
mod metrics;
mod report;

pub use bootstrap::{bootstrap_ci, IntervalEstimate, IntervalMethod};
pub use kde::{kde, kde_grid, linear_grid, silverman_bandwidth, trapezoid};
pub use metrics::{empirical_mean, empirical_sd, exceedance, percentile, rmse};
pub use report::{
    evaluate_surrogate, gp_metric_intervals, report_from_predictions, MetricsReport, PdfCurve,
    ReportMeta, SimulatorReference, ValidationOptions, ValidationSet,
};
