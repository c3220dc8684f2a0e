use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SurrogateMethod};
use super::simulator::Evaluator;
use crate::designs::{design_class_size, latin_hypercube, sobol, tensor_grid, Design, DesignClass};
use crate::error::{Error, Result};
use crate::gp::{self, GpFitConfig, GpModel, KernelFamily};
use crate::polychaos::{build_basis, fit_projection, fit_regression, PceModel, TruncationScheme};
use crate::seeds;
use crate::validation::{
    gp_metric_intervals, report_from_predictions, MetricsReport, ReportMeta, SimulatorReference,
    ValidationOptions, ValidationSet,
};

/// Largest design the harness will build for one class.
const MAX_DESIGN_SIZE: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitSummary {
    Pce {
        terms: usize,
        condition_estimate: Option<f64>,
        warnings: Vec<String>,
    },
    Gp {
        lengths: Vec<f64>,
        mean_terms: Vec<Vec<u32>>,
        lambda_sq: f64,
        log_likelihood: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: SurrogateMethod,
    pub class: DesignClass,
    pub order: u32,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixCheck {
    pub class: DesignClass,
    pub sizes: Vec<usize>,
    pub nested: bool,
}

/// Everything a run produces apart from wall-clock timings, so that two
/// runs with the same configuration serialise identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: ExperimentConfig,
    /// Distinct simulator inputs evaluated for this run.
    pub simulator_calls: usize,
    pub validation_size: usize,
    pub prefix_checks: Vec<PrefixCheck>,
    pub reference: SimulatorReference,
    pub cells: Vec<CellResult>,
}

impl RunResult {
    pub fn all_cells_reported(&self) -> bool {
        self.cells.iter().all(|c| c.report.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub method: SurrogateMethod,
    pub class: DesignClass,
    pub order: u32,
    pub fit_secs: f64,
    pub validate_secs: f64,
}

/// Wall-clock and external-call accounting, kept apart from [`RunResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub total_secs: f64,
    pub simulator_secs: f64,
    pub external_invocations: usize,
    /// Points computed by the simulator rather than read from the cache.
    pub fresh_evaluations: usize,
    pub cells: Vec<CellTiming>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: RunResult,
    pub timing: RunTiming,
}

enum Fitted {
    Pce(PceModel),
    Gp(Box<GpModel>),
}

struct Cell {
    class: DesignClass,
    order: u32,
    method: SurrogateMethod,
    size: usize,
    fitted: std::result::Result<(Fitted, Vec<f64>), String>,
    fit_secs: f64,
}

fn class_label(class: DesignClass) -> String {
    format!("class{}", class.number())
}

fn design_size(n: usize, p: u32, class: DesignClass) -> Result<usize> {
    let size = design_class_size(n, p as usize, class);
    if size > MAX_DESIGN_SIZE {
        return Err(Error::DesignTooLarge {
            size,
            cap: MAX_DESIGN_SIZE as usize,
        });
    }
    Ok(size as usize)
}

/// Run every cell of the experiment.
///
/// Sobol classes share one sequence and take prefixes of it. Each distinct
/// point is evaluated once. Simulator failures abort the run; fit or
/// validation failures are recorded in the cell and the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_experiment_with_cache(config, &Evaluator::cache_dir_or(&config.output_dir.join("cache")))
}

pub fn run_experiment_with_cache(config: &ExperimentConfig, cache_dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    config.validate()?;
    let space = config.input_space()?;
    let n = space.dim();
    let master = config.seed;
    let mut evaluator = Evaluator::new(
        config.simulator.clone(),
        space,
        cache_dir,
        &config.output_dir.join("exchange"),
    )?;

    // Designs.
    let cells: Vec<(DesignClass, u32, SurrogateMethod)> = config.cells().collect();
    let sobol_seed = seeds::derive(master, "design/sobol");
    let mut sobol_max = 0;
    for &(class, p, _) in &cells {
        if class != DesignClass::TensorGrid {
            sobol_max = sobol_max.max(design_size(n, p, class)?);
        }
    }
    let base = if sobol_max > 0 {
        Some(sobol(sobol_max, n, sobol_seed)?)
    } else {
        None
    };
    let design_for = |class: DesignClass, p: u32| -> Result<Design> {
        match class {
            DesignClass::TensorGrid => tensor_grid(&vec![p as usize + 1; n]),
            _ => Ok(base
                .as_ref()
                .expect("Sobol base exists for Sobol classes")
                .prefix(design_size(n, p, class)?)),
        }
    };

    let mut prefix_checks = Vec::new();
    for class in [DesignClass::UniquelyDetermined, DesignClass::OverDetermined] {
        let mut sizes: Vec<usize> = cells
            .iter()
            .filter(|c| c.0 == class)
            .map(|c| design_size(n, c.1, class))
            .collect::<Result<_>>()?;
        sizes.sort();
        sizes.dedup();
        if sizes.is_empty() {
            continue;
        }
        // Regenerate each size on its own and compare with the shared prefix.
        let shared = base.as_ref().expect("Sobol base exists");
        let mut nested = true;
        for &m in &sizes {
            nested &= sobol(m, n, sobol_seed)?.as_flat() == shared.prefix(m).as_flat();
        }
        prefix_checks.push(PrefixCheck { class, sizes, nested });
    }

    let sim_started = Instant::now();
    let mut grid_orders: Vec<u32> = cells
        .iter()
        .filter(|c| c.0 == DesignClass::TensorGrid)
        .map(|c| c.1)
        .collect();
    grid_orders.sort();
    grid_orders.dedup();
    let vdesign = latin_hypercube(
        config.validation_size,
        n,
        seeds::derive(master, "design/validation"),
    )?;
    // Every point goes to the simulator in one batch; later lookups hit
    // the evaluator's cache.
    let mut all_rows: Vec<Vec<f64>> = Vec::new();
    if let Some(b) = &base {
        all_rows.extend(b.rows().map(<[f64]>::to_vec));
    }
    for &p in &grid_orders {
        all_rows.extend(design_for(DesignClass::TensorGrid, p)?.rows().map(<[f64]>::to_vec));
    }
    all_rows.extend(vdesign.rows().map(<[f64]>::to_vec));
    evaluator.evaluate(&Design::from_rows(all_rows, None)?)?;
    let vy = evaluator.evaluate(&vdesign)?;
    let simulator_secs = sim_started.elapsed().as_secs_f64();
    let vset = ValidationSet::new(vdesign, vy)?;

    // Fits and point predictions.
    let mut fitted_cells = Vec::with_capacity(cells.len());
    for &(class, order, method) in &cells {
        let t = Instant::now();
        let design = design_for(class, order)?;
        let y = evaluator.evaluate(&design)?;
        let fitted = fit_cell(config, method, class, order, &design, &y)
            .and_then(|f| {
                let preds = match &f {
                    Fitted::Pce(m) => m.predict_design(vset.design())?,
                    Fitted::Gp(m) => m.predict_design(vset.design()),
                };
                match preds.iter().position(|v| !v.is_finite()) {
                    Some(i) => Err(Error::Fit(format!("non-finite prediction at validation point {i}"))),
                    None => Ok((f, preds)),
                }
            })
            .map_err(|e| e.to_string());
        match &fitted {
            Ok(_) => log::info!("fitted {} {} p={order} (m={})", method.name(), class_label(class), design.len()),
            Err(e) => log::warn!("{} {} p={order} failed: {e}", method.name(), class_label(class)),
        }
        fitted_cells.push(Cell {
            class,
            order,
            method,
            size: design.len(),
            fitted,
            fit_secs: t.elapsed().as_secs_f64(),
        });
    }

    // The density grid covers the simulator outputs and every surrogate's
    // point predictions, so all point curves integrate to one.
    let extra: Vec<&[f64]> = fitted_cells
        .iter()
        .filter_map(|c| c.fitted.as_ref().ok().map(|(_, p)| p.as_slice()))
        .collect();
    let options = ValidationOptions {
        bootstrap_replicates: config.bootstrap_replicates,
        posterior_samples: config.posterior_samples,
        seed: seeds::derive(master, "validation/bootstrap"),
        ..Default::default()
    };
    let reference = SimulatorReference::with_extra_range(&vset, &options, &extra)?;

    let mut results = Vec::with_capacity(fitted_cells.len());
    let mut timings = Vec::with_capacity(fitted_cells.len());
    for cell in fitted_cells {
        let t = Instant::now();
        let posterior_seed = seeds::derive_indexed(
            master,
            &format!("posterior/{}/{}", cell.method.name(), class_label(cell.class)),
            cell.order as u64,
        );
        let meta = ReportMeta {
            surrogate: cell.method.name().into(),
            design_class: Some(cell.class.number()),
            design_size: Some(cell.size),
            order: Some(cell.order),
            seed: posterior_seed,
        };
        let (fit, report) = match cell.fitted {
            Err(e) => (None, Err(e)),
            Ok((Fitted::Pce(model), preds)) => (
                Some(FitSummary::Pce {
                    terms: model.basis().len(),
                    condition_estimate: model.diagnostics().condition_estimate,
                    warnings: model.diagnostics().warnings.clone(),
                }),
                report_from_predictions(&preds, &vset, &reference, meta).map_err(|e| e.to_string()),
            ),
            Ok((Fitted::Gp(model), _)) => {
                let opts = ValidationOptions {
                    seed: posterior_seed,
                    ..options
                };
                (
                    Some(FitSummary::Gp {
                        lengths: model.kernel().lengths().to_vec(),
                        mean_terms: model.mean_basis().terms().to_vec(),
                        lambda_sq: model.lambda_sq(),
                        log_likelihood: model.log_likelihood(),
                    }),
                    gp_metric_intervals(&model, &vset, &reference, &opts, meta).map_err(|e| e.to_string()),
                )
            }
        };
        let (report, error) = match report {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e)),
        };
        timings.push(CellTiming {
            method: cell.method,
            class: cell.class,
            order: cell.order,
            fit_secs: cell.fit_secs,
            validate_secs: t.elapsed().as_secs_f64(),
        });
        results.push(CellResult {
            method: cell.method,
            class: cell.class,
            order: cell.order,
            size: cell.size,
            fit,
            report,
            error,
        });
    }

    let result = RunResult {
        config: config.clone(),
        simulator_calls: evaluator.unique_points(),
        validation_size: vset.len(),
        prefix_checks,
        reference,
        cells: results,
    };
    let timing = RunTiming {
        total_secs: started.elapsed().as_secs_f64(),
        simulator_secs,
        external_invocations: evaluator.invocations(),
        fresh_evaluations: evaluator.fresh_evaluations(),
        cells: timings,
    };
    Ok(RunOutcome { result, timing })
}

fn fit_cell(
    config: &ExperimentConfig,
    method: SurrogateMethod,
    class: DesignClass,
    order: u32,
    design: &Design,
    y: &[f64],
) -> Result<Fitted> {
    let n = design.dim();
    match method {
        SurrogateMethod::PceReg => {
            let basis = build_basis(n, TruncationScheme::TotalOrder(order))?;
            Ok(Fitted::Pce(fit_regression(design, y, &basis)?))
        }
        SurrogateMethod::PceQuad => {
            let basis = build_basis(n, TruncationScheme::TensorProduct(order))?;
            Ok(Fitted::Pce(fit_projection(design, y, &basis)?))
        }
        SurrogateMethod::GpSe | SurrogateMethod::GpMatern => {
            let family = if method == SurrogateMethod::GpSe {
                KernelFamily::SquaredExponential
            } else {
                KernelFamily::Matern52
            };
            let mean_basis = gp::stepwise_mean_basis(design, y, 2)?;
            let fit_config = GpFitConfig {
                starts: config.gp_starts,
                seed: seeds::derive_indexed(
                    config.seed,
                    &format!("fit/{}/{}", method.name(), class_label(class)),
                    order as u64,
                ),
                ..Default::default()
            };
            Ok(Fitted::Gp(Box::new(gp::fit(design, y, family, &mean_basis, &fit_config)?)))
        }
    }
}

/// Files written next to the run result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFiles {
    pub run_result: PathBuf,
    pub timing: PathBuf,
    pub tables: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

/// Write `run_result.json`, `timing.json`, per-class metric tables, density
/// curves and SVG panels under `dir`.
pub fn write_run(outcome: &RunOutcome, dir: &Path) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir)?;
    let run_result = dir.join("run_result.json");
    std::fs::write(&run_result, serde_json::to_string_pretty(&outcome.result)? + "\n")?;
    let timing = dir.join("timing.json");
    std::fs::write(&timing, serde_json::to_string_pretty(&outcome.timing)? + "\n")?;
    let tables = super::tables::write_tables(&outcome.result, dir)?;
    let plots = super::plot::emit_plots(&outcome.result, &dir.join("plots"))?;
    Ok(WrittenFiles {
        run_result,
        timing,
        tables,
        plots,
    })
}
