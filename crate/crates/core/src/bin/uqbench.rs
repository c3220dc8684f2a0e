use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uqbench_core::bench::{
    run_experiment, write_run, Evaluator, ExperimentConfig, SimulatorSpec, SurrogateMethod,
};
use uqbench_core::designs::{latin_hypercube, sobol, tensor_grid, Design};
use uqbench_core::domain::InputSpace;
use uqbench_core::gp::{self, GpFitConfig, KernelFamily};
use uqbench_core::io::{fmt17, read_design, read_outputs, write_design, write_outputs};
use uqbench_core::polychaos::{build_basis, fit_projection, fit_regression, TruncationScheme};
use uqbench_core::surrogate::Surrogate;
use uqbench_core::validation::{
    gp_metric_intervals, report_from_predictions, ReportMeta, SimulatorReference, ValidationOptions,
    ValidationSet,
};
use uqbench_core::Result;

/// Polynomial chaos and Gaussian process surrogates of black-box simulators.
#[derive(Parser)]
#[command(name = "uqbench", version)]
struct Cli {
    /// Master seed for every stochastic stage.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a design on the standard cube.
    Design(DesignArgs),
    /// Evaluate a builtin simulator on a design.
    Simulate(SimulateArgs),
    /// Fit a surrogate to a design and its outputs.
    Fit(FitArgs),
    /// Predict with a fitted surrogate.
    Predict(PredictArgs),
    /// Score a surrogate on a validation design.
    Validate(ValidateArgs),
    /// Run a full experiment from a JSON config.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignKindArg {
    Sobol,
    Lhs,
    Grid,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, value_enum)]
    kind: DesignKindArg,
    /// Number of points (Sobol and Latin hypercube).
    #[arg(long)]
    m: Option<usize>,
    /// Number of inputs.
    #[arg(long)]
    n: usize,
    /// Points per dimension for a grid; one value, or one per input.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinArg {
    Toy,
    ProductPolynomial,
    QuadraticBowl,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    simulator: BuiltinArg,
    /// Degree of the product polynomial.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// pce-reg, pce-quad, gp-se or gp-matern.
    #[arg(long)]
    method: SurrogateMethod,
    /// Chaos order (ignored by Gaussian processes).
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    outputs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write posterior variances (Gaussian processes only).
    #[arg(long)]
    variance: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Validation design.
    #[arg(long)]
    design: PathBuf,
    /// Simulator outputs on the validation design.
    #[arg(long)]
    outputs: PathBuf,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Density curve CSV.
    #[arg(long)]
    pdf_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Design(a) => design(a, seed)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Fit(a) => fit(a, seed)?,
        Command::Predict(a) => predict(a)?,
        Command::Validate(a) => validate(a, seed)?,
        Command::Bench(a) => return bench(a, cli.seed),
    }
    Ok(ExitCode::SUCCESS)
}

fn need_m(m: Option<usize>) -> Result<usize> {
    m.ok_or_else(|| uqbench_core::Error::InvalidInput("--m is required for this design".into()))
}

fn design(a: DesignArgs, seed: u64) -> Result<()> {
    let d = match a.kind {
        DesignKindArg::Sobol => sobol(need_m(a.m)?, a.n, seed)?,
        DesignKindArg::Lhs => latin_hypercube(need_m(a.m)?, a.n, seed)?,
        DesignKindArg::Grid => {
            let orders = match a.k.as_slice() {
                [k] => vec![*k; a.n],
                ks if ks.len() == a.n => ks.to_vec(),
                _ => {
                    return Err(uqbench_core::Error::InvalidInput(format!(
                        "--k needs one value or {} values",
                        a.n
                    )))
                }
            };
            tensor_grid(&orders)?
        }
    };
    write_design(&a.out, &d)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let d = read_design(&a.design)?;
    let spec = match a.simulator {
        BuiltinArg::Toy => SimulatorSpec::Toy,
        BuiltinArg::ProductPolynomial => SimulatorSpec::ProductPolynomial { degree: a.degree },
        BuiltinArg::QuadraticBowl => SimulatorSpec::QuadraticBowl,
    };
    let scratch = std::env::temp_dir();
    let mut ev = Evaluator::new(spec, InputSpace::standard(d.dim())?, &scratch, &scratch)?;
    write_outputs(&a.out, &ev.evaluate(&d)?)
}

fn fit(a: FitArgs, seed: u64) -> Result<()> {
    let d = read_design(&a.design)?;
    let y = read_outputs(&a.outputs)?;
    let n = d.dim();
    let model = match a.method {
        SurrogateMethod::PceReg => {
            Surrogate::Pce(fit_regression(&d, &y, &build_basis(n, TruncationScheme::TotalOrder(a.p))?)?)
        }
        SurrogateMethod::PceQuad => Surrogate::Pce(fit_projection(
            &d,
            &y,
            &build_basis(n, TruncationScheme::TensorProduct(a.p))?,
        )?),
        SurrogateMethod::GpSe | SurrogateMethod::GpMatern => {
            let family = if a.method == SurrogateMethod::GpSe {
                KernelFamily::SquaredExponential
            } else {
                KernelFamily::Matern52
            };
            let basis = gp::stepwise_mean_basis(&d, &y, 2)?;
            let config = GpFitConfig {
                seed,
                ..Default::default()
            };
            Surrogate::Gp(Box::new(gp::fit(&d, &y, family, &basis, &config)?))
        }
    };
    if let Surrogate::Pce(m) = &model {
        for w in &m.diagnostics().warnings {
            log::warn!("{w}");
        }
    }
    model.save(&a.out)
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = Surrogate::load(&a.model)?;
    let d: Design = read_design(&a.design)?;
    match (&model, a.variance) {
        (Surrogate::Gp(m), true) => {
            if d.dim() != m.design().dim() {
                return Err(uqbench_core::Error::DimensionMismatch {
                    expected: m.design().dim(),
                    got: d.dim(),
                });
            }
            let mut out = String::from("y,variance\n");
            for z in d.rows() {
                let p = m.predict(z);
                out.push_str(&format!("{},{}\n", fmt17(p.mean), fmt17(p.variance)));
            }
            std::fs::write(&a.out, out)?;
            Ok(())
        }
        (Surrogate::Pce(_), true) => Err(uqbench_core::Error::InvalidInput(
            "--variance needs a Gaussian process model".into(),
        )),
        _ => write_outputs(&a.out, &model.predict_design(&d)?),
    }
}

fn validate(a: ValidateArgs, seed: u64) -> Result<()> {
    let model = Surrogate::load(&a.model)?;
    let vset = ValidationSet::new(read_design(&a.design)?, read_outputs(&a.outputs)?)?;
    let options = ValidationOptions {
        bootstrap_replicates: a.bootstrap,
        posterior_samples: a.samples,
        seed,
        ..Default::default()
    };
    let preds = model.predict_design(vset.design())?;
    let reference = SimulatorReference::with_extra_range(&vset, &options, &[&preds])?;
    let meta = |name: &str| ReportMeta {
        surrogate: name.into(),
        seed,
        ..Default::default()
    };
    let report = match &model {
        Surrogate::Pce(_) => report_from_predictions(&preds, &vset, &reference, meta("pce"))?,
        Surrogate::Gp(m) => gp_metric_intervals(m, &vset, &reference, &options, meta("gp"))?,
    };
    if let Some(path) = &a.pdf_csv {
        std::fs::write(path, report.pdf.to_csv())?;
    }
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "reference": reference,
        "report": report,
    }))?;
    match &a.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn bench(a: BenchArgs, seed: Option<u64>) -> Result<ExitCode> {
    let mut config = ExperimentConfig::from_json_file(&a.config)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(out) = a.out {
        config.output_dir = out;
    }
    let outcome = run_experiment(&config)?;
    let files = write_run(&outcome, &config.output_dir)?;
    let failed: Vec<String> = outcome
        .result
        .cells
        .iter()
        .filter(|c| c.report.is_none())
        .map(|c| {
            format!(
                "{} class {} p={} (m={}): {}",
                c.method.name(),
                c.class.number(),
                c.order,
                c.size,
                c.error.as_deref().unwrap_or("no report")
            )
        })
        .collect();
    eprintln!(
        "{} cells, {} failed, {} simulator points; results in {}",
        outcome.result.cells.len(),
        failed.len(),
        outcome.result.simulator_calls,
        files.run_result.display()
    );
    for f in &failed {
        eprintln!("  failed: {f}");
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
