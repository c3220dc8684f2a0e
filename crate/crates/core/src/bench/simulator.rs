//! Simulators the harness can call: analytic builtins and external black
//! boxes coupled through CSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::designs::Design;
use crate::domain::InputSpace;
use crate::error::{Error, Result};
use crate::io::{design_to_csv, fmt17, hex, parse_outputs};

/// Environment variable overriding where external evaluations are cached.
pub const CACHE_DIR_ENV: &str = "UQBENCH_CACHE_DIR";

/// The two-input test function `exp(-z1) tanh(5 z2)`.
pub fn toy_simulator(z1: f64, z2: f64) -> f64 {
    (-z1).exp() * (5.0 * z2).tanh()
}

/// `prod_j (1 + sum_{k=1..degree} x_j^k / (k + 1))`, exactly representable
/// by a tensor-product chaos of order `degree`.
pub fn product_polynomial(x: &[f64], degree: u32) -> f64 {
    x.iter()
        .map(|&v| 1.0 + (1..=degree).map(|k| v.powi(k as i32) / (k + 1) as f64).sum::<f64>())
        .product()
}

pub fn quadratic_bowl(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn default_degree() -> u32 {
    2
}

fn default_timeout() -> u64 {
    3600
}

fn default_poll_ms() -> u64 {
    200
}

/// An external program or watched directory exchanging CSV files.
///
/// With `program`, the harness writes the request CSV, runs the program with
/// `args` (where `{input}` and `{output}` are replaced by the file paths, or
/// both paths are appended if neither placeholder appears) and reads the
/// response CSV. With `watch_dir`, the request `request-<id>.csv` is dropped
/// into the directory and the harness waits for `response-<id>.csv`, which
/// must be created atomically (write elsewhere, then rename).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch_dir: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_poll_ms")]
    pub poll_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SimulatorSpec {
    Toy,
    ProductPolynomial {
        #[serde(default = "default_degree")]
        degree: u32,
    },
    QuadraticBowl,
    External(ExternalSpec),
}

impl SimulatorSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            SimulatorSpec::Toy if n != 2 => Err(Error::Config(format!(
                "the toy simulator takes 2 inputs, the input space has {n}"
            ))),
            SimulatorSpec::External(ext) => match (&ext.program, &ext.watch_dir) {
                (Some(_), None) | (None, Some(_)) => Ok(()),
                _ => Err(Error::Config(
                    "external simulator needs exactly one of 'program' and 'watch_dir'".into(),
                )),
            },
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SimulatorSpec::Toy => "toy".into(),
            SimulatorSpec::ProductPolynomial { degree } => format!("product-polynomial-{degree}"),
            SimulatorSpec::QuadraticBowl => "quadratic-bowl".into(),
            SimulatorSpec::External(_) => "external".into(),
        }
    }

    fn builtin(&self, x: &[f64]) -> Option<f64> {
        match self {
            SimulatorSpec::Toy => Some(toy_simulator(x[0], x[1])),
            SimulatorSpec::ProductPolynomial { degree } => Some(product_polynomial(x, *degree)),
            SimulatorSpec::QuadraticBowl => Some(quadratic_bowl(x)),
            SimulatorSpec::External(_) => None,
        }
    }
}

/// Cache key of a native-space point.
pub fn point_key(x: &[f64]) -> String {
    x.iter().map(|&v| fmt17(v)).collect::<Vec<_>>().join(",")
}

/// Evaluates a simulator at most once per distinct point.
///
/// Builtin results live in memory only; external results are also appended
/// to a cache file, so a rerun with the same simulator spec and input space
/// makes no external calls.
pub struct Evaluator {
    spec: SimulatorSpec,
    space: InputSpace,
    values: BTreeMap<String, f64>,
    used: BTreeSet<String>,
    cache_file: Option<PathBuf>,
    exchange_dir: PathBuf,
    invocations: usize,
    fresh: usize,
}

impl Evaluator {
    /// `cache_dir` holds persistent external results; `exchange_dir` holds
    /// request and response files for program-mode externals.
    pub fn new(spec: SimulatorSpec, space: InputSpace, cache_dir: &Path, exchange_dir: &Path) -> Result<Self> {
        spec.validate(space.dim())?;
        let mut values = BTreeMap::new();
        let cache_file = if let SimulatorSpec::External(_) = &spec {
            fs::create_dir_all(cache_dir)?;
            let mut h = Sha256::new();
            h.update(serde_json::to_string(&spec)?.as_bytes());
            h.update(serde_json::to_string(&space)?.as_bytes());
            let path = cache_dir.join(format!("{}.tsv", &hex(&h.finalize())[..16]));
            if path.exists() {
                load_cache(&path, &mut values)?;
            }
            Some(path)
        } else {
            None
        };
        Ok(Self {
            spec,
            space,
            values,
            used: BTreeSet::new(),
            cache_file,
            exchange_dir: exchange_dir.to_path_buf(),
            invocations: 0,
            fresh: 0,
        })
    }

    /// Cache directory from the environment, falling back to `default`.
    pub fn cache_dir_or(default: &Path) -> PathBuf {
        std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| default.to_path_buf())
    }

    /// External program runs or directory round trips so far.
    pub fn invocations(&self) -> usize {
        self.invocations
    }

    /// Points evaluated (not served from the persistent cache) so far.
    pub fn fresh_evaluations(&self) -> usize {
        self.fresh
    }

    /// Distinct points requested through this evaluator, whether computed
    /// or served from the cache.
    pub fn unique_points(&self) -> usize {
        self.used.len()
    }

    /// Outputs at the standard-cube points of `design`.
    pub fn evaluate(&mut self, design: &Design) -> Result<Vec<f64>> {
        if design.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: design.dim(),
            });
        }
        let native: Vec<Vec<f64>> = design.rows().map(|z| self.space.from_standard_slice(z)).collect();
        let keys: Vec<String> = native.iter().map(|x| point_key(x)).collect();

        let mut pending: Vec<usize> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, k) in keys.iter().enumerate() {
            if !self.values.contains_key(k) && seen.insert(k.as_str()) {
                pending.push(i);
            }
        }
        if !pending.is_empty() {
            let points: Vec<Vec<f64>> = pending.iter().map(|&i| native[i].clone()).collect();
            let outputs = self.run(&points)?;
            for (p, v) in points.iter().zip(&outputs) {
                if !v.is_finite() {
                    return Err(Error::Simulator {
                        point: p.clone(),
                        message: format!("non-finite output {v}"),
                    });
                }
            }
            let new: Vec<(String, f64)> = pending.iter().map(|&i| keys[i].clone()).zip(outputs).collect();
            if let Some(path) = &self.cache_file {
                append_cache(path, &new)?;
            }
            self.fresh += new.len();
            self.values.extend(new);
        }
        let out = keys.iter().map(|k| self.values[k]).collect();
        self.used.extend(keys);
        Ok(out)
    }

    fn run(&mut self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let SimulatorSpec::External(ext) = &self.spec else {
            return Ok(points.iter().map(|x| self.spec.builtin(x).unwrap_or(f64::NAN)).collect());
        };
        let ext = ext.clone();
        let request = Design::from_rows(points.to_vec(), None)?;
        let csv = design_to_csv(&request);
        let id = &hex(&Sha256::digest(csv.as_bytes()))[..16];
        self.invocations += 1;
        let response = match (&ext.program, &ext.watch_dir) {
            (Some(program), _) => run_program(&ext, program, &self.exchange_dir, id, &csv, points)?,
            (None, Some(dir)) => watch_directory(&ext, dir, id, &csv)?,
            (None, None) => unreachable!("validated on construction"),
        };
        let values = parse_outputs(&response, &fs::read_to_string(&response)?)?;
        if values.len() != points.len() {
            return Err(Error::RowCount {
                path: response,
                expected: points.len(),
                found: values.len(),
            });
        }
        Ok(values)
    }
}

fn run_program(
    ext: &ExternalSpec,
    program: &str,
    exchange_dir: &Path,
    id: &str,
    csv: &str,
    points: &[Vec<f64>],
) -> Result<PathBuf> {
    fs::create_dir_all(exchange_dir)?;
    let input = exchange_dir.join(format!("request-{id}.csv"));
    let output = exchange_dir.join(format!("response-{id}.csv"));
    fs::write(&input, csv)?;
    if output.exists() {
        fs::remove_file(&output)?;
    }
    let (input_s, output_s) = (input.display().to_string(), output.display().to_string());
    let mut args: Vec<String> = ext
        .args
        .iter()
        .map(|a| a.replace("{input}", &input_s).replace("{output}", &output_s))
        .collect();
    if !ext.args.iter().any(|a| a.contains("{input}") || a.contains("{output}")) {
        args.push(input_s);
        args.push(output_s);
    }
    let mut child = Command::new(program)
        .args(&args)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Simulator {
            point: points[0].clone(),
            message: format!("cannot start '{program}': {e}"),
        })?;
    let deadline = Instant::now() + Duration::from_secs(ext.timeout_secs);
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout { secs: ext.timeout_secs });
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    if !status.success() {
        let mut stderr = String::new();
        if let Some(mut err) = child.stderr.take() {
            use std::io::Read as _;
            let _ = err.read_to_string(&mut stderr);
        }
        return Err(Error::Simulator {
            point: points[0].clone(),
            message: format!("'{program}' exited with {status}: {}", stderr.trim()),
        });
    }
    if !output.exists() {
        return Err(Error::Malformed {
            path: output,
            message: "external program did not write a response".into(),
        });
    }
    Ok(output)
}

fn watch_directory(ext: &ExternalSpec, dir: &Path, id: &str, csv: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let request = dir.join(format!("request-{id}.csv"));
    let response = dir.join(format!("response-{id}.csv"));
    if !response.exists() {
        let tmp = dir.join(format!(".request-{id}.csv.tmp"));
        fs::write(&tmp, csv)?;
        fs::rename(&tmp, &request)?;
    }
    let deadline = Instant::now() + Duration::from_secs(ext.timeout_secs);
    while !response.exists() {
        if Instant::now() >= deadline {
            return Err(Error::Timeout { secs: ext.timeout_secs });
        }
        std::thread::sleep(Duration::from_millis(ext.poll_ms.max(1)));
    }
    Ok(response)
}

fn load_cache(path: &Path, values: &mut BTreeMap<String, f64>) -> Result<()> {
    for (i, line) in fs::read_to_string(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = line
            .split_once('\t')
            .and_then(|(k, v)| v.trim().parse::<f64>().ok().map(|v| (k.to_string(), v)));
        let Some((k, v)) = parsed else {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                message: format!("line {}: expected '<point>\\t<value>'", i + 1),
            });
        };
        values.insert(k, v);
    }
    Ok(())
}

fn append_cache(path: &Path, entries: &[(String, f64)]) -> Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(k);
        text.push('\t');
        text.push_str(&fmt17(*v));
        text.push('\n');
    }
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::sobol;

    #[test]
    fn toy_values() {
        assert_eq!(toy_simulator(0.0, 0.0), 0.0);
        assert_eq!(toy_simulator(0.3, -0.7), -toy_simulator(0.3, 0.7));
        assert!((toy_simulator(-1.0, 1.0) - 2.718035020055956).abs() < 1e-12);
    }

    #[test]
    fn product_polynomial_degree() {
        assert_eq!(product_polynomial(&[0.0, 0.0], 3), 1.0);
        // 1 + 1/2 + 1/3 at x = 1 in one dimension.
        assert!((product_polynomial(&[1.0], 2) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn builtin_evaluated_once_per_point() {
        let dir = tempfile::tempdir().unwrap();
        let space = InputSpace::standard(2).unwrap();
        let mut ev = Evaluator::new(SimulatorSpec::Toy, space, dir.path(), dir.path()).unwrap();
        let d = sobol(8, 2, 0).unwrap();
        let y1 = ev.evaluate(&d.prefix(4)).unwrap();
        let y2 = ev.evaluate(&d).unwrap();
        assert_eq!(&y2[..4], &y1[..]);
        assert_eq!(ev.unique_points(), 8);
        assert_eq!(ev.fresh_evaluations(), 8);
        assert_eq!(ev.invocations(), 0);
    }

    #[test]
    fn toy_needs_two_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let space = InputSpace::standard(3).unwrap();
        assert!(Evaluator::new(SimulatorSpec::Toy, space, dir.path(), dir.path()).is_err());
    }

    #[test]
    fn spec_json() {
        let s: SimulatorSpec = serde_json::from_str(r#"{"kind":"product-polynomial"}"#).unwrap();
        assert_eq!(s, SimulatorSpec::ProductPolynomial { degree: 2 });
        let e: SimulatorSpec =
            serde_json::from_str(r#"{"kind":"external","program":"sim","args":["{input}"]}"#).unwrap();
        assert!(e.validate(2).is_ok());
        let bad: SimulatorSpec = serde_json::from_str(r#"{"kind":"external"}"#).unwrap();
        assert!(bad.validate(2).is_err());
    }
}
