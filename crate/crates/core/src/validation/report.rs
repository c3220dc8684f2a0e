use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_ci, IntervalEstimate, IntervalMethod};
use super::kde::{kde, kde_grid, silverman_bandwidth, BinnedKde};
use super::metrics::{empirical_mean, empirical_sd, exceedance, percentile_sorted, rmse};
use crate::designs::Design;
use crate::error::{Error, Result};
use crate::gp::{GpModel, DEFAULT_SAMPLE_CAP};
use crate::io::fmt17;
use crate::seeds;

/// Simulator runs on an independent validation design.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSet {
    design: Design,
    sim_outputs: Vec<f64>,
}

impl ValidationSet {
    pub fn new(design: Design, sim_outputs: Vec<f64>) -> Result<Self> {
        if design.len() != sim_outputs.len() {
            return Err(Error::LengthMismatch {
                left: design.len(),
                right: sim_outputs.len(),
            });
        }
        if design.len() < 2 {
            return Err(Error::InvalidInput("validation set needs at least 2 points".into()));
        }
        if let Some(i) = sim_outputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "validation output {i} is not finite ({})",
                sim_outputs[i]
            )));
        }
        Ok(Self { design, sim_outputs })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn sim_outputs(&self) -> &[f64] {
        &self.sim_outputs
    }

    pub fn len(&self) -> usize {
        self.sim_outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sim_outputs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub bootstrap_replicates: usize,
    pub posterior_samples: usize,
    pub level: f64,
    pub grid_points: usize,
    pub sample_cap: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            bootstrap_replicates: 1000,
            posterior_samples: 1000,
            level: 0.95,
            grid_points: 512,
            sample_cap: DEFAULT_SAMPLE_CAP,
            seed: 0,
        }
    }
}

/// Density estimate on a grid, with an optional pointwise band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
}

impl PdfCurve {
    /// CSV with columns `value,density,lo,hi`; band columns are empty when
    /// there is no band.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,density,lo,hi\n");
        for i in 0..self.grid.len() {
            let band = |b: &Option<Vec<f64>>| b.as_ref().map(|v| fmt17(v[i])).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt17(self.grid[i]),
                fmt17(self.density[i]),
                band(&self.lo),
                band(&self.hi)
            );
        }
        out
    }
}

/// Simulator-side quantities every surrogate is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorReference {
    pub mean: IntervalEstimate,
    pub sd: IntervalEstimate,
    pub exceed2: IntervalEstimate,
    pub exceed3: IntervalEstimate,
    pub bandwidth: f64,
    pub pdf: PdfCurve,
}

impl SimulatorReference {
    /// Bootstrap intervals and density of the simulator outputs. The KDE
    /// grid spans the simulator outputs padded by five bandwidths.
    pub fn new(vset: &ValidationSet, options: &ValidationOptions) -> Result<Self> {
        Self::with_extra_range(vset, options, &[])
    }

    /// As [`SimulatorReference::new`], but the grid also covers every value
    /// in `extra` so that surrogate densities are not cut off.
    pub fn with_extra_range(
        vset: &ValidationSet,
        options: &ValidationOptions,
        extra: &[&[f64]],
    ) -> Result<Self> {
        let y = vset.sim_outputs();
        let bandwidth = silverman_bandwidth(y)?;
        let mut sets = vec![y];
        sets.extend_from_slice(extra);
        let grid = kde_grid(&sets, bandwidth, options.grid_points);
        let density = kde(y, bandwidth, &grid)?;

        let b = options.bootstrap_replicates;
        let lvl = options.level;
        let seed = options.seed;
        let exceed_at = |kappa: f64| move |v: &[f64]| exceedance(v, empirical_mean(v), empirical_sd(v), kappa);
        Ok(Self {
            mean: bootstrap_ci(y, empirical_mean, b, lvl, seeds::derive(seed, "bootstrap/mean"))?,
            sd: bootstrap_ci(y, empirical_sd, b, lvl, seeds::derive(seed, "bootstrap/sd"))?,
            exceed2: bootstrap_ci(y, exceed_at(2.0), b, lvl, seeds::derive(seed, "bootstrap/exceed2"))?,
            exceed3: bootstrap_ci(y, exceed_at(3.0), b, lvl, seeds::derive(seed, "bootstrap/exceed3"))?,
            bandwidth,
            pdf: PdfCurve {
                grid,
                density,
                lo: None,
                hi: None,
            },
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub surrogate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_class: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub meta: ReportMeta,
    pub rmse: IntervalEstimate,
    pub mean: IntervalEstimate,
    pub sd: IntervalEstimate,
    pub exceed2: IntervalEstimate,
    pub exceed3: IntervalEstimate,
    pub pdf: PdfCurve,
}

struct PointMetrics {
    rmse: f64,
    mean: f64,
    sd: f64,
    exceed2: f64,
    exceed3: f64,
}

fn point_metrics(preds: &[f64], vset: &ValidationSet, reference: &SimulatorReference) -> Result<PointMetrics> {
    let (mu, sigma) = (reference.mean.point, reference.sd.point);
    Ok(PointMetrics {
        rmse: rmse(preds, vset.sim_outputs())?,
        mean: empirical_mean(preds),
        sd: empirical_sd(preds),
        exceed2: exceedance(preds, mu, sigma, 2.0),
        exceed3: exceedance(preds, mu, sigma, 3.0),
    })
}

/// Point metrics for predictions already made at the validation points.
/// Exceedance thresholds come from the simulator outputs.
pub fn report_from_predictions(
    preds: &[f64],
    vset: &ValidationSet,
    reference: &SimulatorReference,
    meta: ReportMeta,
) -> Result<MetricsReport> {
    if let Some(i) = preds.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("prediction {i} is not finite")));
    }
    let pm = point_metrics(preds, vset, reference)?;
    let density = kde(preds, reference.bandwidth, &reference.pdf.grid)?;
    Ok(MetricsReport {
        meta,
        rmse: IntervalEstimate::point_only(pm.rmse),
        mean: IntervalEstimate::point_only(pm.mean),
        sd: IntervalEstimate::point_only(pm.sd),
        exceed2: IntervalEstimate::point_only(pm.exceed2),
        exceed3: IntervalEstimate::point_only(pm.exceed3),
        pdf: PdfCurve {
            grid: reference.pdf.grid.clone(),
            density,
            lo: None,
            hi: None,
        },
    })
}

/// Point metrics of a surrogate evaluated at every validation point.
pub fn evaluate_surrogate(
    predict: impl Fn(&[f64]) -> f64,
    vset: &ValidationSet,
    reference: &SimulatorReference,
    meta: ReportMeta,
) -> Result<MetricsReport> {
    let preds: Vec<f64> = vset.design().rows().map(predict).collect();
    report_from_predictions(&preds, vset, reference, meta)
}

/// Metrics of a GP with posterior-resampling intervals.
///
/// Point estimates use the posterior mean. Each of the posterior draws at
/// the validation points is scored like a surrogate; intervals and the PDF
/// band are pointwise percentiles over draws.
pub fn gp_metric_intervals(
    model: &GpModel,
    vset: &ValidationSet,
    reference: &SimulatorReference,
    options: &ValidationOptions,
    meta: ReportMeta,
) -> Result<MetricsReport> {
    let preds = model.predict_design(vset.design());
    let mut report = report_from_predictions(&preds, vset, reference, meta)?;
    let s = options.posterior_samples;
    if s == 0 {
        return Ok(report);
    }
    let draws = model.sample_posterior_with_cap(vset.design(), s, options.seed, options.sample_cap)?;

    let grid = &reference.pdf.grid;
    let binned = BinnedKde::new(grid, reference.bandwidth);
    let mut per_metric: [Vec<f64>; 5] = std::array::from_fn(|_| Vec::with_capacity(s));
    let mut curves = vec![vec![0.0; s]; grid.len()];
    let mut curve = vec![0.0; grid.len()];
    for (k, draw) in draws.iter().enumerate() {
        let pm = point_metrics(draw, vset, reference)?;
        for (slot, v) in per_metric.iter_mut().zip([pm.rmse, pm.mean, pm.sd, pm.exceed2, pm.exceed3]) {
            slot.push(v);
        }
        binned.eval(draw, &mut curve);
        for (g, v) in curve.iter().enumerate() {
            curves[g][k] = *v;
        }
    }

    let level = options.level;
    let [r, m, sd, e2, e3] = per_metric;
    let interval = |point: f64, reps: Vec<f64>| {
        IntervalEstimate::from_replicates(point, reps, level, IntervalMethod::PosteriorResampling)
    };
    report.rmse = interval(report.rmse.point, r);
    report.mean = interval(report.mean.point, m);
    report.sd = interval(report.sd.point, sd);
    report.exceed2 = interval(report.exceed2.point, e2);
    report.exceed3 = interval(report.exceed3.point, e3);

    let tail = 0.5 * (1.0 - level);
    let (mut lo, mut hi) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for mut column in curves {
        column.sort_by(f64::total_cmp);
        lo.push(percentile_sorted(&column, tail));
        hi.push(percentile_sorted(&column, 1.0 - tail));
    }
    report.pdf.lo = Some(lo);
    report.pdf.hi = Some(hi);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{latin_hypercube, sobol};
    use crate::gp::{fit, GpFitConfig, KernelFamily, MeanBasis};
    use crate::validation::kde::trapezoid;

    fn toy(z: &[f64]) -> f64 {
        (-z[0]).exp() * (5.0 * z[1]).tanh()
    }

    fn toy_set(m: usize, seed: u64) -> ValidationSet {
        let d = latin_hypercube(m, 2, seed).unwrap();
        let y = d.rows().map(toy).collect();
        ValidationSet::new(d, y).unwrap()
    }

    fn opts() -> ValidationOptions {
        ValidationOptions {
            bootstrap_replicates: 200,
            posterior_samples: 200,
            ..Default::default()
        }
    }

    #[test]
    fn perfect_surrogate_matches_reference() {
        let vset = toy_set(300, 1);
        let reference = SimulatorReference::new(&vset, &opts()).unwrap();
        let r = evaluate_surrogate(toy, &vset, &reference, ReportMeta::default()).unwrap();
        assert_eq!(r.rmse.point, 0.0);
        assert_eq!(r.mean.point, reference.mean.point);
        assert_eq!(r.sd.point, reference.sd.point);
        assert_eq!(r.exceed2.point, reference.exceed2.point);
        assert_eq!(r.exceed3.point, reference.exceed3.point);
        assert_eq!(r.pdf.density, reference.pdf.density);
        assert!((trapezoid(&r.pdf.grid, &r.pdf.density) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn seeds_change_intervals_only() {
        let vset = toy_set(200, 2);
        let a = SimulatorReference::new(&vset, &ValidationOptions { seed: 1, ..opts() }).unwrap();
        let b = SimulatorReference::new(&vset, &ValidationOptions { seed: 2, ..opts() }).unwrap();
        let a2 = SimulatorReference::new(&vset, &ValidationOptions { seed: 1, ..opts() }).unwrap();
        assert_eq!(a, a2);
        assert_eq!(a.mean.point, b.mean.point);
        assert_eq!(a.sd.point, b.sd.point);
        assert_ne!(a.mean.lo, b.mean.lo);
        for e in [&a.mean, &a.sd, &a.exceed2, &a.exceed3] {
            assert!(e.lo <= e.hi);
            assert_eq!(e.method, IntervalMethod::Bootstrap);
        }
    }

    #[test]
    fn gp_intervals_ordered_and_reproducible() {
        let vset = toy_set(200, 3);
        let reference = SimulatorReference::new(&vset, &opts()).unwrap();
        let d = sobol(20, 2, 0).unwrap();
        let y: Vec<f64> = d.rows().map(toy).collect();
        let model = fit(&d, &y, KernelFamily::Matern52, &MeanBasis::constant(2), &GpFitConfig::default())
            .unwrap();
        let r1 = gp_metric_intervals(&model, &vset, &reference, &opts(), ReportMeta::default()).unwrap();
        let r2 = gp_metric_intervals(&model, &vset, &reference, &opts(), ReportMeta::default()).unwrap();
        assert_eq!(r1, r2);
        for e in [&r1.rmse, &r1.mean, &r1.sd, &r1.exceed2, &r1.exceed3] {
            assert!(e.lo <= e.hi);
            assert_eq!(e.method, IntervalMethod::PosteriorResampling);
        }
        assert!((0.0..=1.0).contains(&r1.exceed2.point));
        let (lo, hi) = (r1.pdf.lo.as_ref().unwrap(), r1.pdf.hi.as_ref().unwrap());
        assert!(lo.iter().zip(hi).all(|(a, b)| 0.0 <= *a && a <= b));
        assert!((trapezoid(&r1.pdf.grid, &r1.pdf.density) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn gp_validated_on_its_training_points() {
        let d = sobol(25, 2, 0).unwrap();
        let y: Vec<f64> = d.rows().map(toy).collect();
        let vset = ValidationSet::new(d.clone(), y.clone()).unwrap();
        let reference = SimulatorReference::new(&vset, &opts()).unwrap();
        let model = fit(&d, &y, KernelFamily::SquaredExponential, &MeanBasis::constant(2), &GpFitConfig::default())
            .unwrap();
        let r = gp_metric_intervals(&model, &vset, &reference, &opts(), ReportMeta::default()).unwrap();
        let range = 2.0 * 5f64.tanh() * 1f64.exp();
        assert!(r.rmse.point < 1e-6 * range);
        assert!(r.rmse.hi < 1e-3 * range, "{:?}", r.rmse);
    }

    #[test]
    fn csv_and_json() {
        let vset = toy_set(50, 4);
        let reference = SimulatorReference::new(&vset, &opts()).unwrap();
        let csv = reference.pdf.to_csv();
        assert!(csv.starts_with("value,density,lo,hi\n"));
        assert_eq!(csv.lines().count(), 513);
        assert!(csv.lines().nth(1).unwrap().ends_with(",,"));
        let r = evaluate_surrogate(|z| z[0], &vset, &reference, ReportMeta::default()).unwrap();
        let back: MetricsReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn rejects_bad_sets() {
        let d = latin_hypercube(3, 2, 1).unwrap();
        assert!(ValidationSet::new(d.clone(), vec![1.0, 2.0]).is_err());
        assert!(ValidationSet::new(d, vec![1.0, f64::NAN, 2.0]).is_err());
    }
}
