use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::RunResult;
use crate::error::Result;
use crate::io::fmt17;
use crate::validation::{IntervalEstimate, IntervalMethod, MetricsReport};

/// Metric names in report order.
pub const METRICS: [&str; 5] = ["rmse", "mean", "sd", "exceed2", "exceed3"];

pub(crate) fn metric(report: &MetricsReport, name: &str) -> IntervalEstimate {
    match name {
        "rmse" => report.rmse,
        "mean" => report.mean,
        "sd" => report.sd,
        "exceed2" => report.exceed2,
        "exceed3" => report.exceed3,
        _ => unreachable!("unknown metric {name}"),
    }
}

fn interval_row(out: &mut String, prefix: &str, e: &IntervalEstimate) {
    let has = e.method != IntervalMethod::None;
    let band = |v: f64| if has { fmt17(v) } else { String::new() };
    let _ = writeln!(out, "{prefix},{},{},{}", fmt17(e.point), band(e.lo), band(e.hi));
}

/// One table per design class (metric against design size), the simulator
/// reference values, and every density curve.
pub fn write_tables(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut classes: Vec<_> = result.cells.iter().map(|c| c.class).collect();
    classes.dedup();
    for class in classes {
        let mut out = String::from("method,order,size,metric,point,lo,hi\n");
        for cell in result.cells.iter().filter(|c| c.class == class) {
            let Some(report) = &cell.report else { continue };
            for name in METRICS {
                let prefix = format!("{},{},{},{name}", cell.method.name(), cell.order, cell.size);
                interval_row(&mut out, &prefix, &metric(report, name));
            }
        }
        let path = dir.join(format!("metrics_class{}.csv", class.number()));
        std::fs::write(&path, out)?;
        written.push(path);
    }

    let r = &result.reference;
    let mut out = String::from("metric,point,lo,hi\n");
    for (name, e) in [("mean", &r.mean), ("sd", &r.sd), ("exceed2", &r.exceed2), ("exceed3", &r.exceed3)] {
        interval_row(&mut out, name, e);
    }
    let path = dir.join("reference.csv");
    std::fs::write(&path, out)?;
    written.push(path);

    let pdf_dir = dir.join("pdf");
    std::fs::create_dir_all(&pdf_dir)?;
    let path = pdf_dir.join("simulator.csv");
    std::fs::write(&path, r.pdf.to_csv())?;
    written.push(path);
    for cell in &result.cells {
        let Some(report) = &cell.report else { continue };
        let path = pdf_dir.join(format!(
            "class{}_{}_p{}.csv",
            cell.class.number(),
            cell.method.name(),
            cell.order
        ));
        std::fs::write(&path, report.pdf.to_csv())?;
        written.push(path);
    }
    Ok(written)
}
