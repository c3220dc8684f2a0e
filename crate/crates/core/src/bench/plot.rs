//! Static SVG panels: one metric against design size for one class.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::SurrogateMethod;
use super::run::RunResult;
use super::tables::{metric, METRICS};
use crate::designs::DesignClass;
use crate::error::Result;
use crate::validation::{IntervalEstimate, IntervalMethod};

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 340.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 45.0;

fn color(method: SurrogateMethod) -> &'static str {
    match method {
        SurrogateMethod::PceReg => "#1f77b4",
        SurrogateMethod::PceQuad => "#2ca02c",
        SurrogateMethod::GpSe => "#d62728",
        SurrogateMethod::GpMatern => "#9467bd",
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Series {
    method: SurrogateMethod,
    points: Vec<(f64, IntervalEstimate)>,
}

/// Write one SVG per (metric, class) present in `result` into `dir`.
pub fn emit_plots(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut classes: Vec<DesignClass> = result.cells.iter().map(|c| c.class).collect();
    classes.dedup();
    let mut written = Vec::new();
    for class in classes {
        for name in METRICS {
            let svg = panel(result, class, name);
            let path = dir.join(format!("{name}_class{}.svg", class.number()));
            std::fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn reference(result: &RunResult, name: &str) -> Option<IntervalEstimate> {
    let r = &result.reference;
    match name {
        "mean" => Some(r.mean),
        "sd" => Some(r.sd),
        "exceed2" => Some(r.exceed2),
        "exceed3" => Some(r.exceed3),
        _ => None,
    }
}

fn panel(result: &RunResult, class: DesignClass, name: &str) -> String {
    let mut series: Vec<Series> = Vec::new();
    for cell in result.cells.iter().filter(|c| c.class == class) {
        let Some(report) = &cell.report else { continue };
        let e = metric(report, name);
        match series.iter_mut().find(|s| s.method == cell.method) {
            Some(s) => s.points.push((cell.size as f64, e)),
            None => series.push(Series {
                method: cell.method,
                points: vec![(cell.size as f64, e)],
            }),
        }
    }
    let reference = reference(result, name);

    let sizes = result.cells.iter().filter(|c| c.class == class).map(|c| c.size as f64);
    let (mut x0, mut x1) = sizes.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(x1 > x0) {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let pad = 0.05 * (x1 - x0);
    let (x0, x1) = (x0 - pad, x1 + pad);

    let mut ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|(_, e)| [e.point, e.lo, e.hi]))
        .collect();
    if let Some(r) = reference {
        ys.extend([r.point, r.lo, r.hi]);
    }
    let ys: Vec<f64> = ys.into_iter().filter(|v| v.is_finite()).collect();
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if ys.is_empty() {
        y0 = 0.0;
        y1 = 1.0;
    }
    if !(y1 > y0) {
        let d = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
        y0 -= d;
        y1 += d;
    }
    let pad = 0.08 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{} (class {})</text>"#,
        LEFT + plot_w / 2.0,
        escape(name),
        class.number()
    );

    if let Some(r) = reference {
        if r.method != IntervalMethod::None {
            let (top, bottom) = (sy(r.hi), sy(r.lo));
            let _ = writeln!(
                s,
                r##"<rect x="{LEFT:.2}" y="{top:.2}" width="{plot_w:.2}" height="{:.2}" fill="#999999" fill-opacity="0.2"/>"##,
                (bottom - top).max(0.0)
            );
        }
        let y = sy(r.point);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444444" stroke-dasharray="5,3"/>"##,
            LEFT + plot_w
        );
    }

    // Axes and ticks.
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    let mut xticks: Vec<f64> = result
        .cells
        .iter()
        .filter(|c| c.class == class)
        .map(|c| c.size as f64)
        .collect();
    xticks.sort_by(f64::total_cmp);
    xticks.dedup();
    for x in xticks {
        let px = sx(x);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 4.0,
            TOP + plot_h + 16.0,
            x as u64
        );
    }
    for k in 0..=4 {
        let v = y0 + (y1 - y0) * k as f64 / 4.0;
        let py = sy(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            py + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">design size</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );

    for (i, series) in series.iter().enumerate() {
        let c = color(series.method);
        let path: Vec<String> = series
            .points
            .iter()
            .map(|(x, e)| format!("{:.2},{:.2}", sx(*x), sy(e.point)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, path.join(" "));
        for (x, e) in &series.points {
            let (px, py) = (sx(*x), sy(e.point));
            if e.method != IntervalMethod::None {
                let _ = writeln!(
                    s,
                    r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{c}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}"/>"#,
                    sy(e.lo),
                    sy(e.hi),
                    px - 3.0,
                    sy(e.lo),
                    px + 3.0,
                    sy(e.lo),
                    px - 3.0,
                    sy(e.hi),
                    px + 3.0,
                    sy(e.hi)
                );
            }
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{c}"/>"#);
        }
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            series.method.name()
        );
    }
    if reference.is_some() {
        let ly = TOP + 10.0 + 16.0 * series.len() as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r##"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="#444444" stroke-dasharray="5,3"/><text x="{:.2}" y="{:.2}">simulator</text>"##,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
