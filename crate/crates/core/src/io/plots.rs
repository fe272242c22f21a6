//! Minimal SVG line plots of a joint reconstruction.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::joint::JointHistory;
use crate::model::{Image, ProblemInstance};

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One set of axes with labelled polylines.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

impl Panel {
    fn render(&self, out: &mut String, top: f64) {
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let pts = || self.series.iter().flat_map(|(_, p)| p.iter());
        let (x0, x1) = bounds(pts().map(|p| p.0)).unwrap_or((0.0, 1.0));
        let (y0, y1) = bounds(pts().filter(|p| !self.log_y || p.1 > 0.0).map(|p| ty(p.1)))
            .unwrap_or((0.0, 1.0));
        let (left, right) = (MARGIN, PANEL_W - 16.0);
        let (upper, lower) = (top + 28.0, top + PANEL_H - 40.0);
        let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
        let sy = |y: f64| lower - (ty(y) - y0) / (y1 - y0) * (lower - upper);

        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
            PANEL_W / 2.0,
            top + 18.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{left:.1}" y="{upper:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="gray"/>"#,
            right - left,
            lower - upper
        );
        let fmt_y = |v: f64| if self.log_y { format!("1e{v:.1}") } else { format!("{v:.3}") };
        for (v, y) in [(y0, lower), (y1, upper)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
                left - 4.0,
                y + 3.0,
                fmt_y(v)
            );
        }
        for (v, x) in [(x0, left), (x1, right)] {
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{v}</text>"#,
                lower + 14.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            lower + 30.0,
            escape(&self.x_label)
        );
        for (i, (label, points)) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> = points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">{}</text>"#,
                right - 150.0,
                upper + 14.0 * (i + 1) as f64,
                escape(label)
            );
        }
    }
}

/// Stacks panels vertically into one SVG document.
pub fn render_svg(panels: &[Panel]) -> String {
    let height = PANEL_H * panels.len() as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL_W}\" height=\"{height}\" viewBox=\"0 0 {PANEL_W} {height}\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, p) in panels.iter().enumerate() {
        p.render(&mut out, PANEL_H * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

fn indexed(values: &[f64]) -> Vec<(f64, f64)> {
    values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect()
}

/// Writes `reconstruction.svg` (ground truth, final joint image and any
/// `others`) and `convergence.svg` (functional and error per outer
/// iteration) to `out_dir`.
pub fn emit_plots<T>(
    history: &JointHistory<T>,
    instance: &ProblemInstance<T>,
    others: &[(&str, &Image)],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    let last = history
        .last()
        .ok_or_else(|| Error::Invalid("cannot plot an empty history".into()))?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut series = Vec::new();
    if let Some(truth) = &instance.c_true {
        series.push(("ground truth".to_string(), indexed(truth)));
    }
    series.push(("joint".to_string(), indexed(&last.c)));
    for (label, c) in others {
        series.push((label.to_string(), indexed(c)));
    }
    let recon = Panel {
        title: "Reconstruction".into(),
        x_label: "pixel".into(),
        log_y: false,
        series,
    };

    let outer = |f: &dyn Fn(usize) -> Option<f64>| -> Vec<(f64, f64)> {
        history
            .records
            .iter()
            .enumerate()
            .filter_map(|(i, _)| f(i).map(|v| ((i + 1) as f64, v)))
            .collect()
    };
    let mut objective = vec![(0.0, history.initial_objective.total)];
    objective.extend(outer(&|i| Some(history.records[i].objective.total)));
    let mut panels = vec![Panel {
        title: "Joint functional".into(),
        x_label: "outer iteration".into(),
        log_y: true,
        series: vec![("J".into(), objective)],
    }];
    let errors = outer(&|i| history.records[i].l2_error);
    if !errors.is_empty() {
        panels.push(Panel {
            title: "Reconstruction error".into(),
            x_label: "outer iteration".into(),
            log_y: false,
            series: vec![("l2 error".into(), errors)],
        });
    }

    let mut written = Vec::new();
    for (name, svg) in [
        ("reconstruction.svg", render_svg(&[recon])),
        ("convergence.svg", render_svg(&panels)),
    ] {
        let path = out_dir.join(name);
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
