//! Self-contained SVG plots of experiment reports.

use std::fmt::Write as _;
use std::path::Path;

use entropy_bump::lab::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Normalized quotient against trial index.
    Scatter,
    /// Counts of normalized quotients in equal-width bins.
    Histogram,
    /// Normalized quotient against `[w]_{A₁}`, one point per distinct `A₁` value.
    Line,
}

impl PlotKind {
    /// Default plot for a report.
    pub fn for_report(report: &ExperimentReport) -> PlotKind {
        match report.name.as_str() {
            "corollary" => PlotKind::Line,
            "main_theorem" => PlotKind::Histogram,
            _ => PlotKind::Scatter,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const BINS: usize = 20;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        Frame { x: padded(xs), y: padded(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

/// Finite range of the values, widened when degenerate.
fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    writeln!(out, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(out, r#"<path d="M{x0:.1} {y0:.1} V{y1:.1} H{x1:.1}" fill="none" stroke="black"/>"#).unwrap();
    for (v, anchor, x) in [(frame.x.0, "start", x0), (frame.x.1, "end", x1)] {
        writeln!(out, r#"<text x="{x:.1}" y="{:.1}" text-anchor="{anchor}" font-size="11">{}</text>"#, y1 + 16.0, tick(v)).unwrap();
    }
    for (v, y) in [(frame.y.0, y1), (frame.y.1, y0)] {
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#, x0 - 6.0, y + 4.0, tick(v)).unwrap();
    }
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(x_label)).unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) { format!("{v:.3e}") } else { format!("{v:.4}") }
}

/// Render the report as SVG text.
pub fn render(report: &ExperimentReport, kind: PlotKind) -> Result<String, String> {
    if report.records.is_empty() {
        return Err(format!("report `{}` has no records to plot", report.name));
    }
    let mut body = String::new();
    match kind {
        PlotKind::Scatter => {
            let xs = report.records.iter().map(|r| r.trial as f64);
            let ys = report.records.iter().map(|r| r.normalized_quotient);
            let frame = Frame::new(xs, ys);
            axes(&mut body, &frame, &report.name, "trial", "normalized quotient");
            for r in report.records.iter().filter(|r| r.normalized_quotient.is_finite()) {
                let color = if r.pass { "steelblue" } else { "crimson" };
                writeln!(
                    body,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    frame.px(r.trial as f64),
                    frame.py(r.normalized_quotient)
                )
                .unwrap();
            }
        }
        PlotKind::Histogram => {
            let values: Vec<f64> =
                report.records.iter().map(|r| r.normalized_quotient).filter(|v| v.is_finite()).collect();
            let (lo, hi) = padded(values.iter().copied());
            let mut counts = [0usize; BINS];
            for v in &values {
                let b = (((v - lo) / (hi - lo)) * BINS as f64) as usize;
                counts[b.min(BINS - 1)] += 1;
            }
            let top = *counts.iter().max().unwrap() as f64;
            let frame = Frame { x: (lo, hi), y: (0.0, top.max(1.0)) };
            axes(&mut body, &frame, &report.name, "normalized quotient", "trials");
            let width = (hi - lo) / BINS as f64;
            for (i, &c) in counts.iter().enumerate() {
                let (xa, xb) = (frame.px(lo + i as f64 * width), frame.px(lo + (i + 1) as f64 * width));
                let y = frame.py(c as f64);
                writeln!(
                    body,
                    r#"<rect x="{xa:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="white"/>"#,
                    xb - xa,
                    frame.py(0.0) - y
                )
                .unwrap();
            }
        }
        PlotKind::Line => {
            // Largest normalized quotient per distinct A₁ value.
            let mut points: Vec<(f64, f64)> = Vec::new();
            for r in &report.records {
                let Some(a1) = r.a1.filter(|a| a.is_finite()) else { continue };
                match points.iter_mut().find(|p| p.0 == a1) {
                    Some(p) => p.1 = p.1.max(r.normalized_quotient),
                    None => points.push((a1, r.normalized_quotient)),
                }
            }
            if points.is_empty() {
                return Err(format!("report `{}` has no [w]_A1 values for a line plot", report.name));
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let frame = Frame::new(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
            axes(&mut body, &frame, &report.name, "[w]_A1", "max normalized quotient");
            let path: Vec<String> =
                points.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
            writeln!(body, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path.join(" ")).unwrap();
            for &(x, y) in &points {
                writeln!(body, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, frame.px(x), frame.py(y)).unwrap();
            }
        }
    }
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    ))
}

/// Render and write; nothing is written when rendering fails.
pub fn emit_svg(report: &ExperimentReport, kind: PlotKind, path: &Path) -> Result<(), String> {
    let svg = render(report, kind)?;
    std::fs::write(path, svg).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use entropy_bump::lab::TrialRecord;

    fn report(records: Vec<TrialRecord>) -> ExperimentReport {
        ExperimentReport::new("demo", 1, &serde_json::json!({}), records).unwrap()
    }

    #[test]
    fn single_point_has_one_marker() {
        let svg = render(&report(vec![TrialRecord::new(0, "x", 1.0, 0.5)]), PlotKind::Scatter).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_report_is_an_error_and_writes_nothing() {
        let dir = std::env::temp_dir().join(format!("svg-empty-{}", std::process::id()));
        let err = emit_svg(&report(vec![]), PlotKind::Histogram, &dir);
        assert!(err.is_err());
        assert!(!dir.exists());
    }

    #[test]
    fn output_is_deterministic() {
        let recs: Vec<TrialRecord> = (0..30)
            .map(|i| {
                let mut r = TrialRecord::new(i, "t", 1.0, (i as f64).sqrt());
                r.a1 = Some(1.0 + (i % 4) as f64);
                r
            })
            .collect();
        let rep = report(recs);
        for kind in [PlotKind::Scatter, PlotKind::Histogram, PlotKind::Line] {
            assert_eq!(render(&rep, kind).unwrap(), render(&rep.clone(), kind).unwrap());
        }
        let line = render(&rep, PlotKind::Line).unwrap();
        assert_eq!(line.matches("<circle").count(), 4);
        let hist = render(&rep, PlotKind::Histogram).unwrap();
        assert_eq!(hist.matches("<rect").count(), BINS + 1);
    }
}
