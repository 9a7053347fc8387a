use std::fmt::Write as _;
use std::path::Path;

use crate::error::HarnessError;
use crate::summary::Summary;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlotOptions {
    pub log_y: bool,
    /// Plot the running minimum instead of the per-round loss.
    pub best_so_far: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
/// Smallest plotted value on a log axis.
const LOG_FLOOR: f64 = 1e-6;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders mean exact loss against function evaluations, with a shaded
/// standard-error band per algorithm.
pub fn render_svg(summary: &Summary, opts: PlotOptions) -> Result<String, HarnessError> {
    if summary.algorithms.is_empty() || summary.algorithms.iter().all(|a| a.mean.is_empty()) {
        return Err(HarnessError::Other("nothing to plot".into()));
    }
    let series: Vec<(&str, &[f64], &[f64])> = summary
        .algorithms
        .iter()
        .map(|a| {
            if opts.best_so_far {
                (a.label.as_str(), a.best_mean.as_slice(), a.best_stderr.as_slice())
            } else {
                (a.label.as_str(), a.mean.as_slice(), a.stderr.as_slice())
            }
        })
        .collect();

    let x0 = summary.init_count as f64 + 1.0;
    let rounds = series.iter().map(|s| s.1.len()).max().unwrap_or(1);
    let x1 = (summary.init_count + rounds) as f64;
    let x_span = (x1 - x0).max(1.0);

    let tf = |v: f64| if opts.log_y { v.max(LOG_FLOOR).log10() } else { v };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, m, s) in &series {
        for (a, b) in m.iter().zip(*s) {
            lo = lo.min(tf(a - b));
            hi = hi.max(tf(a + b));
        }
    }
    if !opts.log_y {
        lo = lo.min(0.0);
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |fe: f64| LEFT + (fe - x0) / x_span * pw;
    let py = |v: f64| TOP + (hi - tf(v)) / (hi - lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for k in 0..=5 {
        let fe = x0 + x_span * k as f64 / 5.0;
        let x = px(fe);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 19.0,
            fe.round()
        );
    }
    for k in 0..=5 {
        let level = lo + (hi - lo) * k as f64 / 5.0;
        let y = TOP + (hi - level) / (hi - lo) * ph;
        let label = if opts.log_y {
            format!("1e{level:.1}")
        } else {
            format!("{level:.3}")
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let what = if opts.best_so_far { "best exact loss so far" } else { "exact loss" };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">function evaluations</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">mean {what}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        if opts.log_y { " (log)" } else { "" }
    );

    for (k, (label, mean, se)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let fe = |t: usize| x0 + t as f64;
        let mut band = String::new();
        for t in 0..mean.len() {
            let _ = write!(band, "{}{:.2},{:.2} ", if t == 0 { "M" } else { "L" }, px(fe(t)), py(mean[t] + se[t]));
        }
        for t in (0..mean.len()).rev() {
            let _ = write!(band, "L{:.2},{:.2} ", px(fe(t)), py(mean[t] - se[t]));
        }
        band.push('Z');
        let _ = writeln!(
            svg,
            r#"<path class="band" d="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#
        );
        let mut line = String::new();
        for (t, m) in mean.iter().enumerate() {
            let _ = write!(line, "{}{:.2},{:.2} ", if t == 0 { "M" } else { "L" }, px(fe(t)), py(*m));
        }
        let _ = writeln!(
            svg,
            r#"<path class="series" d="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            line.trim_end()
        );
        let ly = TOP + 14.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes [`render_svg`] to `path`; nothing is written on error.
pub fn emit_plot(summary: &Summary, path: &Path, opts: PlotOptions) -> Result<(), HarnessError> {
    let svg = render_svg(summary, opts)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    std::fs::write(path, svg).map_err(|e| HarnessError::io(path, e))
}
