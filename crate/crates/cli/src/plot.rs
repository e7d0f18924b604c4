//! Static SVG plots of sharpness sweeps.

use std::fmt::Write as _;
use std::path::Path;

use crate::report::fmt_f64;
use crate::CliError;

/// One sweep row as plotted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotRow {
    pub epsilon: f64,
    pub quotient: f64,
    pub lower: f64,
    pub upper: f64,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 690.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 380.0;

const SERIES: [(&str, &str, &str); 3] = [
    ("quotient", "#1f77b4", ""),
    ("lower bound p^-p", "#2ca02c", " stroke-dasharray=\"6 4\""),
    ("upper bracket c(eps)^p", "#d62728", " stroke-dasharray=\"2 3\""),
];

/// Renders quotient, lower bound and upper bracket against `ε` on a log axis.
///
/// The SVG embeds the plotted values in a `<desc id="data-table">` element.
pub fn render_sweep_svg(title: &str, rows: &[PlotRow]) -> Result<String, CliError> {
    if rows.len() < 2 {
        return Err(CliError::Plot(format!("a sweep plot needs at least 2 rows, got {}", rows.len())));
    }
    if rows.iter().any(|r| !(r.epsilon > 0.0) || ![r.quotient, r.lower, r.upper].iter().all(|v| v.is_finite())) {
        return Err(CliError::Plot("sweep rows need positive epsilons and finite values".to_string()));
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.epsilon.log10()).collect();
    let (x_lo, x_hi) = (lx.iter().copied().fold(f64::INFINITY, f64::min), lx.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    if x_hi <= x_lo {
        return Err(CliError::Plot("sweep rows need at least two distinct epsilons".to_string()));
    }
    let values = rows.iter().flat_map(|r| [r.quotient, r.lower, r.upper]);
    let (v_lo, v_hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let pad = 0.05 * (v_hi - v_lo).max(1e-12 * v_hi.abs().max(1.0));
    let (y_lo, y_hi) = (v_lo - pad, v_hi + pad);
    let px = |l: f64| LEFT + (l - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let py = |v: f64| BOTTOM - (v - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, "<desc id=\"data-table\">");
    let _ = writeln!(s, "epsilon,lower,quotient,upper");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(r.epsilon), fmt_f64(r.lower), fmt_f64(r.quotient), fmt_f64(r.upper));
    }
    let _ = writeln!(s, "</desc>");
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.3}\" y=\"28\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        0.5 * (LEFT + RIGHT),
        escape(title)
    );
    let _ = writeln!(
        s,
        "<path d=\"M{LEFT:.3} {TOP:.3} L{LEFT:.3} {BOTTOM:.3} L{RIGHT:.3} {BOTTOM:.3}\" stroke=\"black\" fill=\"none\"/>"
    );
    for d in (x_lo.floor() as i32)..=(x_hi.ceil() as i32) {
        let l = d as f64;
        if l < x_lo - 1e-12 || l > x_hi + 1e-12 {
            continue;
        }
        let x = px(l);
        let _ = writeln!(s, "<line x1=\"{x:.3}\" y1=\"{BOTTOM:.3}\" x2=\"{x:.3}\" y2=\"{:.3}\" stroke=\"black\"/>", BOTTOM + 5.0);
        let _ = writeln!(
            s,
            "<text x=\"{x:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">1e{d}</text>",
            BOTTOM + 20.0
        );
    }
    for i in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(s, "<line x1=\"{:.3}\" y1=\"{y:.3}\" x2=\"{LEFT:.3}\" y2=\"{y:.3}\" stroke=\"black\"/>", LEFT - 5.0);
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{v:.5}</text>",
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">epsilon</text>",
        0.5 * (LEFT + RIGHT),
        BOTTOM + 42.0
    );
    let columns: [Vec<f64>; 3] = [
        rows.iter().map(|r| r.quotient).collect(),
        rows.iter().map(|r| r.lower).collect(),
        rows.iter().map(|r| r.upper).collect(),
    ];
    for (k, ((name, color, dash), ys)) in SERIES.iter().zip(&columns).enumerate() {
        let points: Vec<String> = lx.iter().zip(ys).map(|(&l, &v)| format!("{:.3},{:.3}", px(l), py(v))).collect();
        let _ = writeln!(
            s,
            "<polyline class=\"series\" data-name=\"{name}\" points=\"{}\" stroke=\"{color}\" stroke-width=\"2\" fill=\"none\"{dash}/>",
            points.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.3}\" y1=\"{ly:.3}\" x2=\"{:.3}\" y2=\"{ly:.3}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
            RIGHT - 190.0,
            RIGHT - 160.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            RIGHT - 152.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes [`render_sweep_svg`] output to `path`.
pub fn emit_plot(title: &str, rows: &[PlotRow], path: &Path) -> Result<(), CliError> {
    let svg = render_sweep_svg(title, rows)?;
    std::fs::write(path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Rows of the `data-table` element of a rendered plot.
pub fn parse_data_table(svg: &str) -> Option<Vec<PlotRow>> {
    let start = svg.find("<desc id=\"data-table\">")?;
    let body = &svg[start..];
    let end = body.find("</desc>")?;
    body[..end]
        .lines()
        .skip(2)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|c| c.parse().ok()).collect::<Option<_>>()?;
            (v.len() == 4).then(|| PlotRow {
                epsilon: v[0],
                lower: v[1],
                quotient: v[2],
                upper: v[3],
            })
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
