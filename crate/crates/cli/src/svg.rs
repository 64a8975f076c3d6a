//! Static convergence plots: log-log mean-square error against `T`, with a
//! `1/T` reference guide anchored at the first point. Output is plain SVG
//! text with fixed-precision coordinates, so identical reports produce
//! byte-identical files.

use std::io::{self, Write};

use marked_hawkes::ConvergenceReport64;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;
/// Floor for log-scaling: exact-zero MSEs (degenerate runs) plot here.
const FLOOR: f64 = 1e-16;

/// Render the report's MSE decay; fails when there are fewer than two rows
/// to connect.
pub fn emit_plot(report: &ConvergenceReport64, out: &mut dyn Write) -> io::Result<()> {
    if report.rows.len() < 2 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!(
                "convergence plot needs at least 2 rows, got {}",
                report.rows.len()
            ),
        ));
    }
    let xs: Vec<f64> = report.rows.iter().map(|r| r.t.log10()).collect();
    let ys: Vec<f64> = report.rows.iter().map(|r| r.mse.max(FLOOR).log10()).collect();
    // The 1/T guide through the first data point.
    let guide: Vec<f64> = report
        .rows
        .iter()
        .map(|r| (report.rows[0].mse.max(FLOOR) * report.rows[0].t / r.t).log10())
        .collect();

    let (x_lo, x_hi) = padded_range(&xs);
    let (y_lo, y_hi) = padded_range(&[ys.clone(), guide.clone()].concat());
    let x_span = MARGIN_LEFT..(WIDTH - MARGIN_RIGHT);
    let y_span = (HEIGHT - MARGIN_BOTTOM)..MARGIN_TOP;
    let to_x = |v: f64| remap(v, x_lo, x_hi, x_span.start, x_span.end);
    let to_y = |v: f64| remap(v, y_lo, y_hi, y_span.start, y_span.end);

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-family="monospace" font-size="14">{} / mean-square error vs T (log-log)</text>"#,
        MARGIN_LEFT,
        escape(&report.statistic)
    )?;
    writeln!(
        out,
        r##"<text x="{:.2}" y="40" font-family="monospace" font-size="11" fill="#555">limit = {} at v = {}, seed = {}</text>"##,
        MARGIN_LEFT, report.limit, report.v, report.seed
    )?;

    // Axes.
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        MARGIN_LEFT,
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    )?;
    writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        MARGIN_LEFT,
        HEIGHT - MARGIN_BOTTOM,
        MARGIN_LEFT,
        MARGIN_TOP
    )?;

    // Tick labels: one per T on the x axis, three on the y axis.
    for (row, &x) in report.rows.iter().zip(&xs) {
        let px = to_x(x);
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            px,
            HEIGHT - MARGIN_BOTTOM,
            px,
            HEIGHT - MARGIN_BOTTOM + 5.0
        )?;
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="11" text-anchor="middle">T={}</text>"#,
            px,
            HEIGHT - MARGIN_BOTTOM + 20.0,
            row.t
        )?;
    }
    for k in 0..3 {
        let frac = k as f64 / 2.0;
        let v = y_lo + (y_hi - y_lo) * frac;
        let py = to_y(v);
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            MARGIN_LEFT - 5.0,
            py,
            MARGIN_LEFT,
            py
        )?;
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="11" text-anchor="end">1e{:.2}</text>"#,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            v
        )?;
    }

    // 1/T guide (dashed) under the data.
    let guide_points: Vec<String> = xs
        .iter()
        .zip(&guide)
        .map(|(&x, &y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
        .collect();
    writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#999" stroke-dasharray="6,4"/>"##,
        guide_points.join(" ")
    )?;
    writeln!(
        out,
        r##"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="11" fill="#999">~1/T</text>"##,
        to_x(xs[xs.len() - 1]) - 36.0,
        to_y(guide[guide.len() - 1]) - 8.0
    )?;

    // Data polyline and points.
    let data_points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
        .collect();
    writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f5fbf" stroke-width="1.5"/>"##,
        data_points.join(" ")
    )?;
    for (&x, &y) in xs.iter().zip(&ys) {
        writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f5fbf"/>"##,
            to_x(x),
            to_y(y)
        )?;
    }

    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="middle">T</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 16.0
    )?;
    writeln!(out, "</svg>")?;
    Ok(())
}

/// Data range padded by 5% on each side; degenerate ranges get a fixed pad.
fn padded_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn remap(v: f64, lo: f64, hi: f64, out_lo: f64, out_hi: f64) -> f64 {
    out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
