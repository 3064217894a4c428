//! Minimal self-contained SVG line charts.

use std::fmt::Write as _;

use crate::error::CliError;
use crate::table::SeriesTable;

#[derive(Debug, Clone)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    /// Draw an error bar on every n-th point of columns with errors.
    pub errorbar_every: usize,
    pub palette: Vec<&'static str>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 720.0,
            height: 480.0,
            errorbar_every: 10,
            palette: vec!["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"],
        }
    }
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".to_string() } else { s.to_string() }
    }
}

/// Renders `table` as a line chart with axes, a legend and, for columns
/// carrying standard errors, error bars.
pub fn emit_svg(table: &SeriesTable, style: &SvgStyle) -> Result<String, CliError> {
    table.validate()?;
    let (x0, x1) = bounds(table.x.iter().copied());
    let (y0, y1) = bounds(table.columns.iter().flat_map(|c| {
        let err = c.stderr.clone().unwrap_or_else(|| vec![0.0; c.values.len()]);
        c.values
            .iter()
            .zip(err)
            .flat_map(|(&v, e)| [v - e, v + e])
            .collect::<Vec<_>>()
    }));
    let plot_w = style.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = style.height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(&table.title)
    );

    // axes
    let _ = writeln!(
        w,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{l:.1}" y1="{b:.1}" x2="{r:.1}" y2="{b:.1}"/><line x1="{l:.1}" y1="{t:.1}" x2="{l:.1}" y2="{b:.1}"/></g>"#,
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (tx, ty) = (px(xv), py(yv));
        let _ = writeln!(
            w,
            r#"<line x1="{tx:.1}" y1="{b:.1}" x2="{tx:.1}" y2="{b2:.1}" stroke="black"/><text x="{tx:.1}" y="{ly:.1}" text-anchor="middle">{}</text>"#,
            tick_label(xv),
            b = MARGIN_TOP + plot_h,
            b2 = MARGIN_TOP + plot_h + 5.0,
            ly = MARGIN_TOP + plot_h + 18.0
        );
        let _ = writeln!(
            w,
            r#"<line x1="{l2:.1}" y1="{ty:.1}" x2="{l:.1}" y2="{ty:.1}" stroke="black"/><text x="{lx:.1}" y="{tyl:.1}" text-anchor="end">{}</text>"#,
            tick_label(yv),
            l = MARGIN_LEFT,
            l2 = MARGIN_LEFT - 5.0,
            lx = MARGIN_LEFT - 8.0,
            tyl = ty + 4.0
        );
    }
    let _ = writeln!(
        w,
        r#"<text class="xlabel" x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        style.height - 12.0,
        escape(&table.x_name)
    );
    let _ = writeln!(
        w,
        r#"<text class="ylabel" x="18" y="{cy:.1}" text-anchor="middle" transform="rotate(-90 18 {cy:.1})">{}</text>"#,
        escape(&table.y_label),
        cy = MARGIN_TOP + plot_h / 2.0
    );

    for (k, col) in table.columns.iter().enumerate() {
        let color = style.palette[k % style.palette.len()];
        let points: Vec<String> = table
            .x
            .iter()
            .zip(&col.values)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        if let Some(err) = &col.stderr {
            let every = style.errorbar_every.max(1);
            let _ = write!(w, r#"<g class="errorbars" stroke="{color}">"#);
            for i in (0..table.x.len()).step_by(every) {
                let (x, v, e) = (px(table.x[i]), col.values[i], err[i]);
                let _ = write!(
                    w,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                    py(v - e),
                    py(v + e)
                );
            }
            let _ = writeln!(w, "</g>");
        }
        let ly = MARGIN_TOP + 10.0 + 18.0 * k as f64;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            w,
            r#"<g class="legend"><line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&col.name)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(out)
}
