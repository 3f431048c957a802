//! Minimal line-chart SVG writer. Output depends only on the input data.

use std::fmt::Write as _;
use std::io::Write;

use super::TraceSet;
use crate::error::SimError;

const WIDTH: f64 = 900.0;
const PLOT_H: f64 = 420.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 620.0;
const LEGEND_X: f64 = LEFT + PLOT_W + 20.0;
const LEGEND_ROW: f64 = 13.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// The four standard chart groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Frequency,
    Voltage,
    Loads,
    Rates,
}

impl Figure {
    pub const ALL: [Figure; 4] = [
        Figure::Frequency,
        Figure::Voltage,
        Figure::Loads,
        Figure::Rates,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            Figure::Frequency => "frequency",
            Figure::Voltage => "voltage",
            Figure::Loads => "loads",
            Figure::Rates => "rates",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Figure::Frequency => "Frequency deviation",
            Figure::Voltage => "Bus voltages",
            Figure::Loads => "Load active power",
            Figure::Rates => "Line loading rates",
        }
    }

    pub fn selection(self, traces: &TraceSet) -> Vec<String> {
        let prefix = match self {
            Figure::Frequency => return vec!["df".to_string()],
            Figure::Voltage => "v_bus_",
            Figure::Loads => "p_load_",
            Figure::Rates => "rate_line_",
        };
        traces
            .columns()
            .into_iter()
            .map(|(n, _)| n)
            .filter(|n| n.starts_with(prefix))
            .collect()
    }
}

fn unit_label(series: &str) -> &'static str {
    if series == "df" {
        "frequency deviation (Hz)"
    } else if series.starts_with("v_bus_") {
        "voltage (pu)"
    } else if series.starts_with("p_load_") {
        "active power (MW)"
    } else {
        "loading rate (pu of pickup)"
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Draws the named series against time, one polyline each, with a legend.
pub fn render_svg<W: Write>(
    traces: &TraceSet,
    selection: &[String],
    title: &str,
    mut sink: W,
) -> Result<(), SimError> {
    if selection.is_empty() {
        return Err(SimError::EmptySelection);
    }
    let cols = traces.columns();
    let mut picked = Vec::with_capacity(selection.len());
    for name in selection {
        match cols.iter().find(|(n, _)| n == name) {
            Some((_, s)) => picked.push((name.as_str(), *s)),
            None => {
                let available = cols
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(SimError::UnknownSeries {
                    name: name.clone(),
                    available,
                });
            }
        }
    }

    let (t0, t1) = match (traces.time.first(), traces.time.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let (mut lo, mut hi) = picked
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        let pad = if lo.abs() > 1e-9 {
            lo.abs() * 0.05
        } else {
            0.5
        };
        lo -= pad;
        hi += pad;
    } else {
        let pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }

    let px = |t: f64| LEFT + (t - t0) / (t1 - t0) * PLOT_W;
    let py = |v: f64| TOP + PLOT_H - (v - lo) / (hi - lo) * PLOT_H;
    let legend_h = TOP + picked.len() as f64 * LEGEND_ROW + 10.0;
    let height = (TOP + PLOT_H + 60.0).max(legend_h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" font-size="16" text-anchor="middle">{}</text>"#,
        LEFT + PLOT_W / 2.0,
        escape(title)
    );
    // axes
    let (x_axis_y, y_axis_x) = (TOP + PLOT_H, LEFT);
    let _ = writeln!(
        out,
        r#"<path d="M{y_axis_x:.2},{TOP:.2} L{y_axis_x:.2},{x_axis_y:.2} L{:.2},{x_axis_y:.2}" stroke="black" fill="none"/>"#,
        LEFT + PLOT_W
    );
    for i in 0..=5 {
        let t = t0 + (t1 - t0) * i as f64 / 5.0;
        let x = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{x_axis_y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            x_axis_y + 5.0,
            x_axis_y + 18.0,
            tick_label(t)
        );
        let v = lo + (hi - lo) * i as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{y_axis_x:.2}" y2="{y:.2}" stroke="black"/><line x1="{y_axis_x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
            y_axis_x - 5.0,
            LEFT + PLOT_W,
            y_axis_x - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">time (s)</text>"#,
        LEFT + PLOT_W / 2.0,
        x_axis_y + 40.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        unit_label(picked[0].0)
    );

    for (idx, (name, series)) in picked.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points = traces
            .time
            .iter()
            .zip(series.iter())
            .map(|(&t, &v)| format!("{:.2},{:.2}", px(t), py(v)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
        let ly = TOP + idx as f64 * LEGEND_ROW;
        let _ = writeln!(
            out,
            r#"<line x1="{LEGEND_X:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            ly + 5.0,
            LEGEND_X + 18.0,
            ly + 5.0,
            LEGEND_X + 22.0,
            ly + 9.0,
            escape(name)
        );
    }
    let _ = writeln!(out, "</svg>");
    sink.write_all(out.as_bytes())?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
