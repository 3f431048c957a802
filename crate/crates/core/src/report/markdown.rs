use std::fmt::Write as _;

use crate::cascade::{EventKind, RunResult};

/// Headline numbers of one run, derived from its log and traces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    /// `(t, load bus, stage, MW, causing line)` in log order.
    pub sheds: Vec<(f64, usize, usize, f64, usize)>,
    /// `(t, line)` in log order.
    pub trips: Vec<(f64, usize)>,
    pub blackouts: Vec<(f64, String)>,
    pub exhausted: Vec<(f64, String)>,
    pub final_max_rate: f64,
    pub final_max_line: Option<usize>,
    pub final_df: f64,
    pub min_df: f64,
    pub shed_mw: f64,
}

impl RunSummary {
    pub fn from_run(label: impl Into<String>, run: &RunResult) -> Self {
        let log = &run.log;
        let sheds = log
            .of_kind(EventKind::ShedCommand)
            .map(|r| {
                (
                    r.t,
                    r.load_bus.unwrap_or(0),
                    r.stage.unwrap_or(0),
                    r.mw.unwrap_or(0.0),
                    r.line.unwrap_or(0),
                )
            })
            .collect();
        let trips = log
            .of_kind(EventKind::RelayTrip)
            .map(|r| (r.t, r.line.unwrap_or(0)))
            .collect();
        let blackouts = log
            .of_kind(EventKind::IslandBlackout)
            .map(|r| (r.t, format!("{} ({})", r.subject, r.cause)))
            .collect();
        let exhausted = log
            .of_kind(EventKind::ControllerExhausted)
            .map(|r| (r.t, r.subject.clone()))
            .collect();
        let tr = &run.traces;
        let (mut final_max_rate, mut final_max_line) = (0.0, None);
        for (id, s) in tr.line_ids.iter().zip(&tr.line_rate) {
            if let Some(&r) = s.last() {
                if r > final_max_rate {
                    final_max_rate = r;
                    final_max_line = Some(*id);
                }
            }
        }
        Self {
            label: label.into(),
            sheds,
            trips,
            blackouts,
            exhausted,
            final_max_rate,
            final_max_line,
            final_df: tr.df.last().copied().unwrap_or(0.0),
            min_df: tr.df.iter().copied().fold(0.0, f64::min),
            shed_mw: run.shed_mw,
        }
    }
}

/// Markdown report over one or more runs of the same scenario.
pub fn render_report(scenario_name: &str, runs: &[RunSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Cascade report: {scenario_name}\n");
    if runs.len() > 1 {
        let _ = writeln!(
            out,
            "| run | sheds | shed MW | relay trips | blackouts | final max rate | final df (Hz) |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|---|");
        for r in runs {
            let _ = writeln!(
                out,
                "| {} | {} | {:.1} | {} | {} | {:.3} | {:.4} |",
                r.label,
                r.sheds.len(),
                r.shed_mw,
                r.trips.len(),
                r.blackouts.len(),
                r.final_max_rate,
                r.final_df
            );
        }
        out.push('\n');
    }
    for r in runs {
        let _ = writeln!(out, "## {}\n", r.label);
        let _ = writeln!(
            out,
            "- feeders shed: {} ({:.1} MW nominal)",
            r.sheds.len(),
            r.shed_mw
        );
        let _ = writeln!(out, "- relay trips: {}", r.trips.len());
        match r.final_max_line {
            Some(line) => {
                let _ = writeln!(
                    out,
                    "- final max loading rate: {:.3} on line {line}",
                    r.final_max_rate
                );
            }
            None => {
                let _ = writeln!(out, "- final max loading rate: 0");
            }
        }
        let _ = writeln!(
            out,
            "- frequency deviation: final {:.4} Hz, minimum {:.4} Hz",
            r.final_df, r.min_df
        );
        out.push('\n');
        if !r.sheds.is_empty() {
            let _ = writeln!(out, "### Shed order\n");
            let _ = writeln!(out, "| # | t (s) | load bus | stage | MW | causing line |");
            let _ = writeln!(out, "|---|---|---|---|---|---|");
            for (i, (t, bus, stage, mw, line)) in r.sheds.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "| {} | {t:.2} | {bus} | {stage} | {mw:.1} | {line} |",
                    i + 1
                );
            }
            out.push('\n');
        }
        if !r.trips.is_empty() {
            let _ = writeln!(out, "### Tripped lines\n");
            let _ = writeln!(out, "| t (s) | line |");
            let _ = writeln!(out, "|---|---|");
            for (t, line) in &r.trips {
                let _ = writeln!(out, "| {t:.3} | {line} |");
            }
            out.push('\n');
        }
        if !r.blackouts.is_empty() {
            let _ = writeln!(out, "### Blackouts\n");
            for (t, what) in &r.blackouts {
                let _ = writeln!(out, "- t = {t:.2} s: {what}");
            }
            out.push('\n');
        }
        if !r.exhausted.is_empty() {
            let _ = writeln!(out, "### Controller exhausted\n");
            for (t, what) in &r.exhausted {
                let _ = writeln!(out, "- t = {t:.2} s: {what}");
            }
            out.push('\n');
        }
    }
    out
}
