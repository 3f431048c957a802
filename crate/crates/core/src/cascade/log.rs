use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    AppliedContingency,
    RelayTrip,
    ShedCommand,
    IslandBlackout,
    ControllerExhausted,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: f64,
    pub kind: EventKind,
    pub subject: String,
    pub cause: String,
    /// Line id for trips, sheds (causing line) and exhaustion.
    #[serde(skip)]
    pub line: Option<usize>,
    /// Load bus id and 1-based stage for sheds.
    #[serde(skip)]
    pub load_bus: Option<usize>,
    #[serde(skip)]
    pub stage: Option<usize>,
    /// Nominal MW removed by a shed.
    #[serde(skip)]
    pub mw: Option<f64>,
}

impl LogRecord {
    pub fn new(
        t: f64,
        kind: EventKind,
        subject: impl Into<String>,
        cause: impl Into<String>,
    ) -> Self {
        Self {
            t: round_time(t),
            kind,
            subject: subject.into(),
            cause: cause.into(),
            line: None,
            load_bus: None,
            stage: None,
            mw: None,
        }
    }
}

/// Strips float noise from step-multiple times so logs stay readable and stable.
pub(crate) fn round_time(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

/// Time-ordered event records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    records: Vec<LogRecord>,
}

impl EventLog {
    pub fn push(&mut self, record: LogRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.t <= record.t));
        self.records.push(record);
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &LogRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    /// One JSON object per line: `{t, kind, subject, cause}`.
    pub fn write_jsonl<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut sink, r)?;
            sink.write_all(b"\n")?;
        }
        Ok(())
    }
}
