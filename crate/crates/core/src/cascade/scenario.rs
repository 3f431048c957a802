use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::FrequencyConfig;
use crate::controller::PolicyConfig;
use crate::error::SimError;
use crate::model::{load_case_file, Network};
use crate::powerflow::SolverConfig;
use crate::relay::DEFAULT_RESET_TIME_S;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContingencyKind {
    /// Target: 1-based position in the case's generator list.
    GeneratorOutage,
    /// Target: line id.
    LineOutage,
    /// Target: bus id of the load; every feeder opens.
    LoadOutage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: ContingencyKind,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelayConfig {
    pub reset_time_s: f64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            reset_time_s: DEFAULT_RESET_TIME_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Case file path, relative to the scenario file.
    pub case: PathBuf,
    #[serde(default)]
    pub events: Vec<Event>,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub controller: PolicyConfig,
    #[serde(default)]
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub relay: RelayConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_dt() -> f64 {
    0.1
}

impl Scenario {
    /// Checks timing and that every event target exists in `network`.
    pub fn check(&self, network: &Network) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Scenario(m));
        if !(self.dt > 0.0) {
            return bad(format!("dt {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0) {
            return bad(format!("t_end {} must be nonnegative", self.t_end));
        }
        if !(self.controller.control_interval_s > 0.0) {
            return bad("control_interval_s must be positive".into());
        }
        if !(self.relay.reset_time_s >= 0.0) {
            return bad("reset_time_s must be nonnegative".into());
        }
        for (i, ev) in self.events.iter().enumerate() {
            if !(ev.t >= 0.0 && ev.t <= self.t_end) {
                return bad(format!(
                    "event {i} at t={} outside [0, {}]",
                    ev.t, self.t_end
                ));
            }
            if i > 0 && ev.t < self.events[i - 1].t {
                return bad(format!("event {i} is out of time order"));
            }
            let exists = match ev.kind {
                ContingencyKind::GeneratorOutage => {
                    (1..=network.generators.len()).contains(&ev.target)
                }
                ContingencyKind::LineOutage => (1..=network.n_line()).contains(&ev.target),
                ContingencyKind::LoadOutage => network.loads.iter().any(|l| l.bus == ev.target),
            };
            if !exists {
                return bad(format!("event {i}: no {:?} target {}", ev.kind, ev.target));
            }
        }
        Ok(())
    }
}

pub fn load_scenario<R: Read>(source: R) -> Result<Scenario, SimError> {
    serde_json::from_reader(source)
        .map_err(|e| SimError::Scenario(format!("schema violation: {e}")))
}

/// Reads a scenario and the case it references, and cross-checks them.
pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<(Scenario, Network), SimError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut scenario = load_scenario(std::io::BufReader::new(file))?;
    let case_path = path.parent().unwrap_or(Path::new(".")).join(&scenario.case);
    let network = load_case_file(&case_path)?;
    scenario.case = case_path;
    scenario.check(&network)?;
    Ok((scenario, network))
}
