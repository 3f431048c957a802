//! Quasi-static cascade engine.

mod engine;
mod frequency;
mod islands;
mod log;
mod scenario;

use crate::model::Network;
use crate::powerflow::PowerFlowSolution;
use crate::relay::RelayState;

pub use engine::{run, run_with_network, RunResult, StepBalance};
pub use frequency::{
    inertia_aggregate, redistribute_droop, step_frequency, CoiParams, FrequencyConfig,
};
pub use islands::{detect_islands, Island};
pub use log::{EventKind, EventLog, LogRecord};
pub use scenario::{
    load_scenario, load_scenario_file, ContingencyKind, Event, RelayConfig, Scenario,
};

/// Mutable per-step simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    pub line_in_service: Vec<bool>,
    pub gen_in_service: Vec<bool>,
    pub bus_energized: Vec<bool>,
    /// Per load, per stage: connected flag.
    pub load_stages: Vec<Vec<bool>>,
    /// Frequency deviation from nominal, Hz.
    pub df: f64,
    pub relays: Vec<RelayState>,
    /// Mechanical power per generator after governor response, MW.
    pub gen_output: Vec<f64>,
    pub last_solution: Option<PowerFlowSolution>,
}

impl SystemState {
    pub fn initial(network: &Network) -> Self {
        Self {
            time: 0.0,
            line_in_service: network.lines.iter().map(|l| l.in_service).collect(),
            gen_in_service: network.generators.iter().map(|g| g.in_service).collect(),
            bus_energized: vec![true; network.n_bus()],
            load_stages: network
                .loads
                .iter()
                .map(|l| l.stage_status.clone())
                .collect(),
            df: 0.0,
            relays: vec![RelayState::default(); network.n_line()],
            gen_output: network
                .generators
                .iter()
                .map(|g| if g.in_service { g.p_set } else { 0.0 })
                .collect(),
            last_solution: None,
        }
    }

    pub fn disconnected_stages(&self) -> usize {
        self.load_stages.iter().flatten().filter(|&&on| !on).count()
    }
}
