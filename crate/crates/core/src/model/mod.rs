//! Grid data model: buses, lines, loads and generators.
//!
//! Element ids in a case file are 1-based and dense. After [`load_case`]
//! the element vectors are sorted by id, so a bus or line with id `k`
//! always lives at index `k - 1`. Everything downstream works with
//! 0-based indices and converts back to ids only for display.

mod case;
mod incidence;
mod validate;

use serde::{Deserialize, Serialize};

use crate::relay::RelayCurve;

pub use case::{load_case, load_case_file, to_json};
pub use incidence::{build_incidence, OrientedIncidence, NEAR_ZERO_FLOW_PU};
pub use validate::{validate, Element, Violation};

/// Default per-load voltage exponent for active power.
pub const DEFAULT_KPV: f64 = 1.0;
/// Default per-load voltage exponent for reactive power.
pub const DEFAULT_KQV: f64 = 2.0;
/// Default frequency sensitivity in pu of load per Hz (1 %/% on a 60 Hz system).
pub const DEFAULT_KPF: f64 = 1.0 / 60.0;
/// Default number of equal feeders a load is split into.
pub const DEFAULT_STAGE_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    pub base_kv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_setpoint: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: usize,
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_shunt: f64,
    pub rating_amps: f64,
    /// Relay pickup in amps. Defaults to the thermal rating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pickup_current: Option<f64>,
    #[serde(
        default = "RelayCurve::very_inverse",
        with = "crate::relay::curve_serde"
    )]
    pub curve: RelayCurve,
    #[serde(default = "default_true")]
    pub in_service: bool,
}

impl Line {
    pub fn pickup_amps(&self) -> f64 {
        self.pickup_current.unwrap_or(self.rating_amps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    /// MW at nominal voltage and frequency.
    pub p0: f64,
    /// MVAr at nominal voltage and frequency.
    pub q0: f64,
    #[serde(default = "default_stages")]
    pub stages: Vec<f64>,
    /// Filled with `true` for every stage when omitted.
    #[serde(default)]
    pub stage_status: Vec<bool>,
    #[serde(default = "default_kpv")]
    pub kpv: f64,
    #[serde(default = "default_kqv")]
    pub kqv: f64,
    #[serde(default = "default_kpf")]
    pub kpf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_set: f64,
    pub p_max: f64,
    pub droop: f64,
    pub inertia_h: f64,
    pub mva_base: f64,
    #[serde(default = "default_true")]
    pub in_service: bool,
}

/// Immutable grid description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub s_base_mva: f64,
    pub f0_hz: f64,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub generators: Vec<Generator>,
}

impl Network {
    pub fn n_bus(&self) -> usize {
        self.buses.len()
    }

    pub fn n_line(&self) -> usize {
        self.lines.len()
    }

    /// Index of the configured slack bus, if exactly one exists.
    pub fn slack_index(&self) -> Option<usize> {
        let mut it = self
            .buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == BusKind::Slack);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    }

    /// Index into `loads` of the load at the given bus index.
    pub fn load_at(&self, bus_idx: usize) -> Option<usize> {
        self.loads.iter().position(|l| l.bus == bus_idx + 1)
    }

    /// Base current in amps for a bus on the system MVA base.
    pub fn base_current_amps(&self, bus_idx: usize) -> f64 {
        self.s_base_mva * 1000.0 / (3f64.sqrt() * self.buses[bus_idx].base_kv)
    }

    pub fn total_load_mw(&self) -> f64 {
        self.loads.iter().map(|l| l.p0).sum()
    }
}

fn default_true() -> bool {
    true
}

fn default_stages() -> Vec<f64> {
    vec![1.0 / DEFAULT_STAGE_COUNT as f64; DEFAULT_STAGE_COUNT]
}

fn default_kpv() -> f64 {
    DEFAULT_KPV
}

fn default_kqv() -> f64 {
    DEFAULT_KQV
}

fn default_kpf() -> f64 {
    DEFAULT_KPF
}
