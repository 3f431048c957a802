//! Center-of-inertia frequency proxy and proportional governor response.

use serde::{Deserialize, Serialize};

use super::SystemState;
use crate::model::Network;

/// Scenario-level frequency model settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyConfig {
    /// Load damping D, pu power per pu frequency.
    pub damping_pu: f64,
    /// Overrides the aggregated system inertia constant, seconds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_sys_s: Option<f64>,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        Self {
            damping_pu: 1.0,
            h_sys_s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoiParams {
    /// Aggregate inertia constant on `s_sys_mva`, seconds.
    pub h_sys: f64,
    pub s_sys_mva: f64,
    pub f0_hz: f64,
    pub damping_pu: f64,
    pub dt: f64,
}

/// `(H_sys, S_sys)`: rating-weighted inertia of the in-service machines and their total rating.
pub fn inertia_aggregate(network: &Network, state: &SystemState) -> (f64, f64) {
    let (mut hs, mut s) = (0.0, 0.0);
    for (g, gen) in network.generators.iter().enumerate() {
        if state.gen_in_service[g] && state.bus_energized[gen.bus - 1] {
            hs += gen.inertia_h * gen.mva_base;
            s += gen.mva_base;
        }
    }
    if s > 0.0 {
        (hs / s, s)
    } else {
        (0.0, 0.0)
    }
}

/// One forward-Euler step of
/// `2 H S / f0 * d(df)/dt = imbalance - D S df / f0`.
pub fn step_frequency(df: f64, imbalance_mw: f64, p: &CoiParams) -> f64 {
    if !(p.h_sys > 0.0 && p.s_sys_mva > 0.0) {
        return df;
    }
    let accel = (imbalance_mw - p.damping_pu * p.s_sys_mva * df / p.f0_hz) * p.f0_hz
        / (2.0 * p.h_sys * p.s_sys_mva);
    df + p.dt * accel
}

/// Governor set-points after a proportional droop response to `df`.
///
/// Pickup is `-(1/R) (df/f0) S_g`, clamped to the unit's headroom.
pub fn redistribute_droop(network: &Network, state: &SystemState, df: f64) -> Vec<f64> {
    network
        .generators
        .iter()
        .enumerate()
        .map(|(g, gen)| {
            if !state.gen_in_service[g] {
                return 0.0;
            }
            let pickup = -(df / network.f0_hz) / gen.droop * gen.mva_base;
            gen.p_set + pickup.clamp(0.0, gen.p_max - gen.p_set)
        })
        .collect()
}
