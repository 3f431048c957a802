//! Inverse-time overcurrent relays.
//!
//! Trip time under constant current follows
//! `t(r) = alpha / (r^gamma - 1) + beta` with `r = i / pickup`.
//! Time-varying current is handled with the usual induction-disc travel
//! integral: travel advances by `dt / t(r)` while `r > 1`, trips at 1.0 and
//! drains linearly back to zero over the reset time otherwise.

use serde::{Deserialize, Serialize};

use crate::error::CalcError;

/// Default travel reset time, seconds.
pub const DEFAULT_RESET_TIME_S: f64 = 10.0;

/// A sub-step never covers more than this fraction of the current trip time.
const MAX_TRAVEL_PER_SUBSTEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayCurve {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RelayCurve {
    pub fn new(name: impl Into<String>, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            name: name.into(),
            alpha,
            beta,
            gamma,
        }
    }

    /// IEEE C37.112 moderately inverse.
    pub fn moderately_inverse() -> Self {
        Self::new("moderately-inverse", 0.0515, 0.114, 0.02)
    }

    /// IEEE C37.112 very inverse.
    pub fn very_inverse() -> Self {
        Self::new("very-inverse", 19.61, 0.491, 2.0)
    }

    /// IEEE C37.112 extremely inverse.
    pub fn extremely_inverse() -> Self {
        Self::new("extremely-inverse", 28.2, 0.1217, 2.0)
    }

    pub fn catalog() -> Vec<RelayCurve> {
        vec![
            Self::moderately_inverse(),
            Self::very_inverse(),
            Self::extremely_inverse(),
        ]
    }

    pub fn by_name(name: &str) -> Option<RelayCurve> {
        Self::catalog().into_iter().find(|c| c.name == name)
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.alpha > 0.0) {
            return Err(format!("curve {}: alpha must be positive", self.name));
        }
        if !(self.gamma > 0.0) {
            return Err(format!("curve {}: gamma must be positive", self.name));
        }
        if !(self.beta >= 0.0) {
            return Err(format!("curve {}: beta must be nonnegative", self.name));
        }
        Ok(())
    }
}

/// Case files may name a catalog curve or spell out its constants.
pub(crate) mod curve_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::RelayCurve;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Name(String),
        Params(RelayCurve),
    }

    pub fn serialize<S: Serializer>(curve: &RelayCurve, s: S) -> Result<S::Ok, S::Error> {
        match RelayCurve::by_name(&curve.name) {
            Some(known) if known == *curve => s.serialize_str(&curve.name),
            _ => curve.serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RelayCurve, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Name(name) => RelayCurve::by_name(&name)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown relay curve {name:?}"))),
            Repr::Params(c) => Ok(c),
        }
    }
}

/// Relay current relative to its pickup setting.
pub fn overcurrent_rate(current: f64, pickup: f64) -> Result<f64, CalcError> {
    if !(pickup > 0.0) {
        return Err(CalcError::NonPositivePickup(pickup));
    }
    Ok(current / pickup)
}

/// Closed-form trip time for a constant overcurrent rate.
pub fn trip_time(rate: f64, curve: &RelayCurve) -> Result<f64, CalcError> {
    if !(rate > 1.0) {
        return Err(CalcError::NoTrip(rate));
    }
    Ok(curve.alpha / (rate.powf(curve.gamma) - 1.0) + curve.beta)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelayState {
    /// Normalized disc travel; the relay operates at 1.0.
    pub epsilon: f64,
    pub tripped: bool,
    /// Relay clock reading at the operating instant.
    pub trip_time: Option<f64>,
    /// Relay clock, advanced by every step.
    pub clock: f64,
}

/// Advances the travel accumulator by `dt` seconds at a constant rate.
pub fn step_relay(
    state: &RelayState,
    rate: f64,
    dt: f64,
    curve: &RelayCurve,
    reset_time: f64,
) -> RelayState {
    debug_assert!(dt > 0.0);
    let mut next = state.clone();
    let end = state.clock + dt;
    if next.tripped {
        next.clock = end;
        return next;
    }
    match trip_time(rate, curve) {
        Ok(t_trip) => {
            let substeps = (dt / (MAX_TRAVEL_PER_SUBSTEP * t_trip)).ceil().max(1.0) as usize;
            let h = dt / substeps as f64;
            for i in 0..substeps {
                let advance = h / t_trip;
                if next.epsilon + advance >= 1.0 {
                    let clock = state.clock + i as f64 * h;
                    next.trip_time = Some(clock + (1.0 - next.epsilon) * t_trip);
                    next.tripped = true;
                    next.epsilon += advance;
                    break;
                }
                next.epsilon += advance;
            }
        }
        Err(_) => {
            next.epsilon = if reset_time > 0.0 {
                (next.epsilon - dt / reset_time).max(0.0)
            } else {
                0.0
            };
        }
    }
    next.clock = end;
    next
}

/// Time left before the relay operates if the rate stays constant.
pub fn remaining_time(state: &RelayState, rate: f64, curve: &RelayCurve) -> f64 {
    if state.tripped || state.epsilon >= 1.0 {
        return 0.0;
    }
    match trip_time(rate, curve) {
        Ok(t) => (1.0 - state.epsilon) * t,
        Err(_) => f64::INFINITY,
    }
}
