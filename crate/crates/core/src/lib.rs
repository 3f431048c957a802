//! Quasi-steady-state cascading outage simulation with a centralized
//! load-shedding controller that ranks loads by the overcurrent stress
//! they put on the lines feeding them.
//!
//! The pieces, bottom up:
//! - [`model`]: grid data, case ingestion, flow-oriented incidence matrix
//! - [`powerflow`]: Newton-Raphson AC power flow with voltage/frequency dependent loads
//! - [`relay`]: inverse-time overcurrent relays
//! - [`controller`]: impact factors, critical lines, shed priority
//! - [`cascade`]: the time-stepping engine
//! - [`report`]: traces, CSV, SVG and Markdown output

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod cascade;
pub mod controller;
pub mod error;
pub mod model;
pub mod powerflow;
pub mod relay;
pub mod report;

pub use error::{CalcError, CaseError, SimError};
