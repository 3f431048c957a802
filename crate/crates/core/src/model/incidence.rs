use super::Network;
use crate::powerflow::PowerFlowSolution;

/// Flows below this magnitude (pu on the system base) are oriented from -> to.
pub const NEAR_ZERO_FLOW_PU: f64 = 1e-6;

/// Bus-by-line matrix of flow directions: +1 where a line's active power
/// enters the bus, -1 where it leaves, 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedIncidence {
    n_bus: usize,
    n_line: usize,
    entries: Vec<i8>,
    pub valid_at: f64,
}

impl OrientedIncidence {
    pub fn zeros(n_bus: usize, n_line: usize, valid_at: f64) -> Self {
        Self {
            n_bus,
            n_line,
            entries: vec![0; n_bus * n_line],
            valid_at,
        }
    }

    pub fn n_bus(&self) -> usize {
        self.n_bus
    }

    pub fn n_line(&self) -> usize {
        self.n_line
    }

    pub fn get(&self, bus: usize, line: usize) -> i8 {
        self.entries[bus * self.n_line + line]
    }

    pub fn set(&mut self, bus: usize, line: usize, value: i8) {
        debug_assert!((-1..=1).contains(&value));
        self.entries[bus * self.n_line + line] = value;
    }

    pub fn column(&self, line: usize) -> impl Iterator<Item = i8> + '_ {
        (0..self.n_bus).map(move |i| self.get(i, line))
    }

    pub fn row(&self, bus: usize) -> &[i8] {
        &self.entries[bus * self.n_line..(bus + 1) * self.n_line]
    }
}

/// Orients every energized line by the sign of its sending-end MW flow.
pub fn build_incidence(
    network: &Network,
    flows: &PowerFlowSolution,
    valid_at: f64,
) -> OrientedIncidence {
    let mut a = OrientedIncidence::zeros(network.n_bus(), network.n_line(), valid_at);
    let eps_mw = NEAR_ZERO_FLOW_PU * network.s_base_mva;
    for (k, line) in network.lines.iter().enumerate() {
        if !flows.line_active[k] {
            continue;
        }
        let (from, to) = (line.from_bus - 1, line.to_bus - 1);
        let p = flows.p_from[k];
        let (source, sink) = if p.abs() < eps_mw || p > 0.0 {
            (from, to)
        } else {
            (to, from)
        };
        a.set(source, k, -1);
        a.set(sink, k, 1);
    }
    a
}
