//! Centralized shedding policy driven by line overcurrent stress.
//!
//! Each load bus is scored against every line by `IF(i,k) = A(i,k) * r(k)`,
//! where `A` is the flow-oriented incidence matrix and `r` the loading
//! rates. A load's critical line is its largest positive score; the time
//! that line's relay has left becomes the load's urgency, and loads are
//! shed one feeder at a time in order of urgency.

use serde::{Deserialize, Serialize};

use crate::cascade::SystemState;
use crate::error::CalcError;
use crate::model::{build_incidence, Network, OrientedIncidence};
use crate::powerflow::PowerFlowSolution;
use crate::relay::{overcurrent_rate, remaining_time};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub enabled: bool,
    pub trigger_rate: f64,
    pub safety_margin_s: f64,
    pub control_interval_s: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            trigger_rate: 1.0,
            safety_margin_s: 1.0,
            control_interval_s: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactFactorTable {
    n_bus: usize,
    n_line: usize,
    /// Row-major bus x line scores.
    pub if_matrix: Vec<f64>,
    /// Per bus index: critical line index, if any.
    pub critical_line: Vec<Option<usize>>,
    /// Per bus index: seconds left on the critical line's relay.
    pub assigned_time: Vec<Option<f64>>,
}

impl ImpactFactorTable {
    pub fn n_bus(&self) -> usize {
        self.n_bus
    }

    pub fn n_line(&self) -> usize {
        self.n_line
    }

    pub fn get(&self, bus: usize, line: usize) -> f64 {
        self.if_matrix[bus * self.n_line + line]
    }

    pub fn row(&self, bus: usize) -> &[f64] {
        &self.if_matrix[bus * self.n_line..(bus + 1) * self.n_line]
    }
}

/// One feeder disconnection.
#[derive(Debug, Clone, PartialEq)]
pub struct ShedCommand {
    /// Bus id of the load.
    pub load_bus: usize,
    /// 1-based stage number.
    pub stage: usize,
    pub issue_time: f64,
    /// Line id whose stress motivated the shed.
    pub cause: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlAction {
    pub commands: Vec<ShedCommand>,
    /// Set when lines are about to trip but no sheddable load remains:
    /// the id of the most urgent such line.
    pub exhausted: Option<usize>,
}

/// Loading rate of every line: current over relay pickup, zero when de-energized.
pub fn loading_rates(solution: &PowerFlowSolution, network: &Network) -> Vec<f64> {
    network
        .lines
        .iter()
        .enumerate()
        .map(|(k, line)| {
            if solution.line_active[k] {
                overcurrent_rate(solution.i_line_amps[k], line.pickup_amps()).unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Scores `A(i,k) * r(k)`; critical lines and times are left unset.
pub fn impact_factors(
    incidence: &OrientedIncidence,
    rates: &[f64],
) -> Result<ImpactFactorTable, CalcError> {
    let (n, b) = (incidence.n_bus(), incidence.n_line());
    if rates.len() != b {
        return Err(CalcError::DimensionMismatch {
            expected: b,
            got: rates.len(),
        });
    }
    let mut if_matrix = vec![0.0; n * b];
    for i in 0..n {
        for (k, entry) in incidence.row(i).iter().enumerate() {
            if *entry != 0 {
                if_matrix[i * b + k] = f64::from(*entry) * rates[k];
            }
        }
    }
    Ok(ImpactFactorTable {
        n_bus: n,
        n_line: b,
        if_matrix,
        critical_line: vec![None; n],
        assigned_time: vec![None; n],
    })
}

/// Line with the largest positive score in `row`; ties go to the line
/// with less relay time left, then to the lower index.
pub fn critical_line(row: &[f64], line_times: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &score) in row.iter().enumerate() {
        if !(score > 0.0) {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(c) if score > row[c] || (score == row[c] && line_times[k] < line_times[c]) => {
                Some(k)
            }
            keep => keep,
        };
    }
    best
}

/// Fills critical lines for the given bus rows.
pub fn select_critical(table: &mut ImpactFactorTable, load_buses: &[usize], line_times: &[f64]) {
    for &i in load_buses {
        let c = critical_line(table.row(i), line_times);
        table.critical_line[i] = c;
    }
}

/// Each load inherits the remaining relay time of its critical line.
pub fn assign_times(table: &mut ImpactFactorTable, line_times: &[f64]) {
    for i in 0..table.n_bus {
        table.assigned_time[i] = table.critical_line[i].map(|c| line_times[c]);
    }
}

/// Load buses with finite urgency, most urgent first. Ties go to the
/// larger score on the critical line, then to the lower bus index.
pub fn priority_order(table: &ImpactFactorTable) -> Vec<usize> {
    let mut buses: Vec<usize> = (0..table.n_bus)
        .filter(|&i| matches!(table.assigned_time[i], Some(t) if t.is_finite()))
        .collect();
    let score = |i: usize| table.get(i, table.critical_line[i].expect("timed rows have a line"));
    buses.sort_by(|&a, &b| {
        let (ta, tb) = (
            table.assigned_time[a].unwrap(),
            table.assigned_time[b].unwrap(),
        );
        ta.total_cmp(&tb)
            .then_with(|| score(b).total_cmp(&score(a)))
            .then_with(|| a.cmp(&b))
    });
    buses
}

/// Seconds each line's relay has left at its present rate (infinite when not timing).
pub fn relay_times(network: &Network, state: &SystemState, rates: &[f64]) -> Vec<f64> {
    network
        .lines
        .iter()
        .enumerate()
        .map(|(k, line)| {
            if rates[k] > 0.0 {
                remaining_time(&state.relays[k], rates[k], &line.curve)
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Buses hosting an energized load with at least one connected feeder.
pub fn sheddable_buses(network: &Network, state: &SystemState) -> Vec<usize> {
    network
        .loads
        .iter()
        .enumerate()
        .filter(|(li, load)| {
            state.bus_energized[load.bus - 1] && state.load_stages[*li].iter().any(|&on| on)
        })
        .map(|(_, load)| load.bus - 1)
        .collect()
}

/// Full scoring pass over a solved snapshot.
pub fn analyze(
    network: &Network,
    state: &SystemState,
    solution: &PowerFlowSolution,
) -> (ImpactFactorTable, Vec<f64>, Vec<f64>) {
    let rates = loading_rates(solution, network);
    let times = relay_times(network, state, &rates);
    let incidence = build_incidence(network, solution, state.time);
    let mut table = impact_factors(&incidence, &rates).expect("incidence sized from network");
    select_critical(&mut table, &sheddable_buses(network, state), &times);
    assign_times(&mut table, &times);
    (table, rates, times)
}

/// One control interval: at most one feeder is shed, and only when some
/// line is over the trigger rate with less than the safety margin left.
pub fn control_step(
    network: &Network,
    state: &SystemState,
    solution: &PowerFlowSolution,
    policy: &PolicyConfig,
) -> ControlAction {
    let (table, rates, times) = analyze(network, state, solution);
    let urgent = (0..network.n_line())
        .filter(|&k| rates[k] > policy.trigger_rate && times[k] < policy.safety_margin_s)
        .min_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
    let Some(urgent) = urgent else {
        return ControlAction::default();
    };

    for bus in priority_order(&table) {
        let li = network.load_at(bus).expect("priority rows are load buses");
        if let Some(stage) = state.load_stages[li].iter().position(|&on| on) {
            let cause = table.critical_line[bus].expect("timed rows have a line");
            return ControlAction {
                commands: vec![ShedCommand {
                    load_bus: bus + 1,
                    stage: stage + 1,
                    issue_time: state.time,
                    cause: cause + 1,
                }],
                exhausted: None,
            };
        }
    }
    ControlAction {
        commands: Vec::new(),
        exhausted: Some(urgent + 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn incidence_two_lines() -> OrientedIncidence {
        // bus 0 -> bus 1 on line 0, bus 1 -> bus 2 on line 1
        let mut a = OrientedIncidence::zeros(3, 2, 0.0);
        a.set(0, 0, -1);
        a.set(1, 0, 1);
        a.set(1, 1, -1);
        a.set(2, 1, 1);
        a
    }

    #[test]
    fn scores_follow_flow_direction() {
        let t = impact_factors(&incidence_two_lines(), &[1.2, 0.0]).unwrap();
        assert_eq!(t.get(1, 0), 1.2);
        assert_eq!(t.get(0, 0), -1.2);
        assert_eq!(t.get(1, 1), 0.0);
        assert_eq!(t.get(2, 1), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = impact_factors(&incidence_two_lines(), &[1.0]).unwrap_err();
        assert_eq!(
            err,
            CalcError::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn critical_line_examples() {
        let inf = [f64::INFINITY; 2];
        assert_eq!(critical_line(&[-1.2, 1.2], &inf), Some(1));
        assert_eq!(critical_line(&[-1.2, -0.3], &inf), None);
        assert_eq!(critical_line(&[0.0, 0.0], &inf), None);
        // tie: less time wins, then the lower index
        assert_eq!(critical_line(&[2.0, 2.0], &[5.0, 3.0]), Some(1));
        assert_eq!(critical_line(&[2.0, 2.0], &[3.0, 3.0]), Some(0));
    }

    fn table_with(times: &[(usize, f64, f64)], n: usize) -> ImpactFactorTable {
        // (bus, assigned time, score on its own critical line == line bus)
        let mut t = ImpactFactorTable {
            n_bus: n,
            n_line: n,
            if_matrix: vec![0.0; n * n],
            critical_line: vec![None; n],
            assigned_time: vec![None; n],
        };
        for &(bus, time, score) in times {
            t.if_matrix[bus * n + bus] = score;
            t.critical_line[bus] = Some(bus);
            t.assigned_time[bus] = Some(time);
        }
        t
    }

    #[test]
    fn priority_is_ascending_time() {
        let t = table_with(&[(0, 5.0, 1.5), (1, 2.0, 1.5)], 2);
        assert_eq!(priority_order(&t), vec![1, 0]);
    }

    #[test]
    fn infinite_times_are_excluded() {
        let t = table_with(&[(0, f64::INFINITY, 0.9), (1, f64::INFINITY, 0.5)], 2);
        assert!(priority_order(&t).is_empty());
    }

    #[test]
    fn priority_ties_prefer_larger_score_then_lower_bus() {
        let t = table_with(&[(0, 2.0, 1.5), (1, 2.0, 3.0), (2, 2.0, 1.5)], 3);
        assert_eq!(priority_order(&t), vec![1, 0, 2]);
    }

    #[test]
    fn shared_critical_line_gives_equal_times() {
        let mut a = OrientedIncidence::zeros(3, 2, 0.0);
        // line 0 feeds bus 1 from bus 0; line 1 feeds bus 2 from bus 0
        a.set(0, 0, -1);
        a.set(1, 0, 1);
        a.set(0, 1, -1);
        a.set(2, 1, 1);
        let mut t = impact_factors(&a, &[2.0, 0.5]).unwrap();
        let times = [7.0, f64::INFINITY];
        select_critical(&mut t, &[1, 2], &times);
        assign_times(&mut t, &times);
        assert_eq!(t.critical_line[1], Some(0));
        assert_eq!(t.assigned_time[1], Some(7.0));
        assert_eq!(t.assigned_time[2], Some(f64::INFINITY));
        assert_eq!(t.assigned_time[0], None);
        assert_eq!(priority_order(&t), vec![1]);
    }
}
