//! AC power flow with voltage- and frequency-dependent loads.

mod load;
mod newton;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cascade::{detect_islands, Island, SystemState};
use crate::error::CalcError;
use crate::model::Network;

pub use load::{connected_fraction, effective_load};
pub use newton::{NodeKind, PowerFlowProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Mismatch tolerance, pu.
    pub tol: f64,
    pub max_iter: usize,
    pub flat_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 30,
            flat_start: false,
        }
    }
}

/// Solved operating point. Arrays are indexed like the network's element
/// vectors; elements outside the solved islands are zero and inactive.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowSolution {
    pub v_mag: Vec<f64>,
    pub v_ang: Vec<f64>,
    pub bus_active: Vec<bool>,
    /// MW / MVAr leaving the from-end and to-end terminals into the line.
    pub p_from: Vec<f64>,
    pub q_from: Vec<f64>,
    pub p_to: Vec<f64>,
    pub q_to: Vec<f64>,
    /// Larger terminal current, amps.
    pub i_line_amps: Vec<f64>,
    /// Larger terminal current in pu of the line's thermal rating.
    pub i_line: Vec<f64>,
    pub line_active: Vec<bool>,
    /// Electrical output per generator, MW / MVAr.
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    /// Effective demand per load, MW / MVAr.
    pub p_load: Vec<f64>,
    pub q_load: Vec<f64>,
    /// Generation at the slack bus(es), MW.
    pub p_slack: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute mismatch at the returned point, pu.
    pub max_mismatch: f64,
    pub mismatch_history: Vec<f64>,
    pub failure: Option<String>,
}

impl PowerFlowSolution {
    /// An all-dead solution: nothing energized.
    pub fn empty(network: &Network) -> Self {
        let (n, b, g, l) = (
            network.n_bus(),
            network.n_line(),
            network.generators.len(),
            network.loads.len(),
        );
        Self {
            v_mag: vec![0.0; n],
            v_ang: vec![0.0; n],
            bus_active: vec![false; n],
            p_from: vec![0.0; b],
            q_from: vec![0.0; b],
            p_to: vec![0.0; b],
            q_to: vec![0.0; b],
            i_line_amps: vec![0.0; b],
            i_line: vec![0.0; b],
            line_active: vec![false; b],
            p_gen: vec![0.0; g],
            q_gen: vec![0.0; g],
            p_load: vec![0.0; l],
            q_load: vec![0.0; l],
            p_slack: 0.0,
            converged: true,
            iterations: 0,
            max_mismatch: 0.0,
            mismatch_history: Vec::new(),
            failure: None,
        }
    }

    /// Copies the energized elements of another island's solution into this one.
    pub fn absorb(&mut self, other: &PowerFlowSolution) {
        for i in 0..self.v_mag.len() {
            if other.bus_active[i] {
                self.v_mag[i] = other.v_mag[i];
                self.v_ang[i] = other.v_ang[i];
                self.bus_active[i] = true;
            }
        }
        for k in 0..self.p_from.len() {
            if other.line_active[k] {
                self.p_from[k] = other.p_from[k];
                self.q_from[k] = other.q_from[k];
                self.p_to[k] = other.p_to[k];
                self.q_to[k] = other.q_to[k];
                self.i_line_amps[k] = other.i_line_amps[k];
                self.i_line[k] = other.i_line[k];
                self.line_active[k] = true;
            }
        }
        for (dst, src) in self.p_gen.iter_mut().zip(&other.p_gen) {
            *dst += src;
        }
        for (dst, src) in self.q_gen.iter_mut().zip(&other.q_gen) {
            *dst += src;
        }
        for (dst, src) in self.p_load.iter_mut().zip(&other.p_load) {
            *dst += src;
        }
        for (dst, src) in self.q_load.iter_mut().zip(&other.q_load) {
            *dst += src;
        }
        self.p_slack += other.p_slack;
        self.converged &= other.converged;
        self.iterations = self.iterations.max(other.iterations);
        self.max_mismatch = self.max_mismatch.max(other.max_mismatch);
        self.mismatch_history
            .extend_from_slice(&other.mismatch_history);
        if other.failure.is_some() {
            self.failure.clone_from(&other.failure);
        }
    }

    /// Generation minus demand minus series losses, `(MW, MVAr)`.
    /// Line charging is counted inside the line terms.
    pub fn balance_residual(&self) -> (f64, f64) {
        let gen_p: f64 = self.p_gen.iter().sum();
        let gen_q: f64 = self.q_gen.iter().sum();
        let load_p: f64 = self.p_load.iter().sum();
        let load_q: f64 = self.q_load.iter().sum();
        let loss_p: f64 = self.p_from.iter().zip(&self.p_to).map(|(a, b)| a + b).sum();
        let loss_q: f64 = self.q_from.iter().zip(&self.q_to).map(|(a, b)| a + b).sum();
        (gen_p - load_p - loss_p, gen_q - load_q - loss_q)
    }

    pub fn losses_mw(&self) -> f64 {
        self.p_from.iter().zip(&self.p_to).map(|(a, b)| a + b).sum()
    }
}

/// Current of line `k` in pu of its rating: the larger of its two terminal currents.
pub fn line_current(solution: &PowerFlowSolution, k: usize) -> Result<f64, CalcError> {
    if !solution.line_active.get(k).copied().unwrap_or(false) {
        return Err(CalcError::LineOutOfService(k + 1));
    }
    Ok(solution.i_line[k])
}

/// Solves the island holding the configured slack bus, warm-starting from
/// the state's last solution unless `config.flat_start` is set.
pub fn solve_ac(
    network: &Network,
    state: &SystemState,
    config: &SolverConfig,
) -> PowerFlowSolution {
    let slack = network.slack_index().unwrap_or(0);
    let island = detect_islands(network, state)
        .into_iter()
        .find(|isl| isl.buses.contains(&slack))
        .map(|mut isl| {
            isl.slack = slack;
            isl
        })
        .expect("every bus belongs to an island");
    solve_island(network, state, &island, config)
}

/// Newton-Raphson on one connected island. A warm start that fails is
/// retried once from a flat start before the island is reported unsolvable.
pub fn solve_island(
    network: &Network,
    state: &SystemState,
    island: &Island,
    config: &SolverConfig,
) -> PowerFlowSolution {
    let warm = match (&state.last_solution, config.flat_start) {
        (Some(sol), false) => Some((sol.v_mag.as_slice(), sol.v_ang.as_slice())),
        _ => None,
    };
    let first = newton(network, state, island, config, warm);
    if first.converged || warm.is_none() {
        return first;
    }
    let mut retry = newton(network, state, island, config, None);
    let mut history = first.mismatch_history;
    history.extend_from_slice(&retry.mismatch_history);
    retry.mismatch_history = history;
    retry.iterations += first.iterations;
    retry
}

/// Largest per-iteration change allowed in any angle (rad) or magnitude (pu).
const MAX_STEP: f64 = 0.5;

fn newton(
    network: &Network,
    state: &SystemState,
    island: &Island,
    config: &SolverConfig,
    warm: Option<(&[f64], &[f64])>,
) -> PowerFlowSolution {
    let problem = PowerFlowProblem::new(network, state, island, warm);
    let mut x = problem.initial_x();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut failure = None;

    let mut f = problem.mismatch(&x);
    let mut max_mis = inf_norm(&f);
    history.push(max_mis);
    while max_mis > config.tol {
        if iterations >= config.max_iter {
            failure = Some(format!("no convergence after {iterations} iterations"));
            break;
        }
        let Some(dx) = problem.newton_step(&x, &f) else {
            failure = Some("singular jacobian".to_string());
            break;
        };
        let biggest = dx.amax();
        let scale = if biggest > MAX_STEP {
            MAX_STEP / biggest
        } else {
            1.0
        };
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi += scale * d;
        }
        iterations += 1;
        f = problem.mismatch(&x);
        max_mis = inf_norm(&f);
        history.push(max_mis);
        let (_, vm) = problem.expand(&x);
        if !max_mis.is_finite() || vm.iter().any(|&v| !(v > 0.0)) {
            failure = Some("voltage collapse".to_string());
            break;
        }
    }

    let (theta, vm) = problem.expand(&x);
    let mut sol = assemble(network, state, &problem, &theta, &vm);
    sol.converged = failure.is_none();
    sol.iterations = iterations;
    sol.max_mismatch = max_mis;
    sol.mismatch_history = history;
    sol.failure = failure;
    sol
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(
        0.0,
        |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

/// Line flows, generator outputs and load demands at a solved point.
fn assemble(
    network: &Network,
    state: &SystemState,
    problem: &PowerFlowProblem,
    theta: &[f64],
    vm: &[f64],
) -> PowerFlowSolution {
    let s_base = network.s_base_mva;
    let mut sol = PowerFlowSolution::empty(network);
    let mut local = vec![usize::MAX; network.n_bus()];
    for (l, &g) in problem.buses.iter().enumerate() {
        local[g] = l;
        sol.v_mag[g] = vm[l];
        sol.v_ang[g] = theta[l];
        sol.bus_active[g] = true;
    }
    let phasor = |l: usize| Complex64::from_polar(vm[l], theta[l]);

    for (k, line) in network.lines.iter().enumerate() {
        let (fg, tg) = (line.from_bus - 1, line.to_bus - 1);
        let (f, t) = (local[fg], local[tg]);
        if !state.line_in_service[k] || f == usize::MAX || t == usize::MAX {
            continue;
        }
        let y = Complex64::new(1.0, 0.0) / Complex64::new(line.r, line.x);
        let ysh = Complex64::new(0.0, line.b_shunt / 2.0);
        let (vf, vt) = (phasor(f), phasor(t));
        let i_f = (vf - vt) * y + vf * ysh;
        let i_t = (vt - vf) * y + vt * ysh;
        let s_f = vf * i_f.conj() * s_base;
        let s_t = vt * i_t.conj() * s_base;
        sol.p_from[k] = s_f.re;
        sol.q_from[k] = s_f.im;
        sol.p_to[k] = s_t.re;
        sol.q_to[k] = s_t.im;
        let amps_f = i_f.norm() * network.base_current_amps(fg);
        let amps_t = i_t.norm() * network.base_current_amps(tg);
        let amps = amps_f.max(amps_t);
        sol.i_line_amps[k] = amps;
        sol.i_line[k] = amps / line.rating_amps;
        sol.line_active[k] = true;
    }

    for (li, load) in network.loads.iter().enumerate() {
        let l = local[load.bus - 1];
        if l != usize::MAX {
            let (p, q) = problem.load_at(l, vm[l]);
            sol.p_load[li] = p * s_base;
            sol.q_load[li] = q * s_base;
        }
    }

    // Generators: scheduled output at PV/PQ buses, residual at the slack.
    let (p_inj, q_inj) = problem.injections(theta, vm);
    for (l, &g) in problem.buses.iter().enumerate() {
        let gens: Vec<usize> = network
            .generators
            .iter()
            .enumerate()
            .filter(|(gi, gen)| gen.bus == g + 1 && state.gen_in_service[*gi])
            .map(|(gi, _)| gi)
            .collect();
        if gens.is_empty() {
            continue;
        }
        let (pl, ql) = problem.load_at(l, vm[l]);
        let bus_q = (q_inj[l] + ql) * s_base;
        let q_share = bus_q / gens.len() as f64;
        if problem.kinds[l] == NodeKind::Slack {
            let bus_p = (p_inj[l] + pl) * s_base;
            sol.p_slack += bus_p;
            let sched: f64 = gens.iter().map(|&gi| state.gen_output[gi]).sum();
            for &gi in &gens {
                let w = if sched > 0.0 {
                    state.gen_output[gi] / sched
                } else {
                    1.0 / gens.len() as f64
                };
                sol.p_gen[gi] = bus_p * w;
            }
        } else {
            for &gi in &gens {
                sol.p_gen[gi] = state.gen_output[gi];
            }
        }
        if problem.kinds[l] != NodeKind::Pq {
            for &gi in &gens {
                sol.q_gen[gi] = q_share;
            }
        }
    }
    sol
}
