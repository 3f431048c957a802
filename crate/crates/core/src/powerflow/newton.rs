//! Polar-form Newton-Raphson on one energized island.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::load::effective_load;
use crate::cascade::{Island, SystemState};
use crate::model::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Slack,
    Pv,
    Pq,
}

/// Mismatch equations of one island, in island-local bus numbering.
///
/// Unknowns are the angles of every non-slack bus followed by the voltage
/// magnitudes of the PQ buses.
#[derive(Debug, Clone)]
pub struct PowerFlowProblem {
    /// Global bus index for each local bus.
    pub buses: Vec<usize>,
    pub kinds: Vec<NodeKind>,
    pub ybus: DMatrix<Complex64>,
    /// Scheduled generation per local bus, pu (slack entry unused).
    pub p_gen: Vec<f64>,
    /// Per local bus: (p0 pu, q0 pu, kpv, kqv, frequency factor).
    loads: Vec<Option<LoadTerm>>,
    /// Fixed voltage magnitudes (slack/PV) and starting values.
    pub v_start: Vec<f64>,
    pub theta_start: Vec<f64>,
    angle_vars: Vec<usize>,
    mag_vars: Vec<usize>,
    pub s_base: f64,
}

#[derive(Debug, Clone, Copy)]
struct LoadTerm {
    p_nom: f64,
    q_nom: f64,
    kpv: f64,
    kqv: f64,
}

impl LoadTerm {
    fn at(&self, v: f64) -> (f64, f64) {
        (self.p_nom * v.powf(self.kpv), self.q_nom * v.powf(self.kqv))
    }

    fn dv(&self, v: f64) -> (f64, f64) {
        let (p, q) = self.at(v);
        (self.kpv * p / v, self.kqv * q / v)
    }
}

impl PowerFlowProblem {
    /// Builds the island problem; `warm` supplies a starting point.
    pub fn new(
        network: &Network,
        state: &SystemState,
        island: &Island,
        warm: Option<(&[f64], &[f64])>,
    ) -> Self {
        let n = island.buses.len();
        let s_base = network.s_base_mva;
        let mut local = vec![usize::MAX; network.n_bus()];
        for (l, &g) in island.buses.iter().enumerate() {
            local[g] = l;
        }

        let mut ybus = DMatrix::<Complex64>::zeros(n, n);
        for (k, line) in network.lines.iter().enumerate() {
            if !state.line_in_service[k] {
                continue;
            }
            let (f, t) = (local[line.from_bus - 1], local[line.to_bus - 1]);
            if f == usize::MAX || t == usize::MAX {
                continue;
            }
            let y = Complex64::new(1.0, 0.0) / Complex64::new(line.r, line.x);
            let ysh = Complex64::new(0.0, line.b_shunt / 2.0);
            ybus[(f, f)] += y + ysh;
            ybus[(t, t)] += y + ysh;
            ybus[(f, t)] -= y;
            ybus[(t, f)] -= y;
        }

        let mut kinds = vec![NodeKind::Pq; n];
        let mut v_start = vec![1.0; n];
        let mut p_gen = vec![0.0; n];
        for (g, gen) in network.generators.iter().enumerate() {
            let l = local[gen.bus - 1];
            if l == usize::MAX || !state.gen_in_service[g] {
                continue;
            }
            p_gen[l] += state.gen_output[g] / s_base;
            if let Some(v) = network.buses[gen.bus - 1].v_setpoint {
                kinds[l] = NodeKind::Pv;
                v_start[l] = v;
            }
        }
        let slack_local = local[island.slack];
        kinds[slack_local] = NodeKind::Slack;
        v_start[slack_local] = network.buses[island.slack].v_setpoint.unwrap_or(1.0);

        let mut loads = vec![None; n];
        for (li, load) in network.loads.iter().enumerate() {
            let l = local[load.bus - 1];
            if l == usize::MAX {
                continue;
            }
            // Nominal-voltage demand; the voltage factor is applied per iteration.
            let (p, q) = effective_load(load, &state.load_stages[li], 1.0, state.df);
            loads[l] = Some(LoadTerm {
                p_nom: p / s_base,
                q_nom: q / s_base,
                kpv: load.kpv,
                kqv: load.kqv,
            });
        }

        let mut theta_start = vec![0.0; n];
        if let Some((vm, va)) = warm {
            for (l, &g) in island.buses.iter().enumerate() {
                if vm[g] > 0.0 {
                    theta_start[l] = va[g];
                    if kinds[l] == NodeKind::Pq {
                        v_start[l] = vm[g];
                    }
                }
            }
        }

        let angle_vars: Vec<usize> = (0..n).filter(|&i| kinds[i] != NodeKind::Slack).collect();
        let mag_vars: Vec<usize> = (0..n).filter(|&i| kinds[i] == NodeKind::Pq).collect();

        Self {
            buses: island.buses.clone(),
            kinds,
            ybus,
            p_gen,
            loads,
            v_start,
            theta_start,
            angle_vars,
            mag_vars,
            s_base,
        }
    }

    pub fn n_unknowns(&self) -> usize {
        self.angle_vars.len() + self.mag_vars.len()
    }

    pub fn initial_x(&self) -> Vec<f64> {
        self.angle_vars
            .iter()
            .map(|&i| self.theta_start[i])
            .chain(self.mag_vars.iter().map(|&i| self.v_start[i]))
            .collect()
    }

    /// Expands an unknown vector into full (angle, magnitude) arrays.
    pub fn expand(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut theta = self.theta_start.clone();
        let mut vm = self.v_start.clone();
        for (j, &i) in self.angle_vars.iter().enumerate() {
            theta[i] = x[j];
        }
        let off = self.angle_vars.len();
        for (j, &i) in self.mag_vars.iter().enumerate() {
            vm[i] = x[off + j];
        }
        (theta, vm)
    }

    /// Calculated injections `(P_i, Q_i)` in pu for every local bus.
    pub fn injections(&self, theta: &[f64], vm: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.buses.len();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let y = self.ybus[(i, j)];
                if y.re == 0.0 && y.im == 0.0 {
                    continue;
                }
                let (s, c) = (theta[i] - theta[j]).sin_cos();
                p[i] += vm[i] * vm[j] * (y.re * c + y.im * s);
                q[i] += vm[i] * vm[j] * (y.re * s - y.im * c);
            }
        }
        (p, q)
    }

    pub fn load_at(&self, local: usize, v: f64) -> (f64, f64) {
        self.loads[local].map_or((0.0, 0.0), |l| l.at(v))
    }

    /// Mismatch vector: calculated minus scheduled injection.
    pub fn mismatch(&self, x: &[f64]) -> Vec<f64> {
        let (theta, vm) = self.expand(x);
        let (p, q) = self.injections(&theta, &vm);
        let mut f = Vec::with_capacity(self.n_unknowns());
        for &i in &self.angle_vars {
            let (pl, _) = self.load_at(i, vm[i]);
            f.push(p[i] - (self.p_gen[i] - pl));
        }
        for &i in &self.mag_vars {
            let (_, ql) = self.load_at(i, vm[i]);
            f.push(q[i] + ql);
        }
        f
    }

    /// Analytic Jacobian of [`Self::mismatch`].
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let (theta, vm) = self.expand(x);
        let (p, q) = self.injections(&theta, &vm);
        let n = self.buses.len();
        let na = self.angle_vars.len();
        let dim = self.n_unknowns();

        // Column position of each bus's angle / magnitude unknown.
        let mut acol = vec![usize::MAX; n];
        let mut mcol = vec![usize::MAX; n];
        for (j, &i) in self.angle_vars.iter().enumerate() {
            acol[i] = j;
        }
        for (j, &i) in self.mag_vars.iter().enumerate() {
            mcol[i] = na + j;
        }

        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        let rows_p = self
            .angle_vars
            .iter()
            .enumerate()
            .map(|(r, &i)| (r, i, true));
        let rows_q = self
            .mag_vars
            .iter()
            .enumerate()
            .map(|(r, &i)| (na + r, i, false));
        for (row, i, is_p) in rows_p.chain(rows_q) {
            for j in 0..n {
                let y = self.ybus[(i, j)];
                if j != i && y.re == 0.0 && y.im == 0.0 {
                    continue;
                }
                let (d_theta, d_v) = if i == j {
                    let (g, b) = (y.re, y.im);
                    let vi = vm[i];
                    let (dpl, dql) = self.loads[i].map_or((0.0, 0.0), |l| l.dv(vi));
                    if is_p {
                        (-q[i] - b * vi * vi, p[i] / vi + g * vi + dpl)
                    } else {
                        (p[i] - g * vi * vi, q[i] / vi - b * vi + dql)
                    }
                } else {
                    let (s, c) = (theta[i] - theta[j]).sin_cos();
                    let (g, b) = (y.re, y.im);
                    let a = g * c + b * s;
                    let d = g * s - b * c;
                    if is_p {
                        (vm[i] * vm[j] * d, vm[i] * a)
                    } else {
                        (-vm[i] * vm[j] * a, vm[i] * d)
                    }
                };
                if acol[j] != usize::MAX {
                    jac[(row, acol[j])] += d_theta;
                }
                if mcol[j] != usize::MAX {
                    jac[(row, mcol[j])] += d_v;
                }
            }
        }
        jac
    }

    /// Newton step `dx` solving `J dx = -f`, or `None` if `J` is singular.
    pub fn newton_step(&self, x: &[f64], f: &[f64]) -> Option<DVector<f64>> {
        let jac = self.jacobian(x);
        let rhs = -DVector::from_column_slice(f);
        jac.lu().solve(&rhs)
    }
}
