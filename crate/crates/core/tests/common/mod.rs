#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use loadshed_core::cascade::{load_scenario_file, Scenario};
use loadshed_core::model::{load_case_file, Bus, BusKind, Generator, Line, Load, Network};
use loadshed_core::relay::RelayCurve;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn ieee39() -> Network {
    load_case_file(repo_root().join("cases/ieee39.json")).expect("bundled case loads")
}

pub fn ieee39_raw() -> Network {
    load_case_file(repo_root().join("cases/ieee39-raw.json")).expect("raw case loads")
}

pub fn scenario(name: &str) -> (Scenario, Network) {
    load_scenario_file(repo_root().join("scenarios").join(name)).expect("bundled scenario loads")
}

/// Random connected network: a random spanning tree plus a few chords,
/// slack generator at bus 1, one PV unit, loads on the rest.
pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> Network {
    let buses = (1..=n)
        .map(|id| Bus {
            id,
            kind: match id {
                1 => BusKind::Slack,
                2 => BusKind::Pv,
                _ => BusKind::Pq,
            },
            base_kv: 230.0,
            v_setpoint: if id <= 2 {
                Some(rng.random_range(0.98..1.04))
            } else {
                None
            },
        })
        .collect();

    let mut pairs: Vec<(usize, usize)> = (2..=n).map(|b| (rng.random_range(1..b), b)).collect();
    for _ in 0..rng.random_range(1..=n / 2) {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        if a != b
            && !pairs.contains(&(a.min(b), a.max(b)))
            && !pairs.contains(&(a.max(b), a.min(b)))
        {
            pairs.push((a, b));
        }
    }
    let catalog = RelayCurve::catalog();
    let lines = pairs
        .iter()
        .enumerate()
        .map(|(k, &(f, t))| Line {
            id: k + 1,
            from_bus: f,
            to_bus: t,
            r: rng.random_range(0.002..0.02),
            x: rng.random_range(0.02..0.12),
            b_shunt: rng.random_range(0.0..0.2),
            rating_amps: rng.random_range(150.0..700.0),
            pickup_current: None,
            curve: catalog[rng.random_range(0..catalog.len())].clone(),
            in_service: true,
        })
        .collect();

    let loads: Vec<Load> = (3..=n)
        .map(|bus| Load {
            bus,
            p0: rng.random_range(20.0..120.0),
            q0: rng.random_range(0.0..40.0),
            stages: vec![0.25; 4],
            stage_status: vec![true; 4],
            kpv: 1.0,
            kqv: 2.0,
            kpf: 0.0,
        })
        .collect();
    let total: f64 = loads.iter().map(|l| l.p0).sum();
    let gen = |bus: usize, p: f64| Generator {
        bus,
        p_set: p,
        p_max: 2.0 * total,
        droop: 0.05,
        inertia_h: 4.0,
        mva_base: 2.0 * total,
        in_service: true,
    };
    Network {
        s_base_mva: 100.0,
        f0_hz: 60.0,
        buses,
        lines,
        loads,
        generators: vec![gen(1, 0.5 * total), gen(2, 0.5 * total)],
    }
}

/// Independent power flow: rectangular coordinates, finite-difference
/// Jacobian, every element in service, nominal frequency.
pub fn reference_voltages(net: &Network) -> Vec<f64> {
    let n = net.n_bus();
    let s = net.s_base_mva;
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for l in net.lines.iter().filter(|l| l.in_service) {
        let (f, t) = (l.from_bus - 1, l.to_bus - 1);
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(l.r, l.x);
        let half = Complex64::new(0.0, l.b_shunt / 2.0);
        y[f][f] += ys + half;
        y[t][t] += ys + half;
        y[f][t] -= ys;
        y[t][f] -= ys;
    }
    let mut pgen = vec![0.0; n];
    let mut has_gen = vec![false; n];
    for g in net.generators.iter().filter(|g| g.in_service) {
        pgen[g.bus - 1] += g.p_set / s;
        has_gen[g.bus - 1] = true;
    }
    let load_of = |i: usize| net.loads.iter().find(|l| l.bus == i + 1);
    let slack = net
        .buses
        .iter()
        .position(|b| b.kind == BusKind::Slack)
        .unwrap();
    let fixed_v: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if i == slack || has_gen[i] {
                net.buses[i].v_setpoint
            } else {
                None
            }
        })
        .collect();

    // x = [e_i, f_i] for every non-slack bus.
    let others: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let vs = fixed_v[slack].unwrap_or(1.0);
    let voltages = |x: &[f64]| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(vs, 0.0); n];
        for (j, &i) in others.iter().enumerate() {
            v[i] = Complex64::new(x[2 * j], x[2 * j + 1]);
        }
        v
    };
    let residual = |x: &[f64]| -> Vec<f64> {
        let v = voltages(x);
        let mut out = Vec::with_capacity(2 * others.len());
        for &i in &others {
            let mut current = Complex64::new(0.0, 0.0);
            for k in 0..n {
                current += y[i][k] * v[k];
            }
            let s_inj = v[i] * current.conj();
            let vm = v[i].norm();
            let (pl, ql) = load_of(i).map_or((0.0, 0.0), |l| {
                (l.p0 / s * vm.powf(l.kpv), l.q0 / s * vm.powf(l.kqv))
            });
            out.push(s_inj.re - (pgen[i] - pl));
            match fixed_v[i] {
                Some(set) => out.push(vm * vm - set * set),
                None => out.push(s_inj.im + ql),
            }
        }
        out
    };

    let mut x: Vec<f64> = others
        .iter()
        .flat_map(|&i| [fixed_v[i].unwrap_or(1.0), 0.0])
        .collect();
    let m = x.len();
    for _ in 0..50 {
        let f0 = residual(&x);
        if f0.iter().all(|r| r.abs() < 1e-11) {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(m, m);
        let h = 1e-7;
        for c in 0..m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = (residual(&xp), residual(&xm));
            for r in 0..m {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let dx = jac
            .lu()
            .solve(&DVector::from_vec(f0))
            .expect("reference jacobian invertible");
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi -= d;
        }
    }
    assert!(
        residual(&x).iter().all(|r| r.abs() < 1e-9),
        "reference solver did not converge"
    );
    voltages(&x).iter().map(|v| v.norm()).collect()
}

/// Hand-rolled scoring of one solved snapshot: `(IF matrix, critical line
/// per load bus, priority order)` with the documented tie-breaks.
pub struct OracleResult {
    pub scores: Vec<Vec<f64>>,
    pub critical: Vec<Option<usize>>,
    pub order: Vec<usize>,
}

pub fn brute_force_controller(
    net: &Network,
    sol: &loadshed_core::powerflow::PowerFlowSolution,
    epsilons: &[f64],
    load_buses: &[usize],
) -> (OracleResult, Vec<f64>, Vec<f64>) {
    let n = net.n_bus();
    let b = net.n_line();
    let mut rates = vec![0.0; b];
    let mut times = vec![f64::INFINITY; b];
    for k in 0..b {
        if !sol.line_active[k] {
            continue;
        }
        let line = &net.lines[k];
        rates[k] = sol.i_line_amps[k] / line.pickup_amps();
        if rates[k] > 1.0 {
            let c = &line.curve;
            times[k] = (1.0 - epsilons[k]) * (c.alpha / (rates[k].powf(c.gamma) - 1.0) + c.beta);
        }
    }

    let mut scores = vec![vec![0.0; b]; n];
    for i in 0..n {
        for k in 0..b {
            if !sol.line_active[k] {
                continue;
            }
            let line = &net.lines[k];
            let forward = sol.p_from[k] >= 0.0 || sol.p_from[k].abs() < 1e-6 * net.s_base_mva;
            let (src, dst) = if forward {
                (line.from_bus - 1, line.to_bus - 1)
            } else {
                (line.to_bus - 1, line.from_bus - 1)
            };
            if i == dst {
                scores[i][k] = rates[k];
            } else if i == src {
                scores[i][k] = -rates[k];
            }
        }
    }

    let mut critical = vec![None; n];
    for &i in load_buses {
        let mut best: Option<usize> = None;
        for k in 0..b {
            if scores[i][k] <= 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some(c) => {
                    scores[i][k] > scores[i][c]
                        || (scores[i][k] == scores[i][c] && times[k] < times[c])
                }
            };
            if better {
                best = Some(k);
            }
        }
        critical[i] = best;
    }

    // Selection sort on (time asc, score desc, bus asc).
    let mut pool: Vec<usize> = load_buses
        .iter()
        .copied()
        .filter(|&i| critical[i].is_some_and(|c| times[c].is_finite()))
        .collect();
    pool.sort_unstable();
    let mut order = Vec::new();
    while !pool.is_empty() {
        let mut pick = 0;
        for j in 1..pool.len() {
            let (a, p) = (pool[j], pool[pick]);
            let (ta, tp) = (times[critical[a].unwrap()], times[critical[p].unwrap()]);
            let (sa, sp) = (
                scores[a][critical[a].unwrap()],
                scores[p][critical[p].unwrap()],
            );
            if ta < tp || (ta == tp && sa > sp) {
                pick = j;
            }
        }
        order.push(pool.remove(pick));
    }
    (
        OracleResult {
            scores,
            critical,
            order,
        },
        rates,
        times,
    )
}

/// Random solved network with stressed ratings and partly travelled relays.
pub fn random_stressed_case<R: Rng>(
    rng: &mut R,
) -> (
    Network,
    loadshed_core::cascade::SystemState,
    loadshed_core::powerflow::PowerFlowSolution,
) {
    use loadshed_core::cascade::SystemState;
    use loadshed_core::powerflow::{solve_ac, SolverConfig};
    loop {
        let n = rng.random_range(4..=8);
        let mut net = random_network(rng, n);
        let mut state = SystemState::initial(&net);
        let sol = solve_ac(
            &net,
            &state,
            &SolverConfig {
                flat_start: true,
                ..SolverConfig::default()
            },
        );
        if !sol.converged {
            continue;
        }
        // Pickups between 0.5x and 1.5x of the flowing current.
        for (k, line) in net.lines.iter_mut().enumerate() {
            line.pickup_current = Some(sol.i_line_amps[k].max(1.0) * rng.random_range(0.5..1.5));
        }
        for relay in &mut state.relays {
            relay.epsilon = rng.random_range(0.0..0.9);
        }
        return (net, state, sol);
    }
}
