use super::log::round_time;
use super::{
    detect_islands, inertia_aggregate, redistribute_droop, step_frequency, CoiParams,
    ContingencyKind, EventKind, EventLog, Island, LogRecord, Scenario, SystemState,
};
use crate::controller::{control_step, loading_rates, ShedCommand};
use crate::error::SimError;
use crate::model::{load_case_file, Network};
use crate::powerflow::{solve_island, PowerFlowSolution, SolverConfig};
use crate::relay::step_relay;
use crate::report::TraceSet;

/// Power balance of one converged solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBalance {
    pub t: f64,
    pub p_mw: f64,
    pub q_mvar: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub log: EventLog,
    pub traces: TraceSet,
    pub final_state: SystemState,
    pub final_solution: PowerFlowSolution,
    /// Residual of every solve performed during the run.
    pub balances: Vec<StepBalance>,
    /// Mismatch history of every solve, tagged with its time.
    pub solver_dumps: Vec<(f64, Vec<f64>)>,
    pub sheds: Vec<ShedCommand>,
    /// Nominal MW disconnected by the controller.
    pub shed_mw: f64,
    /// True when some island (or the whole system) went dark.
    pub blackout: bool,
    pub tol: f64,
}

/// Loads the scenario's case and runs it.
pub fn run(scenario: &Scenario) -> Result<RunResult, SimError> {
    let network = load_case_file(&scenario.case)?;
    scenario.check(&network)?;
    Ok(run_with_network(&network, scenario))
}

/// Runs a scenario against an already-loaded network.
pub fn run_with_network(network: &Network, scenario: &Scenario) -> RunResult {
    Engine::new(network, scenario).run()
}

struct Engine<'a> {
    net: &'a Network,
    sc: &'a Scenario,
    state: SystemState,
    log: EventLog,
    balances: Vec<StepBalance>,
    dumps: Vec<(f64, Vec<f64>)>,
    sheds: Vec<ShedCommand>,
    shed_mw: f64,
    blackout: bool,
    exhausted_latched: bool,
}

impl<'a> Engine<'a> {
    fn new(net: &'a Network, sc: &'a Scenario) -> Self {
        Self {
            net,
            sc,
            state: SystemState::initial(net),
            log: EventLog::default(),
            balances: Vec::new(),
            dumps: Vec::new(),
            sheds: Vec::new(),
            shed_mw: 0.0,
            blackout: false,
            exhausted_latched: false,
        }
    }

    fn run(mut self) -> RunResult {
        let dt = self.sc.dt;
        let steps = (self.sc.t_end / dt).round() as usize;
        let control_every = ((self.sc.controller.control_interval_s / dt).round() as usize).max(1);
        let mut traces = TraceSet::new(self.net);
        let mut next_event = 0;
        let mut solution = PowerFlowSolution::empty(self.net);

        for s in 0..=steps {
            let t = s as f64 * dt;
            self.state.time = t;

            while next_event < self.sc.events.len() && self.sc.events[next_event].t <= t + 1e-9 {
                self.apply_event(next_event, t);
                next_event += 1;
            }

            solution = self.resolve(s == 0);
            if !self.state.bus_energized.iter().any(|&e| e) {
                self.log.push(LogRecord::new(
                    t,
                    EventKind::IslandBlackout,
                    "system",
                    "no energized bus left",
                ));
                self.blackout = true;
                traces.push(t, self.net, &solution, self.state.df);
                break;
            }

            if self.sc.controller.enabled && s % control_every == 0 {
                let action = control_step(self.net, &self.state, &solution, &self.sc.controller);
                if !action.commands.is_empty() {
                    for cmd in &action.commands {
                        self.apply_shed(cmd);
                    }
                    solution = self.resolve(false);
                }
                match action.exhausted {
                    Some(line) if !self.exhausted_latched => {
                        let mut rec = LogRecord::new(
                            t,
                            EventKind::ControllerExhausted,
                            format!("line {line}"),
                            "no sheddable load relieves the overload",
                        );
                        rec.line = Some(line);
                        self.log.push(rec);
                        self.exhausted_latched = true;
                    }
                    Some(_) => {}
                    None => self.exhausted_latched = false,
                }
            }

            traces.push(t, self.net, &solution, self.state.df);
            if s == steps {
                break;
            }

            self.step_relays(&solution, dt);
            self.step_frequency(&solution, dt);
        }

        RunResult {
            log: self.log,
            traces,
            final_state: self.state,
            final_solution: solution,
            balances: self.balances,
            solver_dumps: self.dumps,
            sheds: self.sheds,
            shed_mw: self.shed_mw,
            blackout: self.blackout,
            tol: self.sc.solver.tol,
        }
    }

    fn apply_event(&mut self, idx: usize, t: f64) {
        let ev = &self.sc.events[idx];
        let subject = match ev.kind {
            ContingencyKind::GeneratorOutage => {
                self.state.gen_in_service[ev.target - 1] = false;
                self.state.gen_output[ev.target - 1] = 0.0;
                format!("generator {}", ev.target)
            }
            ContingencyKind::LineOutage => {
                self.state.line_in_service[ev.target - 1] = false;
                format!("line {}", ev.target)
            }
            ContingencyKind::LoadOutage => {
                let li = self
                    .net
                    .load_at(ev.target - 1)
                    .expect("checked by scenario");
                self.state.load_stages[li]
                    .iter_mut()
                    .for_each(|on| *on = false);
                format!("load {}", ev.target)
            }
        };
        let cause = format!(
            "scheduled {}",
            serde_json::to_value(ev.kind).unwrap().as_str().unwrap()
        );
        self.log.push(LogRecord::new(
            t,
            EventKind::AppliedContingency,
            subject,
            cause,
        ));
    }

    fn apply_shed(&mut self, cmd: &ShedCommand) {
        let li = self
            .net
            .load_at(cmd.load_bus - 1)
            .expect("commands target loads");
        let load = &self.net.loads[li];
        debug_assert!(self.state.load_stages[li][cmd.stage - 1]);
        self.state.load_stages[li][cmd.stage - 1] = false;
        let mw = load.p0 * load.stages[cmd.stage - 1];
        self.shed_mw += mw;
        let mut rec = LogRecord::new(
            cmd.issue_time,
            EventKind::ShedCommand,
            format!("load {} stage {}", cmd.load_bus, cmd.stage),
            format!("line {}", cmd.cause),
        );
        rec.line = Some(cmd.cause);
        rec.load_bus = Some(cmd.load_bus);
        rec.stage = Some(cmd.stage);
        rec.mw = Some(mw);
        self.log.push(rec);
        self.sheds.push(cmd.clone());
    }

    /// Governor response, island detection and a power flow per live island.
    fn resolve(&mut self, flat: bool) -> PowerFlowSolution {
        let t = self.state.time;
        self.state.gen_output = redistribute_droop(self.net, &self.state, self.state.df);
        let config = SolverConfig {
            flat_start: flat,
            ..self.sc.solver.clone()
        };
        let mut total = PowerFlowSolution::empty(self.net);
        for island in detect_islands(self.net, &self.state) {
            if !island.has_generation() {
                self.black_out(&island, "island without generation");
                continue;
            }
            let sol = solve_island(self.net, &self.state, &island, &config);
            self.dumps
                .push((round_time(t), sol.mismatch_history.clone()));
            if !sol.converged {
                let why = sol.failure.clone().unwrap_or_default();
                self.log.push(LogRecord::new(
                    t,
                    EventKind::SolverFailure,
                    island_name(&island),
                    why.clone(),
                ));
                self.black_out(&island, &format!("voltage collapse ({why})"));
                continue;
            }
            total.absorb(&sol);
        }
        let (p, q) = total.balance_residual();
        self.balances.push(StepBalance {
            t: round_time(t),
            p_mw: p,
            q_mvar: q,
        });
        self.state.last_solution = Some(total.clone());
        total
    }

    fn black_out(&mut self, island: &Island, cause: &str) {
        for &b in &island.buses {
            self.state.bus_energized[b] = false;
        }
        for (g, gen) in self.net.generators.iter().enumerate() {
            if !self.state.bus_energized[gen.bus - 1] && self.state.gen_in_service[g] {
                self.state.gen_in_service[g] = false;
                self.state.gen_output[g] = 0.0;
            }
        }
        self.blackout = true;
        self.log.push(LogRecord::new(
            self.state.time,
            EventKind::IslandBlackout,
            island_name(island),
            cause,
        ));
    }

    fn step_relays(&mut self, solution: &PowerFlowSolution, dt: f64) {
        let rates = loading_rates(solution, self.net);
        let mut trips = Vec::new();
        for (k, line) in self.net.lines.iter().enumerate() {
            if !self.state.line_in_service[k] {
                continue;
            }
            let next = step_relay(
                &self.state.relays[k],
                rates[k],
                dt,
                &line.curve,
                self.sc.relay.reset_time_s,
            );
            if next.tripped && !self.state.relays[k].tripped {
                trips.push((next.trip_time.unwrap_or(self.state.time + dt), k));
            }
            self.state.relays[k] = next;
        }
        trips.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (when, k) in trips {
            self.state.line_in_service[k] = false;
            let mut rec = LogRecord::new(
                when,
                EventKind::RelayTrip,
                format!("line {}", k + 1),
                format!("overcurrent rate {:.3}", rates[k]),
            );
            rec.line = Some(k + 1);
            self.log.push(rec);
        }
    }

    fn step_frequency(&mut self, solution: &PowerFlowSolution, dt: f64) {
        let (h_agg, s_sys) = inertia_aggregate(self.net, &self.state);
        let h_sys = self.sc.frequency.h_sys_s.unwrap_or(h_agg);
        let mechanical: f64 = self
            .state
            .gen_output
            .iter()
            .zip(&self.state.gen_in_service)
            .filter(|(_, &on)| on)
            .map(|(p, _)| p)
            .sum();
        let electrical: f64 = solution.p_gen.iter().sum();
        let params = CoiParams {
            h_sys,
            s_sys_mva: s_sys,
            f0_hz: self.net.f0_hz,
            damping_pu: self.sc.frequency.damping_pu,
            dt,
        };
        self.state.df = step_frequency(self.state.df, mechanical - electrical, &params);
    }
}

fn island_name(island: &Island) -> String {
    let ids: Vec<String> = island.buses.iter().map(|b| (b + 1).to_string()).collect();
    format!("island [{}]", ids.join(" "))
}
