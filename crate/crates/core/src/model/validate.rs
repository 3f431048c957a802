use std::collections::BTreeSet;
use std::fmt;

use petgraph::unionfind::UnionFind;

use super::{BusKind, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Network,
    Bus(usize),
    Line(usize),
    /// Identified by the bus it sits on.
    Load(usize),
    /// 1-based position in the generator list.
    Generator(usize),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Network => write!(f, "network"),
            Element::Bus(id) => write!(f, "bus {id}"),
            Element::Line(id) => write!(f, "line {id}"),
            Element::Load(bus) => write!(f, "load at bus {bus}"),
            Element::Generator(n) => write!(f, "generator {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub element: Element,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.rule)
    }
}

/// Checks every data-model invariant; an empty result means the network is valid.
pub fn validate(network: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |element, rule: String| out.push(Violation { element, rule });

    if !(network.s_base_mva > 0.0) {
        push(
            Element::Network,
            format!("s_base_mva {} must be positive", network.s_base_mva),
        );
    }
    if !(network.f0_hz > 0.0) {
        push(
            Element::Network,
            format!("f0_hz {} must be positive", network.f0_hz),
        );
    }

    let n = network.buses.len();
    let mut seen = BTreeSet::new();
    for bus in &network.buses {
        if !seen.insert(bus.id) {
            push(Element::Bus(bus.id), "duplicate bus id".into());
        }
        if bus.id == 0 || bus.id > n {
            push(
                Element::Bus(bus.id),
                format!("bus ids must be dense in 1..={n}"),
            );
        }
        if !(bus.base_kv > 0.0) {
            push(Element::Bus(bus.id), "base_kv must be positive".into());
        }
        if bus.kind != BusKind::Pq {
            match bus.v_setpoint {
                Some(v) if v > 0.0 => {}
                _ => push(
                    Element::Bus(bus.id),
                    "slack/pv bus needs a positive v_setpoint".into(),
                ),
            }
        }
    }
    let slack_count = network
        .buses
        .iter()
        .filter(|b| b.kind == BusKind::Slack)
        .count();
    match slack_count {
        0 => push(Element::Network, "no slack bus".into()),
        1 => {}
        _ => push(Element::Network, "multiple slack".into()),
    }

    let bus_ok = |id: usize| id >= 1 && id <= n;

    let mut line_ids = BTreeSet::new();
    let b = network.lines.len();
    for line in &network.lines {
        let el = Element::Line(line.id);
        if !line_ids.insert(line.id) {
            push(el, "duplicate line id".into());
        }
        if line.id == 0 || line.id > b {
            push(el, format!("line ids must be dense in 1..={b}"));
        }
        for end in [line.from_bus, line.to_bus] {
            if !bus_ok(end) {
                push(el, format!("references unknown bus {end}"));
            }
        }
        if line.from_bus == line.to_bus {
            push(el, "from_bus equals to_bus".into());
        }
        if line.x == 0.0 || !line.x.is_finite() {
            push(el, "series reactance x must be nonzero".into());
        }
        if line.r < 0.0 {
            push(el, "negative series resistance".into());
        }
        if !(line.rating_amps > 0.0) {
            push(el, "rating_amps must be positive".into());
        }
        if !(line.pickup_amps() > 0.0) {
            push(el, "pickup_current must be positive".into());
        }
        if let Err(e) = line.curve.check() {
            push(el, e);
        }
    }

    let mut load_buses = BTreeSet::new();
    for load in &network.loads {
        let el = Element::Load(load.bus);
        if !bus_ok(load.bus) {
            push(el, format!("references unknown bus {}", load.bus));
        }
        if !load_buses.insert(load.bus) {
            push(el, "more than one load on the bus".into());
        }
        if !(load.p0 >= 0.0) {
            push(el, format!("p0 {} is negative", load.p0));
        }
        if load.stages.is_empty() {
            push(el, "no stages".into());
        }
        if load.stages.iter().any(|&s| !(s > 0.0)) {
            push(el, "stage fractions must be positive".into());
        }
        let sum: f64 = load.stages.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            push(el, format!("stages sum {sum} ≠ 1"));
        }
        if load.stage_status.len() != load.stages.len() {
            push(el, "stage_status length differs from stages".into());
        }
    }

    for (idx, gen) in network.generators.iter().enumerate() {
        let el = Element::Generator(idx + 1);
        if !bus_ok(gen.bus) {
            push(el, format!("references unknown bus {}", gen.bus));
        }
        if !(gen.p_set >= 0.0 && gen.p_set <= gen.p_max) {
            push(
                el,
                format!("p_set {} outside [0, p_max {}]", gen.p_set, gen.p_max),
            );
        }
        if !(gen.droop > 0.0) {
            push(el, "droop must be positive".into());
        }
        if !(gen.inertia_h >= 0.0) {
            push(el, "inertia_h must be nonnegative".into());
        }
        if !(gen.mva_base > 0.0) {
            push(el, "mva_base must be positive".into());
        }
    }
    for bus in network.buses.iter().filter(|b| b.kind == BusKind::Pv) {
        if !network.generators.iter().any(|g| g.bus == bus.id) {
            push(Element::Bus(bus.id), "pv bus without generator".into());
        }
    }

    // Connectivity only makes sense once references are sound.
    if out.is_empty() && n > 0 {
        let mut uf = UnionFind::<usize>::new(n);
        for line in network.lines.iter().filter(|l| l.in_service) {
            uf.union(line.from_bus - 1, line.to_bus - 1);
        }
        let root = uf.find(0);
        for bus in &network.buses {
            if uf.find(bus.id - 1) != root {
                out.push(Violation {
                    element: Element::Bus(bus.id),
                    rule: "disconnected from the base topology".into(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bus, Line, Load};
    use crate::relay::RelayCurve;

    fn two_bus() -> Network {
        Network {
            s_base_mva: 100.0,
            f0_hz: 60.0,
            buses: vec![
                Bus {
                    id: 1,
                    kind: BusKind::Slack,
                    base_kv: 345.0,
                    v_setpoint: Some(1.0),
                },
                Bus {
                    id: 2,
                    kind: BusKind::Pq,
                    base_kv: 345.0,
                    v_setpoint: None,
                },
            ],
            lines: vec![Line {
                id: 1,
                from_bus: 1,
                to_bus: 2,
                r: 0.01,
                x: 0.1,
                b_shunt: 0.0,
                rating_amps: 400.0,
                pickup_current: None,
                curve: RelayCurve::very_inverse(),
                in_service: true,
            }],
            loads: vec![Load {
                bus: 2,
                p0: 50.0,
                q0: 10.0,
                stages: vec![0.25; 4],
                stage_status: vec![true; 4],
                kpv: 1.0,
                kqv: 2.0,
                kpf: 0.0,
            }],
            generators: vec![],
        }
    }

    #[test]
    fn clean_network_has_no_violations() {
        assert!(validate(&two_bus()).is_empty());
    }

    #[test]
    fn stage_sum_violation() {
        let mut net = two_bus();
        net.loads[0].stages = vec![0.5, 0.4];
        net.loads[0].stage_status = vec![true; 2];
        let v = validate(&net);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].element, Element::Load(2));
        assert!(v[0].rule.starts_with("stages sum 0.9"), "{}", v[0].rule);
        assert!(v[0].rule.ends_with("≠ 1"));
    }

    #[test]
    fn multiple_slack_violation() {
        let mut net = two_bus();
        net.buses[1].kind = BusKind::Slack;
        net.buses[1].v_setpoint = Some(1.0);
        let v = validate(&net);
        assert!(v.iter().any(|x| x.rule == "multiple slack"), "{v:?}");
    }

    #[test]
    fn disconnected_topology_is_reported() {
        let mut net = two_bus();
        net.lines[0].in_service = false;
        let v = validate(&net);
        assert_eq!(v[0].element, Element::Bus(2));
    }

    #[test]
    fn line_invariants() {
        let mut net = two_bus();
        net.lines[0].x = 0.0;
        net.lines[0].pickup_current = Some(-1.0);
        net.lines[0].to_bus = 1;
        let rules: Vec<_> = validate(&net).into_iter().map(|v| v.rule).collect();
        assert!(rules.iter().any(|r| r.contains("reactance")));
        assert!(rules.iter().any(|r| r.contains("pickup")));
        assert!(rules.iter().any(|r| r.contains("from_bus equals")));
    }
}
