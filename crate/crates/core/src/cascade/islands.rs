use petgraph::unionfind::UnionFind;

use super::SystemState;
use crate::model::Network;
use crate::powerflow::connected_fraction;

/// One connected component of energized buses.
#[derive(Debug, Clone, PartialEq)]
pub struct Island {
    /// Bus indices, ascending.
    pub buses: Vec<usize>,
    /// Bus index used as the angle and power reference.
    pub slack: usize,
    /// In-service generating capacity, MW.
    pub gen_capacity_mw: f64,
    /// Connected nominal demand, MW.
    pub load_mw: f64,
}

impl Island {
    pub fn has_generation(&self) -> bool {
        self.gen_capacity_mw > 0.0
    }
}

/// Components over energized buses and in-service lines, ordered by lowest bus.
///
/// The reference bus is the case's slack when it sits in the island with a
/// live generator; otherwise the bus of the largest live generator.
pub fn detect_islands(network: &Network, state: &SystemState) -> Vec<Island> {
    let n = network.n_bus();
    let mut uf = UnionFind::<usize>::new(n);
    for (k, line) in network.lines.iter().enumerate() {
        let (f, t) = (line.from_bus - 1, line.to_bus - 1);
        if state.line_in_service[k] && state.bus_energized[f] && state.bus_energized[t] {
            uf.union(f, t);
        }
    }

    let mut islands: Vec<Island> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for bus in (0..n).filter(|&b| state.bus_energized[b]) {
        let root = uf.find(bus);
        if root_slot[root] == usize::MAX {
            root_slot[root] = islands.len();
            islands.push(Island {
                buses: Vec::new(),
                slack: bus,
                gen_capacity_mw: 0.0,
                load_mw: 0.0,
            });
        }
        islands[root_slot[root]].buses.push(bus);
    }

    let case_slack = network.slack_index();
    for island in &mut islands {
        let root = uf.find(island.buses[0]);
        let live: Vec<usize> = network
            .generators
            .iter()
            .enumerate()
            .filter(|(g, gen)| state.gen_in_service[*g] && uf.find(gen.bus - 1) == root)
            .map(|(g, _)| g)
            .collect();
        island.gen_capacity_mw = live.iter().map(|&g| network.generators[g].p_max).sum();
        island.load_mw = network
            .loads
            .iter()
            .enumerate()
            .filter(|(_, l)| state.bus_energized[l.bus - 1] && uf.find(l.bus - 1) == root)
            .map(|(li, l)| l.p0 * connected_fraction(l, &state.load_stages[li]))
            .sum();

        let slack_live =
            case_slack.filter(|&s| live.iter().any(|&g| network.generators[g].bus - 1 == s));
        island.slack = match slack_live {
            Some(s) => s,
            None => live
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    let (ga, gb) = (&network.generators[a], &network.generators[b]);
                    // largest capacity, lowest index on ties
                    ga.p_max.total_cmp(&gb.p_max).then(b.cmp(&a))
                })
                .map_or(island.buses[0], |g| network.generators[g].bus - 1),
        };
    }
    islands
}
