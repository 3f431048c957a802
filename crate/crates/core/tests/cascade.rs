mod common;

use std::collections::HashMap;

use loadshed_core::cascade::{run_with_network, ContingencyKind, Event, EventKind, RunResult};
use loadshed_core::report::write_csv;

fn run_g1(controller: bool) -> RunResult {
    let (mut sc, net) = common::scenario("g1-outage.json");
    sc.controller.enabled = controller;
    run_with_network(&net, &sc)
}

#[test]
fn noop_run_is_flat_and_silent() {
    let (sc, net) = common::scenario("noop.json");
    let res = run_with_network(&net, &sc);
    assert!(res.log.is_empty());
    assert!(!res.blackout);
    assert_eq!(res.traces.len(), 201);
    for (name, series) in res.traces.columns() {
        let first = series[0];
        assert!(
            series.iter().all(|v| (v - first).abs() < 1e-9),
            "{name} drifts"
        );
    }
}

#[test]
fn uncontrolled_outage_trips_relays() {
    let res = run_g1(false);
    let trips: Vec<_> = res.log.of_kind(EventKind::RelayTrip).collect();
    assert!(!trips.is_empty());
    assert!(trips.iter().all(|r| r.t > 1.0 && r.t <= 20.0));
    assert!(res.sheds.is_empty());
}

#[test]
fn controlled_outage_avoids_trips() {
    let res = run_g1(true);
    assert_eq!(res.log.of_kind(EventKind::RelayTrip).count(), 0);
    assert!(!res.sheds.is_empty());
    assert!(!res.blackout);
}

#[test]
fn events_are_time_ordered_and_follow_the_contingency() {
    for on in [true, false] {
        let res = run_g1(on);
        let recs = res.log.records();
        assert_eq!(recs[0].kind, EventKind::AppliedContingency);
        assert!(recs.windows(2).all(|w| w[0].t <= w[1].t + 1e-9));
        assert!(recs.iter().all(|r| r.t >= 1.0));
    }
}

/// A shed names a line that was over pickup one step before it was issued.
#[test]
fn sheds_are_caused_by_overloaded_lines() {
    let res = run_g1(true);
    let dt = 0.1;
    for s in &res.sheds {
        let step = ((s.issue_time - dt) / dt).round() as usize;
        let rate = res.traces.line_rate[s.cause - 1][step];
        assert!(
            rate > 1.0,
            "line {} at {:.1}s rate {rate}",
            s.cause,
            s.issue_time - dt
        );
    }
}

#[test]
fn each_feeder_is_shed_once_in_stage_order() {
    let res = run_g1(true);
    let mut next: HashMap<usize, usize> = HashMap::new();
    for s in &res.sheds {
        let expect = next.entry(s.load_bus).or_insert(1);
        assert_eq!(s.stage, *expect);
        *expect += 1;
    }
    assert_eq!(res.final_state.disconnected_stages(), res.sheds.len());
    let shed_times: Vec<f64> = res.sheds.iter().map(|s| s.issue_time).collect();
    assert!(shed_times.windows(2).all(|w| w[1] - w[0] >= 0.5 - 1e-9));
}

#[test]
fn runs_are_deterministic() {
    let bytes = |r: &RunResult| {
        let mut csv = Vec::new();
        write_csv(&r.traces, &mut csv).unwrap();
        let mut log = Vec::new();
        r.log.write_jsonl(&mut log).unwrap();
        (csv, log)
    };
    assert_eq!(bytes(&run_g1(true)), bytes(&run_g1(true)));
    assert_eq!(bytes(&run_g1(false)), bytes(&run_g1(false)));
}

#[test]
fn converged_steps_balance() {
    for on in [true, false] {
        let res = run_g1(on);
        assert!(!res.balances.is_empty());
        for b in &res.balances {
            assert!(
                b.p_mw.abs() <= 10.0 * res.tol * 100.0,
                "t={} residual {}",
                b.t,
                b.p_mw
            );
        }
    }
}

#[test]
fn stranded_load_island_blacks_out() {
    let (mut sc, net) = common::scenario("noop.json");
    let feeders: Vec<usize> = net
        .lines
        .iter()
        .filter(|l| l.from_bus == 12 || l.to_bus == 12)
        .map(|l| l.id)
        .collect();
    assert_eq!(feeders.len(), 2);
    sc.events = feeders
        .iter()
        .map(|&id| Event {
            t: 1.0,
            kind: ContingencyKind::LineOutage,
            target: id,
        })
        .collect();
    let res = run_with_network(&net, &sc);
    assert!(res.blackout);
    let dark: Vec<_> = res.log.of_kind(EventKind::IslandBlackout).collect();
    assert_eq!(dark.len(), 1);
    assert_eq!(res.traces.series("v_bus_12").unwrap().last(), Some(&0.0));
}

#[test]
fn load_outage_raises_frequency() {
    let (mut sc, net) = common::scenario("noop.json");
    sc.events = vec![Event {
        t: 1.0,
        kind: ContingencyKind::LoadOutage,
        target: 18,
    }];
    let res = run_with_network(&net, &sc);
    assert!(*res.traces.df.last().unwrap() > 0.0);
    assert_eq!(res.log.records()[0].subject, "load 18");
    assert_eq!(res.traces.series("p_load_18").unwrap().last(), Some(&0.0));
}

#[test]
fn scenario_targets_are_checked() {
    let (mut sc, net) = common::scenario("noop.json");
    sc.events = vec![Event {
        t: 1.0,
        kind: ContingencyKind::GeneratorOutage,
        target: 11,
    }];
    assert!(sc.check(&net).is_err());
    sc.events = vec![Event {
        t: 30.0,
        kind: ContingencyKind::LineOutage,
        target: 1,
    }];
    assert!(sc.check(&net).is_err());
}
