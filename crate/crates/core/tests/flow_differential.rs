//! Differential tests for the lower-bounded max-flow engine against
//! exhaustive and independent oracles.

mod common;

use common::{edmonds_karp_value, oracle_max_flow_with_demands, random_network, rng};
use fairdist_core::{max_flow_with_demands, FlowNetwork};

#[test]
fn matches_exhaustive_oracle_on_random_networks() {
    let mut rng = rng(0xf10e);
    for case in 0..50 {
        let net = random_network(&mut rng, 12, 30);
        let got = max_flow_with_demands(&net);
        let expected = oracle_max_flow_with_demands(&net);
        match (got, expected) {
            (None, None) => {}
            (Some(flow), Some(value)) => {
                assert_eq!(flow.value, value, "case {case}:\n{}", net.to_dump());
                net.check_flow(&flow)
                    .unwrap_or_else(|p| panic!("case {case}: {p:?}"));
            }
            (got, expected) => panic!(
                "case {case}: solver {:?} oracle {:?}\n{}",
                got.map(|f| f.value),
                expected,
                net.to_dump()
            ),
        }
    }
}

#[test]
fn zero_demand_networks_match_plain_max_flow() {
    let mut rng = rng(0x00fa);
    for _ in 0..60 {
        let mut net = random_network(&mut rng, 10, 24);
        // Strip the demands; keep the topology.
        let mut plain = FlowNetwork::new(net.nodes(), net.source(), net.sink()).unwrap();
        for e in net.edges() {
            plain.add_edge(e.tail, e.head, e.capacity, 0).unwrap();
        }
        net = plain;
        let flow = max_flow_with_demands(&net).expect("all-zero demands are always feasible");
        assert_eq!(flow.value, edmonds_karp_value(&net));
        net.check_flow(&flow).unwrap();
    }
}

#[test]
fn value_monotone_in_capacity_and_antitone_in_demand() {
    let mut rng = rng(0x3030);
    let mut checked_demand = 0;
    let mut checked_capacity = 0;
    for _ in 0..80 {
        let net = random_network(&mut rng, 9, 18);
        let base = max_flow_with_demands(&net).map(|f| f.value);

        // Raise one capacity: the value may only grow, and feasibility is
        // preserved.
        let idx = rand::Rng::gen_range(&mut rng, 0..net.edges().len());
        let mut bigger = FlowNetwork::new(net.nodes(), net.source(), net.sink()).unwrap();
        for (i, e) in net.edges().iter().enumerate() {
            let cap = if i == idx { e.capacity + 2 } else { e.capacity };
            bigger.add_edge(e.tail, e.head, cap, e.demand).unwrap();
        }
        let raised = max_flow_with_demands(&bigger).map(|f| f.value);
        if let Some(base_value) = base {
            let raised = raised.expect("raising a capacity cannot break feasibility");
            assert!(raised >= base_value);
            checked_capacity += 1;
        }

        // Raise one demand (where the capacity leaves room): the value may
        // only shrink or turn infeasible.
        if let Some(idx) = net
            .edges()
            .iter()
            .position(|e| e.demand < e.capacity)
        {
            let mut tighter = FlowNetwork::new(net.nodes(), net.source(), net.sink()).unwrap();
            for (i, e) in net.edges().iter().enumerate() {
                let dem = if i == idx { e.demand + 1 } else { e.demand };
                tighter.add_edge(e.tail, e.head, e.capacity, dem).unwrap();
            }
            let tightened = max_flow_with_demands(&tighter).map(|f| f.value);
            match (base, tightened) {
                (Some(b), Some(t)) => {
                    assert!(t <= b);
                    checked_demand += 1;
                }
                (None, Some(_)) => panic!("raising a demand cannot create feasibility"),
                _ => {}
            }
        }
    }
    assert!(checked_capacity > 20 && checked_demand > 10);
}

#[test]
fn feasible_circulation_is_a_valid_starting_point() {
    let mut rng = rng(0xc1c1);
    for _ in 0..60 {
        let net = random_network(&mut rng, 10, 20);
        match fairdist_core::feasible_circulation(&net) {
            Some(flow) => {
                net.check_flow(&flow).unwrap();
                let max = max_flow_with_demands(&net).expect("feasibility agrees across phases");
                assert!(max.value >= flow.value);
            }
            None => assert!(max_flow_with_demands(&net).is_none()),
        }
    }
}
