//! Shared brute-force oracles and seeded generators for the differential
//! suites. Everything here enumerates exhaustively and stays independent of
//! the solver paths it arbitrates.

use fairdist_core::{
    is_connected_district, margin_of_victory, Assignment, DistrictingInstance, FlowNetwork,
    InstanceParams, Margin, MovSemantics, VoteProfile, Voter,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn count_margin(counts: &[u64], sem: MovSemantics) -> Margin {
    let profile = VoteProfile::from_tallies(counts.to_vec());
    if profile.total() == 0 {
        Margin::Infinite
    } else {
        margin_of_victory(&profile, sem).expect("m >= 2 in oracle inputs")
    }
}

/// Exhaustive maximum integral flow with demands: depth-first search over
/// per-edge flow values with interval pruning on node balances. Returns the
/// maximum value, or `None` when no feasible integral flow exists.
pub fn oracle_max_flow_with_demands(net: &FlowNetwork) -> Option<u64> {
    let n = net.nodes();
    let edges = net.edges();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    // Grouping edges by their lowest endpoint completes low-numbered nodes
    // early, collapsing their balance intervals while most of the tree is
    // still unexplored.
    order.sort_by_key(|&i| {
        let e = &edges[i];
        (e.tail.min(e.head), e.tail.max(e.head))
    });

    // Undecided-edge contribution bounds to each node's balance.
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for e in edges {
        lo[e.head] += e.demand as i64;
        hi[e.head] += e.capacity as i64;
        lo[e.tail] -= e.capacity as i64;
        hi[e.tail] -= e.demand as i64;
    }

    struct Search<'a> {
        net: &'a FlowNetwork,
        order: Vec<usize>,
        fixed: Vec<i64>,
        lo: Vec<i64>,
        hi: Vec<i64>,
        best: Option<i64>,
    }

    impl Search<'_> {
        fn node_ok(&self, v: usize) -> bool {
            if v == self.net.source() || v == self.net.sink() {
                return true;
            }
            self.fixed[v] + self.lo[v] <= 0 && 0 <= self.fixed[v] + self.hi[v]
        }

        fn run(&mut self, pos: usize) {
            if pos == self.order.len() {
                // An s->t flow routes a nonnegative amount from source to
                // sink; assignments whose demands force net flow into the
                // source are not flows.
                let value = self.fixed[self.net.sink()];
                if value >= 0 {
                    self.best = Some(self.best.map_or(value, |b: i64| b.max(value)));
                }
                return;
            }
            // The final value is at most the sink's fixed balance plus the
            // best its undecided edges can still contribute.
            if let Some(best) = self.best {
                if self.fixed[self.net.sink()] + self.hi[self.net.sink()] <= best {
                    return;
                }
            }
            let e = self.net.edges()[self.order[pos]];
            self.lo[e.head] -= e.demand as i64;
            self.hi[e.head] -= e.capacity as i64;
            self.lo[e.tail] += e.capacity as i64;
            self.hi[e.tail] += e.demand as i64;
            for f in e.demand..=e.capacity {
                self.fixed[e.head] += f as i64;
                self.fixed[e.tail] -= f as i64;
                if self.node_ok(e.head) && self.node_ok(e.tail) {
                    self.run(pos + 1);
                }
                self.fixed[e.head] -= f as i64;
                self.fixed[e.tail] += f as i64;
            }
            self.lo[e.head] += e.demand as i64;
            self.hi[e.head] += e.capacity as i64;
            self.lo[e.tail] -= e.capacity as i64;
            self.hi[e.tail] -= e.demand as i64;
        }
    }

    let mut search = Search {
        net,
        order,
        fixed: vec![0; n],
        lo,
        hi,
        best: None,
    };
    search.run(0);
    search.best.map(|v| v as u64)
}

/// Plain max-flow oracle (demands ignored): Edmonds-Karp on an adjacency
/// matrix of summed capacities.
pub fn edmonds_karp_value(net: &FlowNetwork) -> u64 {
    let n = net.nodes();
    let mut cap = vec![vec![0i64; n]; n];
    for e in net.edges() {
        cap[e.tail][e.head] += e.capacity as i64;
    }
    let (s, t) = (net.source(), net.sink());
    let mut total = 0i64;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return total as u64;
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            cap[parent[v]][v] -= bottleneck;
            cap[v][parent[v]] += bottleneck;
            v = parent[v];
        }
        total += bottleneck;
    }
}

/// Seeded random flow network within the differential-suite envelope.
pub fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize) -> FlowNetwork {
    let nodes = rng.gen_range(3..=max_nodes);
    let source = rng.gen_range(0..nodes);
    let sink = loop {
        let t = rng.gen_range(0..nodes);
        if t != source {
            break t;
        }
    };
    let mut net = FlowNetwork::new(nodes, source, sink).unwrap();
    let edges = rng.gen_range(2..=max_edges);
    for _ in 0..edges {
        let tail = rng.gen_range(0..nodes);
        let head = loop {
            let h = rng.gen_range(0..nodes);
            if h != tail {
                break h;
            }
        };
        let capacity = rng.gen_range(0..=5u64);
        let demand = if rng.gen_bool(0.3) {
            rng.gen_range(0..=capacity)
        } else {
            0
        };
        net.add_edge(tail, head, capacity, demand).unwrap();
    }
    net
}

/// Exhaustive fair-partitioning oracle: enumerates every ordered
/// composition of the tally vector into `k` count vectors and evaluates
/// each complete composition.
pub fn oracle_fair_partitioning(
    tallies: &[u64],
    k: usize,
    s_min: usize,
    s_max: Option<usize>,
    sem: MovSemantics,
) -> Margin {
    let m = tallies.len();

    struct Search<'a> {
        tallies: &'a [u64],
        parts: Vec<Vec<u64>>,
        k: usize,
        s_min: u64,
        s_max: Option<u64>,
        sem: MovSemantics,
        best: Margin,
    }

    impl Search<'_> {
        /// Distribute alternative `a`'s remaining votes over parts
        /// `bin..k`, then move to the next alternative.
        fn distribute(&mut self, a: usize, bin: usize, left: u64) {
            if a == self.tallies.len() {
                self.evaluate();
                return;
            }
            if bin == self.k - 1 {
                self.parts[bin][a] = left;
                let next = if a + 1 < self.tallies.len() {
                    self.tallies[a + 1]
                } else {
                    0
                };
                self.distribute(a + 1, 0, next);
                self.parts[bin][a] = 0;
                return;
            }
            for take in 0..=left {
                self.parts[bin][a] = take;
                self.distribute(a, bin + 1, left - take);
            }
            self.parts[bin][a] = 0;
        }

        fn evaluate(&mut self) {
            let mut worst = Margin::Finite(0);
            for part in &self.parts {
                let size: u64 = part.iter().sum();
                if size < self.s_min || self.s_max.map_or(false, |mx| size > mx) {
                    return;
                }
                worst = worst.max(count_margin(part, self.sem));
            }
            self.best = self.best.min(worst);
        }
    }

    let mut search = Search {
        tallies,
        parts: vec![vec![0; m]; k],
        k,
        s_min: s_min as u64,
        s_max: s_max.map(|v| v as u64),
        sem,
        best: Margin::Infinite,
    };
    search.distribute(0, 0, tallies.first().copied().unwrap_or(0));
    search.best
}

/// Exhaustive fair-districting oracle: enumerates every mobility-respecting
/// assignment, checks sizes (and connectivity when a graph is present), and
/// returns the minimum over assignments of the maximum district margin.
pub fn oracle_min_max_margin(instance: &DistrictingInstance) -> Margin {
    let n = instance.n();
    let k = instance.k();
    let m = instance.m();
    let tops: Vec<usize> = instance.voters().iter().map(|v| v.top_choice()).collect();

    struct Search<'a> {
        instance: &'a DistrictingInstance,
        tops: &'a [usize],
        assignment: Vec<usize>,
        sizes: Vec<usize>,
        best: Margin,
        m: usize,
    }

    impl Search<'_> {
        fn run(&mut self, v: usize) {
            if v == self.tops.len() {
                self.evaluate();
                return;
            }
            for &d in self.instance.mobility(v) {
                if let Some(mx) = self.instance.s_max() {
                    if self.sizes[d] + 1 > mx {
                        continue;
                    }
                }
                self.assignment[v] = d;
                self.sizes[d] += 1;
                self.run(v + 1);
                self.sizes[d] -= 1;
            }
        }

        fn evaluate(&mut self) {
            if self.sizes.iter().any(|&s| s < self.instance.s_min()) {
                return;
            }
            let k = self.instance.k();
            if let Some(graph) = self.instance.graph() {
                let mut members = vec![Vec::new(); k];
                for (v, &d) in self.assignment.iter().enumerate() {
                    members[d].push(v);
                }
                if members
                    .iter()
                    .any(|mem| !is_connected_district(graph, mem))
                {
                    return;
                }
            }
            let mut counts = vec![vec![0u64; self.m]; k];
            for (v, &d) in self.assignment.iter().enumerate() {
                counts[d][self.tops[v]] += 1;
            }
            let worst = counts
                .iter()
                .map(|c| count_margin(c, self.instance.semantics()))
                .max()
                .unwrap_or(Margin::Infinite);
            self.best = self.best.min(worst);
        }
    }

    let mut search = Search {
        instance,
        tops: &tops,
        assignment: vec![0; n],
        sizes: vec![0; k],
        best: Margin::Infinite,
        m,
    };
    search.run(0);
    search.best
}

/// Seeded random small districting instance with random mobility sets and a
/// greedy-valid initial assignment.
pub fn random_small_instance(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_m: usize,
    k: usize,
) -> DistrictingInstance {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(2..=max_m);
    let semantics = if rng.gen_bool(0.5) {
        MovSemantics::SetChange
    } else {
        MovSemantics::ScoreGap
    };
    let voters: Vec<Voter> = (0..n).map(|v| Voter::top(v, rng.gen_range(0..m))).collect();
    let mut mobility = Vec::with_capacity(n);
    let mut initial = Vec::with_capacity(n);
    for _ in 0..n {
        let mut opts: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.6)).collect();
        if opts.is_empty() {
            opts.push(rng.gen_range(0..k));
        }
        let home = opts[rng.gen_range(0..opts.len())];
        mobility.push(opts);
        initial.push(home);
    }
    let mut sizes = vec![0usize; k];
    for &d in &initial {
        sizes[d] += 1;
    }
    let max_size = *sizes.iter().max().unwrap();
    let min_size = *sizes.iter().min().unwrap();
    let s_min = if rng.gen_bool(0.5) { 0 } else { min_size.min(1) };
    let s_max = if rng.gen_bool(0.3) {
        None
    } else {
        Some(rng.gen_range(max_size..=n))
    };
    DistrictingInstance::new(InstanceParams {
        m,
        voters,
        k,
        initial: Assignment::new(initial),
        mobility,
        s_min,
        s_max,
        graph: None,
        semantics,
    })
    .expect("generated instance must be constructible")
}

/// All tally vectors of length `m` with total at most `max_total`.
pub fn all_tally_vectors(m: usize, max_total: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; m];
    fn rec(current: &mut Vec<u64>, idx: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if idx == current.len() {
            out.push(current.clone());
            return;
        }
        for v in 0..=left {
            current[idx] = v;
            rec(current, idx + 1, left - v, out);
        }
        current[idx] = 0;
    }
    rec(&mut current, 0, max_total, &mut out);
    out
}

/// Builds a full-mobility instance from a tally vector (one top-only voter
/// per counted vote, all initially in district 0).
pub fn instance_from_tallies(
    tallies: &[u64],
    k: usize,
    s_min: usize,
    s_max: Option<usize>,
    sem: MovSemantics,
) -> DistrictingInstance {
    let mut voters = Vec::new();
    for (a, &t) in tallies.iter().enumerate() {
        for _ in 0..t {
            voters.push(Voter::top(voters.len(), a));
        }
    }
    let n = voters.len();
    DistrictingInstance::full_mobility(
        tallies.len(),
        voters,
        k,
        Assignment::new(vec![0; n]),
        s_min,
        s_max,
        None,
        sem,
    )
    .expect("tally instance must be constructible")
}
