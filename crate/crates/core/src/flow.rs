//! Maximum s→t flow on networks with per-edge lower bounds (demands).
//!
//! Lower bounds are eliminated by the standard transformation: a feasible
//! flow is found first via an auxiliary super-source/super-sink network that
//! carries the demand imbalances (plus a sink→source edge of unbounded
//! capacity), then the flow is grown to a maximum with augmentations that
//! respect the residual bounds `demand <= flow <= capacity`. Both phases use
//! Dinic's blocking-flow method, so results are integral and the whole
//! procedure is polynomial. Edge iteration order is fixed by insertion
//! order, which makes the returned flow deterministic.
//!
//! A flow routes a nonnegative amount from source to sink. Demand patterns
//! satisfiable only by pushing net flow into the source are infeasible.

use crate::error::{Error, Result};

/// Capacities above this bound are rejected at construction so the internal
/// signed arithmetic cannot overflow.
const MAX_CAPACITY: u64 = (i64::MAX / 8) as u64;
const INF: i64 = i64::MAX / 4;

/// A directed edge with a capacity and a mandatory lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowEdge {
    pub tail: usize,
    pub head: usize,
    pub capacity: u64,
    pub demand: u64,
}

/// A directed network with distinguished source and sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowNetwork {
    nodes: usize,
    edges: Vec<FlowEdge>,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes {
            return Err(Error::MalformedInput(format!(
                "source/sink out of range for {nodes} nodes"
            )));
        }
        if source == sink {
            return Err(Error::MalformedInput(
                "source and sink must differ".into(),
            ));
        }
        Ok(FlowNetwork {
            nodes,
            edges: Vec::new(),
            source,
            sink,
        })
    }

    /// Adds an edge; rejects `demand > capacity` and out-of-range endpoints.
    /// Returns the edge index.
    pub fn add_edge(
        &mut self,
        tail: usize,
        head: usize,
        capacity: u64,
        demand: u64,
    ) -> Result<usize> {
        if tail >= self.nodes || head >= self.nodes {
            return Err(Error::MalformedInput(format!(
                "edge ({tail}, {head}) out of range for {} nodes",
                self.nodes
            )));
        }
        if demand > capacity {
            return Err(Error::MalformedInput(format!(
                "edge ({tail}, {head}): demand {demand} exceeds capacity {capacity}"
            )));
        }
        if capacity > MAX_CAPACITY {
            return Err(Error::MalformedInput(format!(
                "edge ({tail}, {head}): capacity {capacity} too large"
            )));
        }
        self.edges.push(FlowEdge {
            tail,
            head,
            capacity,
            demand,
        });
        Ok(self.edges.len() - 1)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Line-oriented debug dump: a `nodes source sink` header, then one
    /// `tail head capacity demand` line per edge.
    pub fn to_dump(&self) -> String {
        let mut out = format!("{} {} {}\n", self.nodes, self.source, self.sink);
        for e in &self.edges {
            out.push_str(&format!(
                "{} {} {} {}\n",
                e.tail, e.head, e.capacity, e.demand
            ));
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty dump".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: 1,
                msg: "expected `nodes source sink` header".into(),
            });
        }
        let parse = |line: usize, s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("not an integer: {s:?}"),
            })
        };
        let nodes = parse(1, parts[0])? as usize;
        let source = parse(1, parts[1])? as usize;
        let sink = parse(1, parts[2])? as usize;
        let mut net = FlowNetwork::new(nodes, source, sink)?;
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected `tail head capacity demand`".into(),
                });
            }
            let tail = parse(idx + 1, parts[0])? as usize;
            let head = parse(idx + 1, parts[1])? as usize;
            let cap = parse(idx + 1, parts[2])?;
            let dem = parse(idx + 1, parts[3])?;
            net.add_edge(tail, head, cap, dem).map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(net)
    }

    /// Independent flow verifier: per-edge bounds, conservation at interior
    /// nodes, and the reported value. Shares no code with the solver.
    pub fn check_flow(&self, flow: &Flow) -> std::result::Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if flow.edge_flows.len() != self.edges.len() {
            problems.push(format!(
                "flow covers {} edges, network has {}",
                flow.edge_flows.len(),
                self.edges.len()
            ));
            return Err(problems);
        }
        let mut balance = vec![0i64; self.nodes];
        for (i, (e, &f)) in self.edges.iter().zip(&flow.edge_flows).enumerate() {
            if f < e.demand {
                problems.push(format!("edge {i}: flow {f} below demand {}", e.demand));
            }
            if f > e.capacity {
                problems.push(format!("edge {i}: flow {f} above capacity {}", e.capacity));
            }
            balance[e.tail] -= f as i64;
            balance[e.head] += f as i64;
        }
        for v in 0..self.nodes {
            if v == self.source || v == self.sink {
                continue;
            }
            if balance[v] != 0 {
                problems.push(format!("node {v}: conservation violated by {}", balance[v]));
            }
        }
        if -balance[self.source] != flow.value as i64 {
            problems.push(format!(
                "reported value {} does not match source outflow {}",
                flow.value, -balance[self.source]
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

/// An integral feasible flow; `edge_flows[i]` corresponds to `edges()[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    pub edge_flows: Vec<u64>,
    pub value: u64,
}

struct Dinic {
    n: usize,
    to: Vec<usize>,
    cap: Vec<i64>,
    init: Vec<i64>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            n,
            to: Vec::new(),
            cap: Vec::new(),
            init: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    /// Adds an arc with forward residual `fwd` and backward residual `bwd`.
    /// Returns the forward arc index (even).
    fn add(&mut self, u: usize, v: usize, fwd: i64, bwd: i64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(fwd);
        self.init.push(fwd);
        self.adj[u].push(id);
        self.to.push(u);
        self.cap.push(bwd);
        self.init.push(bwd);
        self.adj[v].push(id + 1);
        id
    }

    /// Net flow pushed through the forward arc `id` (may be negative when
    /// an augmentation used the backward residual).
    fn used(&self, id: usize) -> i64 {
        self.init[id] - self.cap[id]
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.to[e];
                if self.cap[e] > 0 && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, limit: i64) -> i64 {
        if v == t {
            return limit;
        }
        while self.iter[v] < self.adj[v].len() {
            let e = self.adj[v][self.iter[v]];
            let w = self.to[e];
            if self.cap[e] > 0 && self.level[w] == self.level[v] + 1 {
                let pushed = self.dfs(w, t, limit.min(self.cap[e]));
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(s, t, INF);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        debug_assert_eq!(self.n, self.level.len());
        total
    }
}

/// Phase 1 of the lower-bound reduction: a feasible (not necessarily
/// maximum) s→t flow meeting every demand, or `None` when no such flow
/// exists.
pub fn feasible_circulation(net: &FlowNetwork) -> Option<Flow> {
    let n = net.nodes();
    let super_source = n;
    let super_sink = n + 1;
    let mut dinic = Dinic::new(n + 2);
    let mut excess = vec![0i64; n];
    let mut edge_arcs = Vec::with_capacity(net.edges().len());
    for e in net.edges() {
        edge_arcs.push(dinic.add(e.tail, e.head, (e.capacity - e.demand) as i64, 0));
        excess[e.head] += e.demand as i64;
        excess[e.tail] -= e.demand as i64;
    }
    // The sink→source return edge turns s→t flows into circulations.
    let return_arc = dinic.add(net.sink(), net.source(), INF, 0);
    let mut required = 0;
    for (v, &x) in excess.iter().enumerate() {
        if x > 0 {
            dinic.add(super_source, v, x, 0);
            required += x;
        } else if x < 0 {
            dinic.add(v, super_sink, -x, 0);
        }
    }
    if dinic.max_flow(super_source, super_sink) < required {
        return None;
    }
    let edge_flows: Vec<u64> = net
        .edges()
        .iter()
        .zip(&edge_arcs)
        .map(|(e, &arc)| e.demand + dinic.used(arc) as u64)
        .collect();
    let value = dinic.used(return_arc) as u64;
    Some(Flow { edge_flows, value })
}

/// A maximum-value s→t flow with all demands honored, or `None` when no
/// feasible flow exists.
pub fn max_flow_with_demands(net: &FlowNetwork) -> Option<Flow> {
    let base = feasible_circulation(net)?;
    // Phase 2: grow the feasible flow to a maximum. Residuals keep every
    // edge within [demand, capacity].
    let mut dinic = Dinic::new(net.nodes());
    let mut edge_arcs = Vec::with_capacity(net.edges().len());
    for (e, &f) in net.edges().iter().zip(&base.edge_flows) {
        edge_arcs.push(dinic.add(
            e.tail,
            e.head,
            (e.capacity - f) as i64,
            (f - e.demand) as i64,
        ));
    }
    let gained = dinic.max_flow(net.source(), net.sink());
    let edge_flows: Vec<u64> = base
        .edge_flows
        .iter()
        .zip(&edge_arcs)
        .map(|(&f, &arc)| (f as i64 + dinic.used(arc)) as u64)
        .collect();
    Some(Flow {
        edge_flows,
        value: base.value + gained as u64,
    })
}
