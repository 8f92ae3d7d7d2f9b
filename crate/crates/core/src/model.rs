//! Districting instances, assignments, and validation.
//!
//! A [`DistrictingInstance`] bundles everything a solver needs: the voters
//! with their preferences, the named district slots, the per-voter mobility
//! map, size bounds, and an optional voter graph for the connected variant.
//! Instances are immutable after construction; [`Assignment`]s are cheap
//! value objects the solvers produce and the validator checks.

use std::collections::HashSet;
use std::fmt;

use crate::election::{DistrictId, Margin, MovSemantics, VoteProfile, Voter, VoterId};
use crate::error::{Error, Result};

/// Undirected graph on voter ids, used by the connected-districting variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoterGraph {
    n: usize,
    adj: Vec<Vec<VoterId>>,
    edges: Vec<(VoterId, VoterId)>,
}

impl VoterGraph {
    /// Builds a graph on `n` vertices. Rejects self-loops, duplicate edges,
    /// and out-of-range endpoints. Edges are normalized to `(lo, hi)`.
    pub fn new(n: usize, edges: &[(VoterId, VoterId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::MalformedInput(format!(
                    "edge ({a}, {b}) out of range for n={n}"
                )));
            }
            if a == b {
                return Err(Error::MalformedInput(format!("self-loop at voter {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::MalformedInput(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            adj[a].push(b);
            adj[b].push(a);
            normalized.push(e);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(VoterGraph {
            n,
            adj,
            edges: normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: VoterId) -> &[VoterId] {
        &self.adj[v]
    }

    pub fn edges(&self) -> &[(VoterId, VoterId)] {
        &self.edges
    }
}

/// `true` iff the subgraph induced by `members` is connected. The empty set
/// counts as connected; emptiness is penalized by the infinite margin of an
/// empty district, not by connectivity.
pub fn is_connected_district(graph: &VoterGraph, members: &[VoterId]) -> bool {
    if members.is_empty() {
        return true;
    }
    let mut in_set = vec![false; graph.n()];
    for &v in members {
        in_set[v] = true;
    }
    let mut seen = vec![false; graph.n()];
    let mut stack = vec![members[0]];
    seen[members[0]] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in graph.neighbors(v) {
            if in_set[w] && !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == members.len()
}

/// `true` iff removing `v` from `members` leaves a connected (or empty)
/// induced subgraph. `v` must be a member.
pub fn removable_without_disconnect(
    graph: &VoterGraph,
    members: &[VoterId],
    v: VoterId,
) -> bool {
    debug_assert!(members.contains(&v));
    let rest: Vec<VoterId> = members.iter().copied().filter(|&w| w != v).collect();
    is_connected_district(graph, &rest)
}

/// A total mapping from voter id to district id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    district_of: Vec<DistrictId>,
}

impl Assignment {
    pub fn new(district_of: Vec<DistrictId>) -> Self {
        Assignment { district_of }
    }

    pub fn n(&self) -> usize {
        self.district_of.len()
    }

    pub fn district_of(&self, v: VoterId) -> DistrictId {
        self.district_of[v]
    }

    pub fn as_slice(&self) -> &[DistrictId] {
        &self.district_of
    }

    pub fn set(&mut self, v: VoterId, d: DistrictId) {
        self.district_of[v] = d;
    }

    /// Voter ids per district, ascending within each district.
    pub fn members(&self, k: usize) -> Vec<Vec<VoterId>> {
        let mut out = vec![Vec::new(); k];
        for (v, &d) in self.district_of.iter().enumerate() {
            out[d].push(v);
        }
        out
    }

    pub fn district_sizes(&self, k: usize) -> Vec<usize> {
        let mut sizes = vec![0; k];
        for &d in &self.district_of {
            sizes[d] += 1;
        }
        sizes
    }
}

/// One violated condition found by [`validate`]. Violations are data, not
/// errors: the validator reports all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Voter assigned to a district outside its mobility set.
    Mobility { voter: VoterId, district: DistrictId },
    /// District below the minimum size.
    SizeBelowMin { district: DistrictId, size: usize },
    /// District above the maximum size.
    SizeAboveMax { district: DistrictId, size: usize },
    /// District margin of victory above the target.
    MarginAboveTarget {
        district: DistrictId,
        margin: Margin,
        target: u64,
    },
    /// District induces a disconnected subgraph.
    Disconnected { district: DistrictId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Mobility { voter, district } => {
                write!(f, "voter {voter} may not join district {district}")
            }
            Violation::SizeBelowMin { district, size } => {
                write!(f, "district {district} has size {size} below s_min")
            }
            Violation::SizeAboveMax { district, size } => {
                write!(f, "district {district} has size {size} above s_max")
            }
            Violation::MarginAboveTarget {
                district,
                margin,
                target,
            } => write!(
                f,
                "district {district} has margin of victory {margin} > target {target}"
            ),
            Violation::Disconnected { district } => {
                write!(f, "district {district} is disconnected")
            }
        }
    }
}

/// Everything needed to construct a [`DistrictingInstance`].
#[derive(Clone, Debug)]
pub struct InstanceParams {
    pub m: usize,
    pub voters: Vec<Voter>,
    pub k: usize,
    pub initial: Assignment,
    /// Per-voter sets of admissible districts.
    pub mobility: Vec<Vec<DistrictId>>,
    pub s_min: usize,
    /// `None` means unbounded.
    pub s_max: Option<usize>,
    pub graph: Option<VoterGraph>,
    pub semantics: MovSemantics,
}

/// A fair-districting problem instance.
///
/// Full mobility (every voter may join every district) is the
/// fair-partitioning special case; a present voter graph adds the
/// connectivity requirement of the connected variant.
#[derive(Clone, Debug)]
pub struct DistrictingInstance {
    m: usize,
    voters: Vec<Voter>,
    k: usize,
    initial: Assignment,
    mobility: Vec<Vec<DistrictId>>,
    s_min: usize,
    s_max: Option<usize>,
    graph: Option<VoterGraph>,
    semantics: MovSemantics,
}

impl DistrictingInstance {
    pub fn new(params: InstanceParams) -> Result<Self> {
        let InstanceParams {
            m,
            voters,
            k,
            initial,
            mut mobility,
            s_min,
            s_max,
            graph,
            semantics,
        } = params;

        if m < 2 {
            return Err(Error::UnsupportedInstance(format!(
                "an instance needs at least 2 alternatives, got m={m}"
            )));
        }
        if k == 0 {
            return Err(Error::MalformedInput("k must be at least 1".into()));
        }
        if let Some(mx) = s_max {
            if s_min > mx {
                return Err(Error::MalformedInput(format!(
                    "s_min={s_min} exceeds s_max={mx}"
                )));
            }
        }
        let n = voters.len();
        for (i, v) in voters.iter().enumerate() {
            if v.id != i {
                return Err(Error::MalformedInput(format!(
                    "voter ids must be dense: position {i} holds id {}",
                    v.id
                )));
            }
            let p = &v.preference;
            if p.len() != 1 && p.len() != m {
                return Err(Error::MalformedInput(format!(
                    "voter {i}: preference must be a top choice or a full order over {m} alternatives"
                )));
            }
            if p.iter().any(|&a| a >= m) {
                return Err(Error::MalformedInput(format!(
                    "voter {i}: preference mentions an alternative outside [0, {m})"
                )));
            }
            if p.len() == m {
                let mut seen = vec![false; m];
                for &a in p {
                    if seen[a] {
                        return Err(Error::MalformedInput(format!(
                            "voter {i}: full preference is not a permutation"
                        )));
                    }
                    seen[a] = true;
                }
            }
        }
        if initial.n() != n {
            return Err(Error::MalformedInput(format!(
                "initial assignment covers {} voters, instance has {n}",
                initial.n()
            )));
        }
        if mobility.len() != n {
            return Err(Error::MalformedInput(format!(
                "mobility map covers {} voters, instance has {n}",
                mobility.len()
            )));
        }
        for (v, opts) in mobility.iter_mut().enumerate() {
            opts.sort_unstable();
            opts.dedup();
            if opts.is_empty() {
                return Err(Error::MalformedInput(format!(
                    "voter {v} has an empty mobility set"
                )));
            }
            if opts.iter().any(|&d| d >= k) {
                return Err(Error::MalformedInput(format!(
                    "voter {v}: mobility mentions a district outside [0, {k})"
                )));
            }
            let home = initial.district_of(v);
            if home >= k {
                return Err(Error::MalformedInput(format!(
                    "voter {v} initially assigned to district {home} outside [0, {k})"
                )));
            }
            if !opts.contains(&home) {
                return Err(Error::MalformedInput(format!(
                    "voter {v}: initial district {home} not in its mobility set"
                )));
            }
        }
        if let Some(g) = &graph {
            if g.n() != n {
                return Err(Error::MalformedInput(format!(
                    "voter graph has {} vertices, instance has {n} voters",
                    g.n()
                )));
            }
            for (d, members) in initial.members(k).iter().enumerate() {
                if !is_connected_district(g, members) {
                    return Err(Error::MalformedInput(format!(
                        "initial district {d} is disconnected"
                    )));
                }
            }
        }
        Ok(DistrictingInstance {
            m,
            voters,
            k,
            initial,
            mobility,
            s_min,
            s_max,
            graph,
            semantics,
        })
    }

    /// Convenience constructor for the full-mobility (fair partitioning)
    /// shape.
    pub fn full_mobility(
        m: usize,
        voters: Vec<Voter>,
        k: usize,
        initial: Assignment,
        s_min: usize,
        s_max: Option<usize>,
        graph: Option<VoterGraph>,
        semantics: MovSemantics,
    ) -> Result<Self> {
        let all: Vec<DistrictId> = (0..k).collect();
        let mobility = vec![all; voters.len()];
        DistrictingInstance::new(InstanceParams {
            m,
            voters,
            k,
            initial,
            mobility,
            s_min,
            s_max,
            graph,
            semantics,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn voters(&self) -> &[Voter] {
        &self.voters
    }

    pub fn initial(&self) -> &Assignment {
        &self.initial
    }

    pub fn mobility(&self, v: VoterId) -> &[DistrictId] {
        &self.mobility[v]
    }

    pub fn is_full_mobility(&self) -> bool {
        self.mobility.iter().all(|opts| opts.len() == self.k)
    }

    pub fn s_min(&self) -> usize {
        self.s_min
    }

    pub fn s_max(&self) -> Option<usize> {
        self.s_max
    }

    pub fn size_ok(&self, size: usize) -> bool {
        size >= self.s_min && self.s_max.map_or(true, |mx| size <= mx)
    }

    pub fn graph(&self) -> Option<&VoterGraph> {
        self.graph.as_ref()
    }

    pub fn semantics(&self) -> MovSemantics {
        self.semantics
    }

    /// Instance-wide tally of top choices.
    pub fn global_tallies(&self) -> Vec<u64> {
        let mut t = vec![0u64; self.m];
        for v in &self.voters {
            t[v.top_choice()] += 1;
        }
        t
    }

    /// A copy with the voter graph dropped (for solvers that do not handle
    /// connectivity).
    pub fn without_graph(&self) -> Self {
        let mut copy = self.clone();
        copy.graph = None;
        copy
    }

    /// A copy with mobility widened to all districts (the fair-partitioning
    /// relaxation of this instance).
    pub fn with_full_mobility(&self) -> Self {
        let mut copy = self.clone();
        let all: Vec<DistrictId> = (0..self.k).collect();
        copy.mobility = vec![all; self.n()];
        copy
    }
}

/// Per-district plurality profiles under an assignment.
pub fn district_profiles(instance: &DistrictingInstance, a: &Assignment) -> Vec<VoteProfile> {
    assert_eq!(a.n(), instance.n(), "assignment must cover all voters");
    let mut profiles = vec![VoteProfile::empty(instance.m()); instance.k()];
    for v in instance.voters() {
        profiles[a.district_of(v.id)].add_vote(v.top_choice());
    }
    profiles
}

/// Margin of victory per district. Instances guarantee `m >= 2`, so only
/// empty districts are infinite.
pub fn district_margins(instance: &DistrictingInstance, a: &Assignment) -> Vec<Margin> {
    district_profiles(instance, a)
        .iter()
        .map(|p| {
            p.margin(instance.semantics())
                .expect("instance guarantees m >= 2")
        })
        .collect()
}

/// Checks an assignment against the instance: mobility, size bounds,
/// optionally a margin target, and connectivity when a graph is present.
/// Returns every violation found; an empty list means the assignment is
/// valid.
pub fn validate(
    instance: &DistrictingInstance,
    a: &Assignment,
    target: Option<u64>,
) -> Vec<Violation> {
    assert_eq!(a.n(), instance.n(), "assignment must cover all voters");
    let mut violations = Vec::new();
    for v in 0..instance.n() {
        let d = a.district_of(v);
        if !instance.mobility(v).contains(&d) {
            violations.push(Violation::Mobility {
                voter: v,
                district: d,
            });
        }
    }
    let members = a.members(instance.k());
    for (d, mem) in members.iter().enumerate() {
        if mem.len() < instance.s_min() {
            violations.push(Violation::SizeBelowMin {
                district: d,
                size: mem.len(),
            });
        }
        if let Some(mx) = instance.s_max() {
            if mem.len() > mx {
                violations.push(Violation::SizeAboveMax {
                    district: d,
                    size: mem.len(),
                });
            }
        }
    }
    if let Some(t) = target {
        let margins = district_margins(instance, a);
        for (d, &margin) in margins.iter().enumerate() {
            if margin > Margin::Finite(t) {
                violations.push(Violation::MarginAboveTarget {
                    district: d,
                    margin,
                    target: t,
                });
            }
        }
    }
    if let Some(g) = instance.graph() {
        for (d, mem) in members.iter().enumerate() {
            if !is_connected_district(g, mem) {
                violations.push(Violation::Disconnected { district: d });
            }
        }
    }
    violations
}

/// Maximum and total margin of victory of an assignment.
pub fn objective(instance: &DistrictingInstance, a: &Assignment) -> (Margin, Margin) {
    let margins = district_margins(instance, a);
    let max = margins.iter().copied().max().unwrap_or(Margin::Infinite);
    let total = margins
        .iter()
        .fold(Margin::Finite(0), |acc, &m| acc.saturating_add(m));
    (max, total)
}
