//! Instance generators: the 1-D spatial ("line") model with homophily, and
//! adversarial instances built from the hardness reductions.
//!
//! The line model places voters and candidates uniformly on `[0, 1]`;
//! preferences follow distance. Graph edges appear with probability
//! `p0 * (1 - h * |x_u - x_v|)` (clamped), so `h = 0` recovers a plain
//! Erdos-Renyi graph and `h = 1` strongly favors nearby voters. A path over
//! voters in position order is always added so the initial contiguous
//! districts are connected. All randomness flows from the seed.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::election::{DistrictId, MovSemantics, Voter, VoterId};
use crate::error::{Error, Result};
use crate::model::{Assignment, DistrictingInstance, InstanceParams, VoterGraph};

/// Parameters of the line model.
#[derive(Clone, Debug)]
pub struct LineModelConfig {
    pub n_voters: usize,
    pub n_candidates: usize,
    pub n_districts: usize,
    /// Homophily in `[0, 1]`: how strongly edge probability decays with
    /// spatial distance.
    pub homophily: f64,
    /// Base edge probability in `(0, 1]`.
    pub edge_prob: f64,
    /// District sizes may deviate from `n/k` by this fraction.
    pub size_slack: f64,
    pub semantics: MovSemantics,
    pub seed: u64,
}

impl LineModelConfig {
    pub fn new(n_voters: usize, n_candidates: usize, n_districts: usize, seed: u64) -> Self {
        LineModelConfig {
            n_voters,
            n_candidates,
            n_districts,
            homophily: 0.0,
            edge_prob: 0.25,
            size_slack: 0.2,
            // Score-gap gives the local search a gradient: every unit of
            // top-two gap counts, where the set-change ceiling only moves
            // every other unit.
            semantics: MovSemantics::ScoreGap,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_districts == 0 || self.n_voters < self.n_districts {
            return Err(Error::MalformedInput(format!(
                "need n >= k >= 1, got n={} k={}",
                self.n_voters, self.n_districts
            )));
        }
        if self.n_candidates < 2 {
            return Err(Error::MalformedInput(format!(
                "need at least 2 candidates, got {}",
                self.n_candidates
            )));
        }
        if !(0.0..=1.0).contains(&self.homophily) {
            return Err(Error::MalformedInput(format!(
                "homophily must lie in [0, 1], got {}",
                self.homophily
            )));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return Err(Error::MalformedInput(format!(
                "edge probability must lie in (0, 1], got {}",
                self.edge_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.size_slack) {
            return Err(Error::MalformedInput(format!(
                "size slack must lie in [0, 1], got {}",
                self.size_slack
            )));
        }
        Ok(())
    }
}

/// District size bounds letting sizes deviate from `n/k` by `slack`,
/// widened when necessary so equal-as-possible blocks always fit.
pub fn slack_bounds(n: usize, k: usize, slack: f64) -> (usize, usize) {
    let avg = n as f64 / k as f64;
    let s_min = ((1.0 - slack) * avg).ceil() as usize;
    let s_max = ((1.0 + slack) * avg).floor() as usize;
    (s_min.min(n / k), s_max.max(n.div_ceil(k)))
}

/// Samples a line-model instance: spatial positions, distance-based
/// preferences, a homophilous voter graph, and contiguous initial
/// districts with full mobility.
pub fn generate_line_model(config: &LineModelConfig) -> Result<DistrictingInstance> {
    config.check()?;
    let n = config.n_voters;
    let c = config.n_candidates;
    let k = config.n_districts;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let voter_pos: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let candidate_pos: Vec<f64> = (0..c).map(|_| rng.gen::<f64>()).collect();

    let voters: Vec<Voter> = voter_pos
        .iter()
        .enumerate()
        .map(|(v, &x)| {
            let mut prefs: Vec<usize> = (0..c).collect();
            prefs.sort_by(|&p, &q| {
                let dp = (candidate_pos[p] - x).abs();
                let dq = (candidate_pos[q] - x).abs();
                dp.partial_cmp(&dq).unwrap().then(p.cmp(&q))
            });
            Voter::new(v, prefs)
        })
        .collect();

    // Voters in position order (ties by id) define the path and the
    // contiguous initial blocks.
    let mut order: Vec<VoterId> = (0..n).collect();
    order.sort_by(|&a, &b| voter_pos[a].partial_cmp(&voter_pos[b]).unwrap().then(a.cmp(&b)));

    let mut edge_set: HashSet<(VoterId, VoterId)> = HashSet::new();
    for w in order.windows(2) {
        let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
        edge_set.insert((a, b));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            let dist = (voter_pos[u] - voter_pos[v]).abs();
            let prob = (config.edge_prob * (1.0 - config.homophily * dist)).clamp(0.0, 1.0);
            let draw = rng.gen::<f64>();
            if draw < prob {
                edge_set.insert((u, v));
            }
        }
    }
    let mut edges: Vec<(VoterId, VoterId)> = edge_set.into_iter().collect();
    edges.sort_unstable();
    let graph = VoterGraph::new(n, &edges)?;

    // Contiguous blocks with sizes as equal as possible; the first n mod k
    // blocks take the extra voter.
    let base = n / k;
    let extra = n % k;
    let mut district_of = vec![0; n];
    let mut cursor = 0;
    for d in 0..k {
        let size = base + usize::from(d < extra);
        for _ in 0..size {
            district_of[order[cursor]] = d;
            cursor += 1;
        }
    }
    let (s_min, s_max) = slack_bounds(n, k, config.size_slack);

    DistrictingInstance::full_mobility(
        c,
        voters,
        k,
        Assignment::new(district_of),
        s_min,
        Some(s_max),
        Some(graph),
        config.semantics,
    )
}

/// A CNF formula; literals are signed 1-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatFormula {
    n_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl SatFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::MalformedInput("formula has no clauses".into()));
        }
        for (j, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::MalformedInput(format!("clause {j} is empty")));
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > n_vars {
                    return Err(Error::MalformedInput(format!(
                        "clause {j}: literal {lit} out of range for {n_vars} variables"
                    )));
                }
            }
        }
        Ok(SatFormula { n_vars, clauses })
    }

    /// Parses DIMACS CNF: optional comment lines, a `p cnf <vars> <clauses>`
    /// header, then whitespace-separated literals with 0 terminating each
    /// clause.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut n_vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "expected `p cnf <vars> <clauses>`".into(),
                    });
                }
                n_vars = Some(parts[2].parse::<usize>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad variable count {:?}", parts[2]),
                })?);
                continue;
            }
            for token in line.split_whitespace() {
                let lit: i32 = token.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("not a literal: {token:?}"),
                })?;
                if lit == 0 {
                    if !current.is_empty() {
                        clauses.push(std::mem::take(&mut current));
                    }
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let n_vars = n_vars.unwrap_or_else(|| {
            clauses
                .iter()
                .flatten()
                .map(|l| l.unsigned_abs() as usize)
                .max()
                .unwrap_or(0)
        });
        SatFormula::new(n_vars, clauses)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Brute-force satisfiability; intended for the small formulas the
    /// reductions are exercised with.
    pub fn is_satisfiable(&self) -> bool {
        assert!(self.n_vars <= 25, "brute-force check limited to 25 variables");
        (0u32..(1 << self.n_vars)).any(|bits| {
            let assignment: Vec<bool> = (0..self.n_vars).map(|i| bits >> i & 1 == 1).collect();
            self.is_satisfied_by(&assignment)
        })
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let var = lit.unsigned_abs() as usize - 1;
                (lit > 0) == assignment[var]
            })
        })
    }

    /// First satisfying assignment in binary counting order, if any.
    pub fn find_satisfying_assignment(&self) -> Option<Vec<bool>> {
        assert!(self.n_vars <= 25, "brute-force check limited to 25 variables");
        (0u32..(1 << self.n_vars)).find_map(|bits| {
            let assignment: Vec<bool> = (0..self.n_vars).map(|i| bits >> i & 1 == 1).collect();
            self.is_satisfied_by(&assignment).then_some(assignment)
        })
    }
}

/// District roles of one variable in the SAT gadget.
#[derive(Clone, Copy, Debug)]
pub struct VarDistricts {
    /// Receives the feeder's c-voter when the variable is set true.
    pub positive: DistrictId,
    /// Receives the feeder's c-voter when the variable is set false.
    pub negative: DistrictId,
    /// Holds the single mobile c-voter.
    pub feeder: DistrictId,
}

/// The fair-districting instance produced from a CNF formula, with enough
/// bookkeeping to replay the forward direction of the reduction.
#[derive(Clone, Debug)]
pub struct SatGadget {
    pub instance: DistrictingInstance,
    /// The margin target the reduction decides (always 2).
    pub target: u64,
    pub var_districts: Vec<VarDistricts>,
    pub clause_districts: Vec<DistrictId>,
    /// Per variable, the one c-voter allowed to leave its feeder district.
    mobile_c_voters: Vec<VoterId>,
    /// Per district, its b-voters (only literal districts have any).
    b_voters: Vec<Vec<VoterId>>,
}

const ALT_A: usize = 0;
const ALT_B: usize = 1;
const ALT_C: usize = 2;

/// Builds the hardness gadget: three literal/feeder districts per variable
/// and one district per clause, with mobility wired so a margin target of 2
/// is reachable exactly when the formula is satisfiable (under score-gap
/// arithmetic).
pub fn reduce_sat_to_fair_districting(formula: &SatFormula) -> Result<SatGadget> {
    let nv = formula.n_vars();
    let mc = formula.clauses().len() as u64;
    let k = 3 * nv + formula.clauses().len();

    let mut voters: Vec<Voter> = Vec::new();
    let mut initial: Vec<DistrictId> = Vec::new();
    let mut mobility: Vec<Vec<DistrictId>> = Vec::new();
    let mut b_voters: Vec<Vec<VoterId>> = vec![Vec::new(); k];
    let mut mobile_c_voters: Vec<VoterId> = Vec::new();

    let var_districts: Vec<VarDistricts> = (0..nv)
        .map(|i| VarDistricts {
            positive: 3 * i,
            negative: 3 * i + 1,
            feeder: 3 * i + 2,
        })
        .collect();
    let clause_districts: Vec<DistrictId> = (0..formula.clauses().len()).map(|j| 3 * nv + j).collect();

    // Clause districts a literal's b-voters may feed.
    let targets_of_literal = |lit: i32| -> Vec<DistrictId> {
        formula
            .clauses()
            .iter()
            .enumerate()
            .filter(|(_, clause)| clause.contains(&lit))
            .map(|(j, _)| clause_districts[j])
            .collect()
    };

    let mut push_voter =
        |alt: usize, district: DistrictId, moves: Vec<DistrictId>, voters: &mut Vec<Voter>| {
            let id = voters.len();
            voters.push(Voter::top(id, alt));
            initial.push(district);
            let mut opts = moves;
            opts.push(district);
            mobility.push(opts);
            id
        };

    for i in 0..nv {
        let vd = var_districts[i];
        let lit = (i + 1) as i32;
        for (district, lit) in [(vd.positive, lit), (vd.negative, -lit)] {
            for _ in 0..mc + 2 {
                push_voter(ALT_A, district, Vec::new(), &mut voters);
            }
            let targets = targets_of_literal(lit);
            for _ in 0..mc {
                let id = push_voter(ALT_B, district, targets.clone(), &mut voters);
                b_voters[district].push(id);
            }
            for _ in 0..mc - 1 {
                push_voter(ALT_C, district, Vec::new(), &mut voters);
            }
        }
        for _ in 0..mc + 2 {
            push_voter(ALT_A, vd.feeder, Vec::new(), &mut voters);
        }
        let mobile = push_voter(
            ALT_C,
            vd.feeder,
            vec![vd.positive, vd.negative],
            &mut voters,
        );
        mobile_c_voters.push(mobile);
        for _ in 0..mc {
            push_voter(ALT_C, vd.feeder, Vec::new(), &mut voters);
        }
    }
    for &district in &clause_districts {
        for _ in 0..mc + 3 {
            push_voter(ALT_A, district, Vec::new(), &mut voters);
        }
        for _ in 0..mc {
            push_voter(ALT_B, district, Vec::new(), &mut voters);
        }
    }

    let instance = DistrictingInstance::new(InstanceParams {
        m: 3,
        voters,
        k,
        initial: Assignment::new(initial),
        mobility,
        s_min: 0,
        s_max: None,
        graph: None,
        semantics: MovSemantics::ScoreGap,
    })?;
    Ok(SatGadget {
        instance,
        target: 2,
        var_districts,
        clause_districts,
        mobile_c_voters,
        b_voters,
    })
}

impl SatGadget {
    pub fn mobile_c_voter(&self, var: usize) -> VoterId {
        self.mobile_c_voters[var]
    }

    pub fn b_voters(&self, district: DistrictId) -> &[VoterId] {
        &self.b_voters[district]
    }

    /// The district of a signed literal.
    pub fn literal_district(&self, lit: i32) -> DistrictId {
        let vd = self.var_districts[lit.unsigned_abs() as usize - 1];
        if lit > 0 {
            vd.positive
        } else {
            vd.negative
        }
    }

    /// Replays the forward direction of the reduction for a satisfying
    /// assignment: each feeder's c-voter joins the district of the true
    /// literal, and each clause district receives one b-voter from its
    /// first satisfied literal's district.
    pub fn schedule_for_assignment(&self, formula: &SatFormula, g: &[bool]) -> Result<Assignment> {
        if g.len() != self.var_districts.len() {
            return Err(Error::MalformedInput(format!(
                "assignment covers {} variables, formula has {}",
                g.len(),
                self.var_districts.len()
            )));
        }
        let mut assignment = self.instance.initial().clone();
        for (i, vd) in self.var_districts.iter().enumerate() {
            let dest = if g[i] { vd.positive } else { vd.negative };
            assignment.set(self.mobile_c_voters[i], dest);
        }
        let mut next_b = vec![0usize; self.b_voters.len()];
        for (j, clause) in formula.clauses().iter().enumerate() {
            let lit = clause
                .iter()
                .copied()
                .find(|&lit| (lit > 0) == g[lit.unsigned_abs() as usize - 1])
                .ok_or_else(|| {
                    Error::MalformedInput(format!("assignment does not satisfy clause {j}"))
                })?;
            let district = self.literal_district(lit);
            let pool = &self.b_voters[district];
            let voter = *pool.get(next_b[district]).ok_or_else(|| {
                Error::MalformedInput(format!("district {district} ran out of b-voters"))
            })?;
            next_b[district] += 1;
            assignment.set(voter, self.clause_districts[j]);
        }
        Ok(assignment)
    }
}

/// A 2-disjoint-connected-partitioning instance: a connected graph and two
/// disjoint nonempty terminal sets, asking for a 2-partition into connected
/// parts covering them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoDcpInstance {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub z1: Vec<usize>,
    pub z2: Vec<usize>,
}

impl TwoDcpInstance {
    pub fn check(&self) -> Result<VoterGraph> {
        let graph = VoterGraph::new(self.n, &self.edges)?;
        let all: Vec<usize> = (0..self.n).collect();
        if !crate::model::is_connected_district(&graph, &all) {
            return Err(Error::MalformedInput("graph must be connected".into()));
        }
        if self.z1.is_empty() || self.z2.is_empty() {
            return Err(Error::MalformedInput(
                "terminal sets must be nonempty".into(),
            ));
        }
        for &z in self.z1.iter().chain(&self.z2) {
            if z >= self.n {
                return Err(Error::MalformedInput(format!(
                    "terminal {z} out of range for n={}",
                    self.n
                )));
            }
        }
        if self.z1.iter().any(|z| self.z2.contains(z)) {
            return Err(Error::MalformedInput(
                "terminal sets must be disjoint".into(),
            ));
        }
        Ok(graph)
    }
}

/// The connected-districting instance produced from a 2DCP instance.
#[derive(Clone, Debug)]
pub struct TwoDcpGadget {
    pub instance: DistrictingInstance,
    /// The margin target the reduction decides (always 1).
    pub target: u64,
    /// Voter id of `v_u` per original vertex.
    pub v_of: Vec<VoterId>,
    /// Voter id of `w_u` per original vertex (absent for Z2 vertices).
    pub w_of: Vec<Option<VoterId>>,
    /// The pendant-path voters, all pinned to district 1.
    pub d_voters: Vec<VoterId>,
}

/// Builds the connected-variant hardness gadget: an x-voter per vertex, a
/// y-voter companion for every non-Z2 vertex, and a pendant path of y-voters
/// hanging off a fixed Z2 vertex. Requires every Z2 vertex to have degree
/// exactly 2 (the reduction's normalization).
pub fn reduce_2dcp_to_fair_connected_districting(inst: &TwoDcpInstance) -> Result<TwoDcpGadget> {
    let graph = inst.check()?;
    for &z in &inst.z2 {
        if graph.neighbors(z).len() != 2 {
            return Err(Error::UnsupportedInstance(format!(
                "vertex {z} in the second terminal set has degree {}, need exactly 2",
                graph.neighbors(z).len()
            )));
        }
    }
    let in_z2: HashSet<usize> = inst.z2.iter().copied().collect();
    let anchor = *inst.z2.iter().min().expect("z2 nonempty");

    let mut voters: Vec<Voter> = Vec::new();
    let mut v_of = vec![0usize; inst.n];
    let mut w_of = vec![None; inst.n];
    for u in 0..inst.n {
        v_of[u] = voters.len();
        voters.push(Voter::new(v_of[u], vec![0, 1]));
    }
    for u in 0..inst.n {
        if !in_z2.contains(&u) {
            let id = voters.len();
            w_of[u] = Some(id);
            voters.push(Voter::new(id, vec![1, 0]));
        }
    }
    let d_len = inst.z2.len() + 1;
    let d_voters: Vec<VoterId> = (0..d_len)
        .map(|_| {
            let id = voters.len();
            voters.push(Voter::new(id, vec![1, 0]));
            id
        })
        .collect();

    let mut edges: Vec<(VoterId, VoterId)> = inst
        .edges
        .iter()
        .map(|&(a, b)| (v_of[a], v_of[b]))
        .collect();
    for u in 0..inst.n {
        if let Some(w) = w_of[u] {
            edges.push((v_of[u], w));
        }
    }
    for pair in d_voters.windows(2) {
        edges.push((pair[0], pair[1]));
    }
    edges.push((v_of[anchor], d_voters[0]));

    let n_voters = voters.len();
    let mut initial = vec![0usize; n_voters];
    for &d in &d_voters {
        initial[d] = 1;
    }
    let mut mobility = vec![vec![0, 1]; n_voters];
    for &z in &inst.z1 {
        mobility[v_of[z]] = vec![0];
    }
    for &d in &d_voters {
        mobility[d] = vec![1];
    }

    let instance = DistrictingInstance::new(InstanceParams {
        m: 2,
        voters,
        k: 2,
        initial: Assignment::new(initial),
        mobility,
        s_min: 0,
        s_max: None,
        graph: Some(VoterGraph::new(n_voters, &edges)?),
        semantics: MovSemantics::ScoreGap,
    })?;
    Ok(TwoDcpGadget {
        instance,
        target: 1,
        v_of,
        w_of,
        d_voters,
    })
}

impl TwoDcpGadget {
    /// The districting assignment a connected 2-partition `(V1, V2)` of the
    /// original graph induces: district 0 holds the voter pairs of `V1`,
    /// district 1 everything else.
    pub fn assignment_for_partition(&self, v1: &HashSet<usize>) -> Assignment {
        let mut district_of = vec![1usize; self.instance.n()];
        for (u, &v) in self.v_of.iter().enumerate() {
            if v1.contains(&u) {
                district_of[v] = 0;
                if let Some(w) = self.w_of[u] {
                    district_of[w] = 0;
                }
            }
        }
        Assignment::new(district_of)
    }
}
