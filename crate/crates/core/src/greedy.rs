//! Greedy local search: one parameterized loop behind the partitioning,
//! districting, and connected-districting heuristics.
//!
//! Each iteration targets the district with the highest margin of victory
//! (ties toward the lowest id). Candidates either move a supporter of that
//! district's winner out, or move a supporter of its runner-up alternative
//! in. The applied move must strictly improve the lexicographic objective
//! (maximum margin, then total margin); ties among equally good moves go to
//! the lowest voter id, then the lowest target district id. Strict
//! improvement over a well-founded objective guarantees termination even
//! without the iteration cap.

use std::time::Instant;

use crate::election::{margin_from_tallies, DistrictId, Margin, VoteProfile, VoterId};
use crate::error::{Error, Result};
use crate::model::{
    district_profiles, removable_without_disconnect, validate, Assignment, DistrictingInstance,
};
use crate::report::{MoveRecord, SolveReport, SolverInfo};

/// A single voter relocation. `from != to`, legal under the variant's
/// constraints at the time of application.
pub use crate::report::MoveRecord as Move;

/// Which constraint set the loop honors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyVariant {
    /// Mobility and the voter graph are ignored.
    Partitioning,
    /// Mobility is honored; the voter graph is ignored.
    Districting,
    /// Mobility honored and every district must stay connected. Requires
    /// the instance to carry a voter graph.
    ConnectedDistricting,
}

impl GreedyVariant {
    pub fn solver_name(&self) -> &'static str {
        match self {
            GreedyVariant::Partitioning => "greedy-partitioning",
            GreedyVariant::Districting => "greedy-districting",
            GreedyVariant::ConnectedDistricting => "greedy-connected-districting",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GreedyConfig {
    pub variant: GreedyVariant,
    /// Upper bound on applied moves; the loop usually stops earlier at a
    /// local optimum.
    pub max_iterations: usize,
    /// When the worst district admits no improving move, try the next-worst
    /// districts as pivots instead of stopping. Off by default.
    pub pivot_fallback: bool,
}

impl GreedyConfig {
    pub fn new(variant: GreedyVariant) -> Self {
        GreedyConfig {
            variant,
            max_iterations: 1_000_000,
            pivot_fallback: false,
        }
    }
}

struct SearchState<'a> {
    instance: &'a DistrictingInstance,
    assignment: Assignment,
    members: Vec<Vec<VoterId>>,
    profiles: Vec<VoteProfile>,
    margins: Vec<Margin>,
    /// Voter ids per top-choice alternative, ascending.
    by_top: Vec<Vec<VoterId>>,
}

fn profile_margin(p: &VoteProfile, instance: &DistrictingInstance) -> Margin {
    if p.total() == 0 {
        Margin::Infinite
    } else {
        margin_from_tallies(p.tallies(), instance.semantics())
    }
}

impl<'a> SearchState<'a> {
    fn new(instance: &'a DistrictingInstance, assignment: Assignment) -> Self {
        let members = assignment.members(instance.k());
        let profiles = district_profiles(instance, &assignment);
        let margins = profiles
            .iter()
            .map(|p| profile_margin(p, instance))
            .collect();
        let mut by_top = vec![Vec::new(); instance.m()];
        for v in instance.voters() {
            by_top[v.top_choice()].push(v.id);
        }
        SearchState {
            instance,
            assignment,
            members,
            profiles,
            margins,
            by_top,
        }
    }

    fn objective(&self) -> (Margin, Margin) {
        let max = self.margins.iter().copied().max().unwrap_or(Margin::Infinite);
        let total = self
            .margins
            .iter()
            .fold(Margin::Finite(0), |acc, &m| acc.saturating_add(m));
        (max, total)
    }

    /// Districts ordered by (margin desc, id asc); the first entry is the
    /// pivot D*.
    fn pivot_order(&self) -> Vec<DistrictId> {
        let mut order: Vec<DistrictId> = (0..self.instance.k()).collect();
        order.sort_by(|&a, &b| self.margins[b].cmp(&self.margins[a]).then(a.cmp(&b)));
        order
    }

    fn legal(&self, variant: GreedyVariant, v: VoterId, from: DistrictId, to: DistrictId) -> bool {
        if from == to {
            return false;
        }
        if variant != GreedyVariant::Partitioning
            && !self.instance.mobility(v).contains(&to)
        {
            return false;
        }
        if self.members[from].len() - 1 < self.instance.s_min() {
            return false;
        }
        if let Some(mx) = self.instance.s_max() {
            if self.members[to].len() + 1 > mx {
                return false;
            }
        }
        if variant == GreedyVariant::ConnectedDistricting {
            let graph = self
                .instance
                .graph()
                .expect("connected districting requires a voter graph");
            if !removable_without_disconnect(graph, &self.members[from], v) {
                return false;
            }
            if !self.members[to]
                .iter()
                .any(|&w| graph.neighbors(v).binary_search(&w).is_ok())
            {
                return false;
            }
        }
        true
    }

    /// Candidate moves for a pivot district: its winner supporters moving
    /// out, supporters of its runner-up alternative moving in. Sorted by
    /// (voter, target district).
    fn candidates_for_pivot(&self, variant: GreedyVariant, pivot: DistrictId) -> Vec<Move> {
        let mut out = Vec::new();
        let winner_set = self.profiles[pivot].winners();
        for &v in &self.members[pivot] {
            if !winner_set.contains(&self.instance.voters()[v].top_choice()) {
                continue;
            }
            for to in 0..self.instance.k() {
                if self.legal(variant, v, pivot, to) {
                    out.push(Move {
                        voter: v,
                        from: pivot,
                        to,
                    });
                }
            }
        }
        let runner_up = self.profiles[pivot]
            .runner_up()
            .expect("instance guarantees m >= 2");
        for &v in &self.by_top[runner_up] {
            let from = self.assignment.district_of(v);
            if from == pivot {
                continue;
            }
            if self.legal(variant, v, from, pivot) {
                out.push(Move {
                    voter: v,
                    from,
                    to: pivot,
                });
            }
        }
        out.sort_by_key(|mv| (mv.voter, mv.to));
        out
    }

    /// Objective after applying `mv`, without mutating the state.
    fn evaluate(&self, mv: &Move) -> (Margin, Margin) {
        let top = self.instance.voters()[mv.voter].top_choice();
        let mut from_tallies = self.profiles[mv.from].tallies().to_vec();
        from_tallies[top] -= 1;
        let from_total = self.profiles[mv.from].total() - 1;
        let mut to_tallies = self.profiles[mv.to].tallies().to_vec();
        to_tallies[top] += 1;
        let new_from = if from_total == 0 {
            Margin::Infinite
        } else {
            margin_from_tallies(&from_tallies, self.instance.semantics())
        };
        let new_to = margin_from_tallies(&to_tallies, self.instance.semantics());
        let mut max = Margin::Finite(0);
        let mut total = Margin::Finite(0);
        for (d, &margin) in self.margins.iter().enumerate() {
            let m = if d == mv.from {
                new_from
            } else if d == mv.to {
                new_to
            } else {
                margin
            };
            max = max.max(m);
            total = total.saturating_add(m);
        }
        (max, total)
    }

    fn apply(&mut self, mv: &Move) {
        let top = self.instance.voters()[mv.voter].top_choice();
        let pos = self.members[mv.from]
            .binary_search(&mv.voter)
            .expect("mover must live in the source district");
        self.members[mv.from].remove(pos);
        let pos = self.members[mv.to]
            .binary_search(&mv.voter)
            .expect_err("mover cannot already live in the target district");
        self.members[mv.to].insert(pos, mv.voter);
        self.profiles[mv.from].remove_vote(top);
        self.profiles[mv.to].add_vote(top);
        self.margins[mv.from] = profile_margin(&self.profiles[mv.from], self.instance);
        self.margins[mv.to] = profile_margin(&self.profiles[mv.to], self.instance);
        self.assignment.set(mv.voter, mv.to);
    }
}

/// Candidate moves for the current worst district under `variant`.
///
/// For `ConnectedDistricting` the instance must carry a voter graph.
pub fn candidate_moves(
    instance: &DistrictingInstance,
    a: &Assignment,
    variant: GreedyVariant,
) -> Vec<Move> {
    let state = SearchState::new(instance, a.clone());
    let pivot = state.pivot_order()[0];
    state.candidates_for_pivot(variant, pivot)
}

/// The instance actually constraining a variant: partitioning drops
/// mobility and the graph, districting drops the graph.
fn effective_instance(
    instance: &DistrictingInstance,
    variant: GreedyVariant,
) -> Result<DistrictingInstance> {
    match variant {
        GreedyVariant::Partitioning => Ok(instance.with_full_mobility().without_graph()),
        GreedyVariant::Districting => Ok(instance.without_graph()),
        GreedyVariant::ConnectedDistricting => {
            if instance.graph().is_none() {
                return Err(Error::MalformedInput(
                    "connected districting requires a voter graph".into(),
                ));
            }
            Ok(instance.clone())
        }
    }
}

/// Runs the greedy loop and reports the trajectory.
pub fn greedy_solve(instance: &DistrictingInstance, config: GreedyConfig) -> Result<SolveReport> {
    if config.max_iterations == 0 {
        return Err(Error::MalformedInput(
            "max_iterations must be positive".into(),
        ));
    }
    let effective = effective_instance(instance, config.variant)?;
    let start_violations = validate(&effective, effective.initial(), None);
    if !start_violations.is_empty() {
        let summary: Vec<String> = start_violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::MalformedInput(format!(
            "initial assignment invalid for {}: {}",
            config.variant.solver_name(),
            summary.join("; ")
        )));
    }

    let started = Instant::now();
    let mut state = SearchState::new(&effective, effective.initial().clone());
    let mut moves: Vec<MoveRecord> = Vec::new();
    while moves.len() < config.max_iterations {
        let current = state.objective();
        let mut best: Option<(Margin, Margin, Move)> = None;
        for pivot in state.pivot_order() {
            for mv in state.candidates_for_pivot(config.variant, pivot) {
                let (max, total) = state.evaluate(&mv);
                if (max, total) >= current {
                    continue;
                }
                // Candidates arrive sorted by (voter, to); strict
                // improvement keeps the first among equals.
                if best
                    .as_ref()
                    .map_or(true, |(bm, bt, _)| (max, total) < (*bm, *bt))
                {
                    best = Some((max, total, mv));
                }
            }
            if best.is_some() || !config.pivot_fallback {
                break;
            }
        }
        match best {
            Some((_, _, mv)) => {
                state.apply(&mv);
                moves.push(mv);
            }
            None => break,
        }
    }

    let info = SolverInfo::new(config.variant.solver_name())
        .param("max_iterations", config.max_iterations as u64)
        .param("pivot_fallback", config.pivot_fallback);
    let mut report = SolveReport::build(&effective, &state.assignment, moves, info);
    report.solver.wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}
