//! Exact fair-districting solver for few districts: enumerate per-district
//! (winner, runner-up, winner-score) guesses and test each with a
//! lower-bounded flow.
//!
//! For a guess, the network routes one unit per voter through a layer of
//! (alternative, district) nodes into district nodes: the winner edge pins
//! the guessed winner's tally exactly, the runner-up edge carries a demand
//! keeping the top-two gap small enough for the target, every other
//! alternative is capped at the winner's score, and the district-to-sink
//! edges carry the size bounds. A flow of value `n` decodes to a valid
//! assignment.
//!
//! The runner-up demand is `max(0, n_i - gap(t))` where `gap` translates
//! the margin target into a tally gap under the instance's semantics.
//! Clamping at zero (rather than discarding low-score guesses) keeps the
//! procedure complete for districts whose winner score is at most the
//! admissible gap, and makes feasibility monotone in `t`, which the
//! optimization wrapper's binary search relies on.

use crate::election::{max_gap_for_target, AltId, DistrictId, Margin};
use crate::error::{Error, Result};
use crate::flow::{max_flow_with_demands, FlowNetwork};
use crate::model::{Assignment, DistrictingInstance};

/// Resource guard for the guess enumeration.
#[derive(Clone, Copy, Debug)]
pub struct GuessBudget {
    /// Bound on the nominal guess-space size `prod_i m(m-1)n`.
    pub max_guesses: u64,
}

impl Default for GuessBudget {
    fn default() -> Self {
        GuessBudget {
            max_guesses: 10_000_000,
        }
    }
}

/// One per-district guess: winner, runner-up, and the winner's exact
/// plurality score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistrictGuess {
    pub winners: Vec<AltId>,
    pub runner_ups: Vec<AltId>,
    pub winner_scores: Vec<u64>,
}

impl DistrictGuess {
    fn check(&self, instance: &DistrictingInstance) -> Result<()> {
        let k = instance.k();
        if self.winners.len() != k || self.runner_ups.len() != k || self.winner_scores.len() != k
        {
            return Err(Error::MalformedInput(format!(
                "guess must cover all {k} districts"
            )));
        }
        for i in 0..k {
            if self.winners[i] >= instance.m() || self.runner_ups[i] >= instance.m() {
                return Err(Error::MalformedInput(format!(
                    "guess for district {i} mentions an alternative outside [0, {})",
                    instance.m()
                )));
            }
            if self.winners[i] == self.runner_ups[i] {
                return Err(Error::MalformedInput(format!(
                    "guess for district {i}: winner and runner-up coincide"
                )));
            }
            if self.winner_scores[i] == 0 || self.winner_scores[i] > instance.n() as u64 {
                return Err(Error::MalformedInput(format!(
                    "guess for district {i}: winner score {} outside [1, n]",
                    self.winner_scores[i]
                )));
            }
        }
        Ok(())
    }
}

/// The flow network for one guess, with enough structure to decode a
/// witness from a unit of flow per voter edge.
#[derive(Debug)]
pub struct GuessNetwork {
    pub network: FlowNetwork,
    /// `(voter, district, edge index)` for every voter-to-middle edge.
    assign_edges: Vec<(usize, DistrictId, usize)>,
    n: usize,
}

impl GuessNetwork {
    pub fn network(&self) -> &FlowNetwork {
        &self.network
    }

    /// Decodes an assignment from a value-`n` flow: each voter has exactly
    /// one saturated outgoing edge.
    pub fn decode(&self, edge_flows: &[u64]) -> Assignment {
        let mut district_of = vec![usize::MAX; self.n];
        for &(v, d, e) in &self.assign_edges {
            if edge_flows[e] > 0 {
                debug_assert_eq!(district_of[v], usize::MAX, "voter {v} routed twice");
                district_of[v] = d;
            }
        }
        debug_assert!(district_of.iter().all(|&d| d != usize::MAX));
        Assignment::new(district_of)
    }
}

/// Builds the guess network: source → voters → (alternative, district) →
/// districts → sink.
pub fn build_guess_network(
    instance: &DistrictingInstance,
    guess: &DistrictGuess,
    t: u64,
) -> Result<GuessNetwork> {
    guess.check(instance)?;
    let gap = max_gap_for_target(t, instance.semantics())?;
    let n = instance.n();
    let m = instance.m();
    let k = instance.k();
    // Node layout: voters, then (alternative, district) pairs, then
    // districts, then source and sink.
    let voter_node = |v: usize| v;
    let mid_node = |a: AltId, i: DistrictId| n + i * m + a;
    let district_node = |i: DistrictId| n + m * k + i;
    let source = n + m * k + k;
    let sink = source + 1;

    let mut net = FlowNetwork::new(sink + 1, source, sink)?;
    let mut assign_edges = Vec::new();
    for v in instance.voters() {
        net.add_edge(source, voter_node(v.id), 1, 0)?;
    }
    for v in instance.voters() {
        let a = v.top_choice();
        for &i in instance.mobility(v.id) {
            let e = net.add_edge(voter_node(v.id), mid_node(a, i), 1, 0)?;
            assign_edges.push((v.id, i, e));
        }
    }
    for i in 0..k {
        let score = guess.winner_scores[i];
        for a in 0..m {
            let (cap, demand) = if a == guess.winners[i] {
                (score, score)
            } else if a == guess.runner_ups[i] {
                (score, score.saturating_sub(gap))
            } else {
                (score, 0)
            };
            net.add_edge(mid_node(a, i), district_node(i), cap, demand)?;
        }
    }
    let size_cap = instance.s_max().map_or(n as u64, |mx| mx.min(n) as u64);
    for i in 0..k {
        net.add_edge(district_node(i), sink, size_cap, instance.s_min() as u64)?;
    }
    Ok(GuessNetwork {
        network: net,
        assign_edges,
        n,
    })
}

/// Iterates guesses in district-major lexicographic order, pruned to
/// component guesses that are not trivially infeasible.
struct GuessIter<'a> {
    /// Per district, the admissible (winner, runner-up, score) triples in
    /// lexicographic order.
    options: Vec<Vec<(AltId, AltId, u64)>>,
    cursor: Vec<usize>,
    done: bool,
    instance: &'a DistrictingInstance,
}

impl<'a> GuessIter<'a> {
    fn new(instance: &'a DistrictingInstance, gap: u64) -> Self {
        let m = instance.m();
        let k = instance.k();
        // reachable[i][a]: voters with top choice `a` allowed into district `i`.
        let mut reachable = vec![vec![0u64; m]; k];
        for v in instance.voters() {
            for &i in instance.mobility(v.id) {
                reachable[i][v.top_choice()] += 1;
            }
        }
        let mut options = Vec::with_capacity(k);
        for reach in reachable.iter() {
            let mut per_district = Vec::new();
            for x in 0..m {
                for y in 0..m {
                    if y == x {
                        continue;
                    }
                    // The winner's tally is pinned to the score, so scores
                    // beyond the reachable supporter count cannot be routed;
                    // same for the runner-up demand.
                    for score in 1..=reach[x] {
                        if score.saturating_sub(gap) > reach[y] {
                            continue;
                        }
                        per_district.push((x, y, score));
                    }
                }
            }
            options.push(per_district);
        }
        let done = options.iter().any(|o| o.is_empty());
        GuessIter {
            cursor: vec![0; k],
            options,
            done,
            instance,
        }
    }

    fn current(&self) -> DistrictGuess {
        let k = self.instance.k();
        let mut winners = Vec::with_capacity(k);
        let mut runner_ups = Vec::with_capacity(k);
        let mut winner_scores = Vec::with_capacity(k);
        for i in 0..k {
            let (x, y, s) = self.options[i][self.cursor[i]];
            winners.push(x);
            runner_ups.push(y);
            winner_scores.push(s);
        }
        DistrictGuess {
            winners,
            runner_ups,
            winner_scores,
        }
    }

    fn advance(&mut self) {
        // District-major: the last district's cursor moves fastest.
        let mut pos = self.cursor.len();
        while pos > 0 {
            pos -= 1;
            self.cursor[pos] += 1;
            if self.cursor[pos] < self.options[pos].len() {
                return;
            }
            self.cursor[pos] = 0;
        }
        self.done = true;
    }
}

/// Feasibility of the fair-districting decision problem at target `t`,
/// with a witness assignment when feasible.
pub fn decide_fair_districting(
    instance: &DistrictingInstance,
    t: u64,
    budget: GuessBudget,
) -> Result<(bool, Option<Assignment>)> {
    if instance.graph().is_some() {
        return Err(Error::WrongSolver(
            "the flow solver does not handle connectivity; use the greedy connected heuristic"
                .into(),
        ));
    }
    if t == 0 {
        return Err(Error::InfeasibleTarget(
            "every nonempty district has margin of victory at least 1".into(),
        ));
    }
    let m = instance.m() as u128;
    let per_district = m * (m - 1) * instance.n() as u128;
    let space = per_district.saturating_pow(instance.k() as u32);
    if space > budget.max_guesses as u128 {
        return Err(Error::ResourceLimit {
            what: "guess space size (m(m-1)n)^k".into(),
            actual: space,
            budget: budget.max_guesses as u128,
        });
    }
    let gap = max_gap_for_target(t, instance.semantics())?;
    let n = instance.n() as u64;
    let mut iter = GuessIter::new(instance, gap);
    while !iter.done {
        let guess = iter.current();
        let gn = build_guess_network(instance, &guess, t)?;
        if let Some(flow) = max_flow_with_demands(gn.network()) {
            if flow.value == n {
                let witness = gn.decode(&flow.edge_flows);
                debug_assert!(
                    crate::model::validate(instance, &witness, Some(t)).is_empty(),
                    "decoded witness must satisfy the target"
                );
                return Ok((true, Some(witness)));
            }
        }
        iter.advance();
    }
    Ok((false, None))
}

/// Smallest target `t` in `[1, n]` for which the instance is feasible,
/// found by binary search (feasibility is monotone in `t`); infinite when
/// even `t = n` fails.
pub fn minimize_fair_districting(
    instance: &DistrictingInstance,
    budget: GuessBudget,
) -> Result<(Margin, Option<Assignment>)> {
    let n = instance.n() as u64;
    if n == 0 {
        return Ok((Margin::Infinite, None));
    }
    let (feasible, witness) = decide_fair_districting(instance, n, budget)?;
    if !feasible {
        return Ok((Margin::Infinite, None));
    }
    let mut lo = 1u64;
    let mut hi = n;
    let mut best = witness;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let (feasible, witness) = decide_fair_districting(instance, mid, budget)?;
        if feasible {
            hi = mid;
            best = witness;
        } else {
            lo = mid + 1;
        }
    }
    Ok((Margin::Finite(lo), best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::MovSemantics::{ScoreGap, SetChange};
    use crate::election::Voter;
    use crate::model::{district_margins, validate, InstanceParams};

    fn small_instance(
        tops: &[usize],
        m: usize,
        k: usize,
        mobility: Vec<Vec<usize>>,
        initial: Vec<usize>,
        s_min: usize,
        s_max: Option<usize>,
        sem: crate::election::MovSemantics,
    ) -> DistrictingInstance {
        let voters: Vec<Voter> = tops
            .iter()
            .enumerate()
            .map(|(i, &a)| Voter::top(i, a))
            .collect();
        DistrictingInstance::new(InstanceParams {
            m,
            voters,
            k,
            initial: Assignment::new(initial),
            mobility,
            s_min,
            s_max,
            graph: None,
            semantics: sem,
        })
        .unwrap()
    }

    #[test]
    fn guess_network_shape() {
        // 3 voters all mobile, one district, guess (a, b, 2) at t = 1.
        let inst = small_instance(
            &[0, 0, 1],
            2,
            1,
            vec![vec![0]; 3],
            vec![0, 0, 0],
            0,
            None,
            ScoreGap,
        );
        let guess = DistrictGuess {
            winners: vec![0],
            runner_ups: vec![1],
            winner_scores: vec![2],
        };
        let gn = build_guess_network(&inst, &guess, 1).unwrap();
        let net = gn.network();
        // 3 voter nodes + 2 middle nodes + 1 district node + source + sink.
        assert_eq!(net.nodes(), 3 + 2 + 1 + 2);
        // The runner-up edge has demand n_1 - gap = 1 and capacity n_1 = 2.
        let runner_edge = net
            .edges()
            .iter()
            .find(|e| e.demand == 1 && e.capacity == 2)
            .expect("runner-up edge present");
        assert_eq!(runner_edge.head, 3 + 2);
        // Winner edge: demand = capacity = 2.
        assert!(net
            .edges()
            .iter()
            .any(|e| e.demand == 2 && e.capacity == 2));
    }

    #[test]
    fn restricted_mobility_omits_voter_edges() {
        let inst = small_instance(
            &[0, 1],
            2,
            2,
            vec![vec![1], vec![0, 1]],
            vec![1, 1],
            0,
            None,
            ScoreGap,
        );
        let guess = DistrictGuess {
            winners: vec![0, 0],
            runner_ups: vec![1, 1],
            winner_scores: vec![1, 1],
        };
        let gn = build_guess_network(&inst, &guess, 1).unwrap();
        // Voter 0 may only reach district 1: exactly one edge out of its
        // voter node.
        let out_of_v0 = gn
            .network()
            .edges()
            .iter()
            .filter(|e| e.tail == 0)
            .count();
        assert_eq!(out_of_v0, 1);
    }

    #[test]
    fn low_winner_scores_stay_feasible() {
        // Two singleton districts of a-voters: every winner score is 1,
        // which is within the admissible gap at t = 1. The clamped
        // runner-up demand keeps this feasible.
        let inst = small_instance(
            &[0, 0],
            2,
            2,
            vec![vec![0, 1]; 2],
            vec![0, 1],
            1,
            Some(1),
            ScoreGap,
        );
        let (feasible, witness) = decide_fair_districting(&inst, 1, GuessBudget::default()).unwrap();
        assert!(feasible);
        let witness = witness.unwrap();
        assert!(validate(&inst, &witness, Some(1)).is_empty());
    }

    #[test]
    fn large_target_admits_any_complete_assignment() {
        let inst = small_instance(
            &[0, 0, 1, 1, 2],
            3,
            2,
            vec![vec![0, 1]; 5],
            vec![0, 0, 1, 1, 0],
            1,
            None,
            SetChange,
        );
        let (feasible, _) =
            decide_fair_districting(&inst, inst.n() as u64, GuessBudget::default()).unwrap();
        assert!(feasible);
    }

    #[test]
    fn frozen_mobility_pins_the_initial_assignment() {
        // Mobility singletons: the only legal assignment is the initial one.
        let tops = [0, 0, 0, 1, 1];
        let initial = vec![0, 0, 1, 1, 1];
        let mobility: Vec<Vec<usize>> = initial.iter().map(|&d| vec![d]).collect();
        let inst = small_instance(&tops, 2, 2, mobility, initial, 0, None, ScoreGap);
        let (optimum, witness) =
            minimize_fair_districting(&inst, GuessBudget::default()).unwrap();
        let initial_max = district_margins(&inst, inst.initial())
            .into_iter()
            .max()
            .unwrap();
        assert_eq!(optimum, initial_max);
        assert_eq!(witness.unwrap().as_slice(), inst.initial().as_slice());
    }

    #[test]
    fn infeasible_when_sizes_cannot_be_met() {
        // 2 voters, 2 districts, every district needs 2 members.
        let inst = small_instance(
            &[0, 1],
            2,
            2,
            vec![vec![0, 1]; 2],
            vec![0, 1],
            2,
            Some(2),
            ScoreGap,
        );
        let (optimum, witness) =
            minimize_fair_districting(&inst, GuessBudget::default()).unwrap();
        assert_eq!(optimum, Margin::Infinite);
        assert!(witness.is_none());
    }

    #[test]
    fn budget_guard() {
        let inst = small_instance(
            &[0, 1, 2],
            3,
            2,
            vec![vec![0, 1]; 3],
            vec![0, 0, 1],
            0,
            None,
            ScoreGap,
        );
        let err = decide_fair_districting(&inst, 1, GuessBudget { max_guesses: 10 }).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }

    #[test]
    fn zero_target_is_rejected() {
        let inst = small_instance(
            &[0, 1],
            2,
            1,
            vec![vec![0]; 2],
            vec![0, 0],
            0,
            None,
            ScoreGap,
        );
        assert!(matches!(
            decide_fair_districting(&inst, 0, GuessBudget::default()),
            Err(Error::InfeasibleTarget(_))
        ));
    }
}
