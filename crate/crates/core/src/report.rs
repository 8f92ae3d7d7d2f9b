//! Solver reports.
//!
//! Every solver and the evaluator emit the same JSON shape. The stable keys
//! are `districts`, `max_mov`, `total_mov`, `moves`, and `solver`; reports
//! additionally embed the final assignment and the before-state so
//! distribution charts can be rendered from the report alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::election::{AltId, DistrictId, Margin, VoterId};
use crate::model::{district_profiles, Assignment, DistrictingInstance};

/// Winner set, tallies, and margin of one district.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistrictSummary {
    pub winners: Vec<AltId>,
    pub tallies: Vec<u64>,
    pub mov: Margin,
}

/// One applied voter move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub voter: VoterId,
    pub from: DistrictId,
    pub to: DistrictId,
}

/// Solver name, parameters, and wall time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub wall_time_ms: u64,
}

impl SolverInfo {
    pub fn new(name: &str) -> Self {
        SolverInfo {
            name: name.to_string(),
            params: BTreeMap::new(),
            wall_time_ms: 0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub districts: Vec<DistrictSummary>,
    pub max_mov: Margin,
    pub total_mov: Margin,
    pub districts_before: Vec<DistrictSummary>,
    pub max_mov_before: Margin,
    pub total_mov_before: Margin,
    pub moves: Vec<MoveRecord>,
    pub assignment: Vec<DistrictId>,
    pub solver: SolverInfo,
    /// Present for decision/optimization runs: "feasible", "infeasible",
    /// "optimal", or a verdict boolean rendered as text.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<String>,
}

fn summarize(instance: &DistrictingInstance, a: &Assignment) -> Vec<DistrictSummary> {
    district_profiles(instance, a)
        .iter()
        .map(|p| DistrictSummary {
            winners: p.winners(),
            tallies: p.tallies().to_vec(),
            mov: p
                .margin(instance.semantics())
                .expect("instance guarantees m >= 2"),
        })
        .collect()
}

fn aggregate(districts: &[DistrictSummary]) -> (Margin, Margin) {
    let max = districts
        .iter()
        .map(|d| d.mov)
        .max()
        .unwrap_or(Margin::Infinite);
    let total = districts
        .iter()
        .fold(Margin::Finite(0), |acc, d| acc.saturating_add(d.mov));
    (max, total)
}

impl SolveReport {
    /// Builds a report for `final_assignment` reached from the instance's
    /// initial assignment via `moves`.
    pub fn build(
        instance: &DistrictingInstance,
        final_assignment: &Assignment,
        moves: Vec<MoveRecord>,
        solver: SolverInfo,
    ) -> Self {
        let districts_before = summarize(instance, instance.initial());
        let districts = summarize(instance, final_assignment);
        let (max_mov_before, total_mov_before) = aggregate(&districts_before);
        let (max_mov, total_mov) = aggregate(&districts);
        SolveReport {
            districts,
            max_mov,
            total_mov,
            districts_before,
            max_mov_before,
            total_mov_before,
            moves,
            assignment: final_assignment.as_slice().to_vec(),
            solver,
            verdict: None,
        }
    }

    pub fn with_verdict(mut self, verdict: &str) -> Self {
        self.verdict = Some(verdict.to_string());
        self
    }

    /// Replays the move list on the instance's initial assignment.
    pub fn replay_moves(&self, instance: &DistrictingInstance) -> Assignment {
        let mut a = instance.initial().clone();
        for mv in &self.moves {
            debug_assert_eq!(a.district_of(mv.voter), mv.from);
            a.set(mv.voter, mv.to);
        }
        a
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> crate::error::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Computes moves turning `from` into `to` (voters in ascending id order).
pub fn diff_as_moves(from: &Assignment, to: &Assignment) -> Vec<MoveRecord> {
    assert_eq!(from.n(), to.n());
    (0..from.n())
        .filter(|&v| from.district_of(v) != to.district_of(v))
        .map(|v| MoveRecord {
            voter: v,
            from: from.district_of(v),
            to: to.district_of(v),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{MovSemantics, Voter};

    fn instance() -> DistrictingInstance {
        let voters = vec![
            Voter::top(0, 0),
            Voter::top(1, 0),
            Voter::top(2, 1),
            Voter::top(3, 1),
        ];
        DistrictingInstance::full_mobility(
            2,
            voters,
            2,
            Assignment::new(vec![0, 0, 1, 1]),
            0,
            None,
            None,
            MovSemantics::ScoreGap,
        )
        .unwrap()
    }

    #[test]
    fn report_aggregates_match_districts() {
        let inst = instance();
        let final_a = Assignment::new(vec![0, 1, 0, 1]);
        let moves = diff_as_moves(inst.initial(), &final_a);
        let report = SolveReport::build(&inst, &final_a, moves, SolverInfo::new("test"));

        let max = report.districts.iter().map(|d| d.mov).max().unwrap();
        let total = report
            .districts
            .iter()
            .fold(Margin::Finite(0), |acc, d| acc.saturating_add(d.mov));
        assert_eq!(report.max_mov, max);
        assert_eq!(report.total_mov, total);
        assert_eq!(report.max_mov_before, Margin::Finite(2));
        assert_eq!(report.total_mov_before, Margin::Finite(4));

        // Replaying the move list reproduces the reported assignment.
        let replayed = report.replay_moves(&inst);
        assert_eq!(replayed.as_slice(), report.assignment.as_slice());
    }

    #[test]
    fn report_json_has_stable_keys() {
        let inst = instance();
        let report = SolveReport::build(
            &inst,
            inst.initial(),
            Vec::new(),
            SolverInfo::new("test").param("alpha", 3),
        );
        let json = report.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in [
            "districts",
            "max_mov",
            "total_mov",
            "moves",
            "solver",
            "assignment",
        ] {
            assert!(value.get(key).is_some(), "missing key {key}");
        }
        let parsed = SolveReport::from_json(&json).unwrap();
        assert_eq!(parsed, report);
    }
}
