//! Plurality elections and margins of victory.
//!
//! Alternatives, voters, and districts are dense integer ids. A
//! [`VoteProfile`] is the per-alternative tally of top choices; everything
//! downstream (validation, solvers, heuristics) consumes profiles only, so
//! full preference orders are carried but never read past the first entry.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense alternative index in `[0, m)`.
pub type AltId = usize;
/// Dense voter index in `[0, n)`.
pub type VoterId = usize;
/// Dense district index in `[0, k)`.
pub type DistrictId = usize;

/// Which margin-of-victory arithmetic to use.
///
/// `SetChange` counts changed ballots needed to alter the winner set
/// (ceiling of half the top-two gap, floor 1). `ScoreGap` is the raw
/// top-two tally gap, floor 1. Both agree that a tied district has
/// margin 1 and an empty one has margin infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MovSemantics {
    SetChange,
    ScoreGap,
}

impl fmt::Display for MovSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MovSemantics::SetChange => write!(f, "set-change"),
            MovSemantics::ScoreGap => write!(f, "score-gap"),
        }
    }
}

/// A margin of victory: a positive integer, or infinity for an empty
/// election. Ordered with `Infinite` above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Margin {
    Finite(u64),
    Infinite,
}

impl Margin {
    pub fn is_finite(&self) -> bool {
        matches!(self, Margin::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            Margin::Finite(v) => Some(*v),
            Margin::Infinite => None,
        }
    }

    /// Addition with the convention `x + Infinite = Infinite`.
    pub fn saturating_add(self, other: Margin) -> Margin {
        match (self, other) {
            (Margin::Finite(a), Margin::Finite(b)) => Margin::Finite(a.saturating_add(b)),
            _ => Margin::Infinite,
        }
    }
}

impl PartialOrd for Margin {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Margin {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Margin::Finite(a), Margin::Finite(b)) => a.cmp(b),
            (Margin::Finite(_), Margin::Infinite) => Ordering::Less,
            (Margin::Infinite, Margin::Finite(_)) => Ordering::Greater,
            (Margin::Infinite, Margin::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Margin::Finite(v) => write!(f, "{v}"),
            Margin::Infinite => write!(f, "inf"),
        }
    }
}

// JSON: finite margins are numbers, infinity is the string "inf".
impl Serialize for Margin {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Margin::Finite(v) => serializer.serialize_u64(*v),
            Margin::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Margin {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MarginVisitor;

        impl<'de> Visitor<'de> for MarginVisitor {
            type Value = Margin;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a nonnegative integer or the string \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Margin, E> {
                Ok(Margin::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Margin, E> {
                if v < 0 {
                    return Err(E::custom("margin cannot be negative"));
                }
                Ok(Margin::Finite(v as u64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Margin, E> {
                if v == "inf" {
                    Ok(Margin::Infinite)
                } else {
                    Err(E::custom(format!("expected \"inf\", got {v:?}")))
                }
            }
        }

        deserializer.deserialize_any(MarginVisitor)
    }
}

/// A voter with a preference order over alternatives.
///
/// The preference is either a full permutation of `[0, m)` or the
/// top-choice-only shorthand (a single entry). Plurality only ever reads
/// the first entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Voter {
    pub id: VoterId,
    pub preference: Vec<AltId>,
}

impl Voter {
    pub fn new(id: VoterId, preference: Vec<AltId>) -> Self {
        assert!(!preference.is_empty(), "a voter needs at least a top choice");
        Voter { id, preference }
    }

    /// Top-choice-only shorthand.
    pub fn top(id: VoterId, choice: AltId) -> Self {
        Voter::new(id, vec![choice])
    }

    pub fn top_choice(&self) -> AltId {
        self.preference[0]
    }
}

/// Per-alternative plurality tallies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteProfile {
    tallies: Vec<u64>,
    total: u64,
}

impl VoteProfile {
    pub fn from_tallies(tallies: Vec<u64>) -> Self {
        let total = tallies.iter().sum();
        VoteProfile { tallies, total }
    }

    pub fn empty(m: usize) -> Self {
        VoteProfile {
            tallies: vec![0; m],
            total: 0,
        }
    }

    /// Number of alternatives (tally entries, zeros included).
    pub fn m(&self) -> usize {
        self.tallies.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn tally(&self, a: AltId) -> u64 {
        self.tallies[a]
    }

    pub fn tallies(&self) -> &[u64] {
        &self.tallies
    }

    pub(crate) fn add_vote(&mut self, a: AltId) {
        self.tallies[a] += 1;
        self.total += 1;
    }

    pub(crate) fn remove_vote(&mut self, a: AltId) {
        debug_assert!(self.tallies[a] > 0);
        self.tallies[a] -= 1;
        self.total -= 1;
    }

    /// All alternatives attaining the maximum tally; empty when there are
    /// no votes at all.
    pub fn winners(&self) -> Vec<AltId> {
        winners(self)
    }

    /// The alternative with the second-highest tally (zeros included),
    /// ties broken toward the lowest id. `None` when `m < 2`.
    pub fn runner_up(&self) -> Option<AltId> {
        if self.m() < 2 {
            return None;
        }
        let mut best: Option<(u64, AltId)> = None;
        let mut second: Option<(u64, AltId)> = None;
        for (a, &t) in self.tallies.iter().enumerate() {
            // Order by (tally desc, id asc); `best`/`second` hold the top two.
            if best.map_or(true, |(bt, _)| t > bt) {
                second = best;
                best = Some((t, a));
            } else if second.map_or(true, |(st, _)| t > st) {
                second = Some((t, a));
            }
        }
        second.map(|(_, a)| a)
    }

    pub fn margin(&self, sem: MovSemantics) -> Result<Margin> {
        margin_of_victory(self, sem)
    }
}

/// Tally the top choices of `voters` over `m` alternatives.
pub fn plurality_scores(voters: &[Voter], m: usize) -> Result<VoteProfile> {
    let mut profile = VoteProfile::empty(m);
    for v in voters {
        let top = v.top_choice();
        if top >= m {
            return Err(Error::MalformedInput(format!(
                "voter {} has top choice {} out of range for m={}",
                v.id, top, m
            )));
        }
        profile.add_vote(top);
    }
    Ok(profile)
}

/// The plurality winner set: every alternative with the maximum tally.
pub fn winners(profile: &VoteProfile) -> Vec<AltId> {
    if profile.total() == 0 {
        return Vec::new();
    }
    let max = *profile.tallies().iter().max().expect("nonempty tallies");
    profile
        .tallies()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t == max)
        .map(|(a, _)| a)
        .collect()
}

/// Top two tallies of a nonempty tally slice with at least two entries.
pub(crate) fn top_two(tallies: &[u64]) -> (u64, u64) {
    debug_assert!(tallies.len() >= 2);
    let mut s1 = 0u64;
    let mut s2 = 0u64;
    for &t in tallies {
        if t > s1 {
            s2 = s1;
            s1 = t;
        } else if t > s2 {
            s2 = t;
        }
    }
    (s1, s2)
}

/// Margin arithmetic for a tally slice known to have `m >= 2` entries and a
/// positive total.
pub(crate) fn margin_from_tallies(tallies: &[u64], sem: MovSemantics) -> Margin {
    let (s1, s2) = top_two(tallies);
    let d = s1 - s2;
    let raw = match sem {
        MovSemantics::SetChange => d.div_ceil(2),
        MovSemantics::ScoreGap => d,
    };
    Margin::Finite(raw.max(1))
}

/// Margin of victory of a plurality profile.
///
/// An empty profile has margin infinity. A nonempty profile needs `m >= 2`
/// (with a single alternative no alternative outcome exists).
pub fn margin_of_victory(profile: &VoteProfile, sem: MovSemantics) -> Result<Margin> {
    if profile.total() == 0 {
        return Ok(Margin::Infinite);
    }
    if profile.m() < 2 {
        return Err(Error::UnsupportedInstance(format!(
            "margin of victory needs at least 2 alternatives, got m={}",
            profile.m()
        )));
    }
    Ok(margin_from_tallies(profile.tallies(), sem))
}

/// The largest top-two gap a nonempty district may have while keeping its
/// margin of victory at most `t`.
pub fn max_gap_for_target(t: u64, sem: MovSemantics) -> Result<u64> {
    if t == 0 {
        return Err(Error::InfeasibleTarget(
            "every nonempty district has margin of victory at least 1".into(),
        ));
    }
    Ok(match sem {
        MovSemantics::ScoreGap => t,
        MovSemantics::SetChange => t.saturating_mul(2),
    })
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn tally_vec() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0u64..40, 2..6)
    }

    proptest! {
        #[test]
        fn score_gap_dominates_set_change(tallies in tally_vec()) {
            let p = VoteProfile::from_tallies(tallies);
            prop_assume!(p.total() > 0);
            let sg = margin_of_victory(&p, MovSemantics::ScoreGap).unwrap();
            let sc = margin_of_victory(&p, MovSemantics::SetChange).unwrap();
            prop_assert!(sg >= sc);
            prop_assert!(sc >= Margin::Finite(1));
            prop_assert!(sc.is_finite() && sg.is_finite());
        }

        #[test]
        fn margin_invariant_under_relabeling(tallies in tally_vec(), seed in 0u64..1000) {
            let p = VoteProfile::from_tallies(tallies.clone());
            // Rotate by seed as a cheap deterministic permutation.
            let m = tallies.len();
            let shift = (seed as usize) % m;
            let permuted: Vec<u64> = (0..m).map(|i| tallies[(i + shift) % m]).collect();
            let q = VoteProfile::from_tallies(permuted);
            for sem in [MovSemantics::SetChange, MovSemantics::ScoreGap] {
                if p.total() > 0 {
                    prop_assert_eq!(
                        margin_of_victory(&p, sem).unwrap(),
                        margin_of_victory(&q, sem).unwrap()
                    );
                }
            }
        }

        #[test]
        fn winners_nonempty_for_positive_total(tallies in tally_vec()) {
            let p = VoteProfile::from_tallies(tallies);
            if p.total() > 0 {
                prop_assert!(!winners(&p).is_empty());
            } else {
                prop_assert!(winners(&p).is_empty());
            }
        }
    }
}
