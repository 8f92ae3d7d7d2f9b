//! Exact fair-partitioning solver: dynamic programming over per-alternative
//! count vectors.
//!
//! Only the tally of each district matters under full mobility, so the
//! state space is the set of count vectors `(i_a)` with `0 <= i_a <= n_a`
//! and a layer index `l` counting districts still to fill. The table entry
//! holds the minimum achievable maximum margin over all ways to split the
//! vector into `l` size-feasible districts. A companion choice table
//! records the minimizing sub-vector per cell for witness reconstruction.
//!
//! The table has `k * prod(n_a + 1)` cells, exponential in the number of
//! alternatives, so a configured cell budget refuses oversized instances
//! instead of attempting them.

use crate::election::{margin_from_tallies, Margin, VoterId};
use crate::error::{Error, Result};
use crate::model::{Assignment, DistrictingInstance};

/// Resource guard for the DP table.
#[derive(Clone, Copy, Debug)]
pub struct DpBudget {
    pub max_table_cells: u64,
}

impl Default for DpBudget {
    fn default() -> Self {
        DpBudget {
            max_table_cells: 10_000_000,
        }
    }
}

const INF_VAL: u64 = u64::MAX;

struct VectorSpace {
    radices: Vec<u64>,
    /// Mixed-radix strides; ascending cell index is ascending lexicographic
    /// order of the decoded vector.
    strides: Vec<u64>,
    cells: u64,
}

impl VectorSpace {
    fn new(tallies: &[u64]) -> VectorSpace {
        let radices: Vec<u64> = tallies.iter().map(|&t| t + 1).collect();
        let mut strides = vec![1u64; radices.len()];
        for a in (0..radices.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * radices[a + 1];
        }
        let cells = radices.iter().product();
        VectorSpace {
            radices,
            strides,
            cells,
        }
    }

    fn encode(&self, vector: &[u64]) -> u64 {
        vector
            .iter()
            .zip(&self.strides)
            .map(|(&v, &s)| v * s)
            .sum()
    }

    fn decode(&self, mut index: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.radices.len()];
        for a in 0..self.radices.len() {
            out[a] = index / self.strides[a];
            index %= self.strides[a];
        }
        out
    }
}

fn check_fair_partitioning_shape(instance: &DistrictingInstance) -> Result<()> {
    if !instance.is_full_mobility() {
        return Err(Error::WrongSolver(
            "the partitioning solver requires full mobility; use the flow-based districting solver"
                .into(),
        ));
    }
    if instance.graph().is_some() {
        return Err(Error::WrongSolver(
            "the partitioning solver does not handle connectivity; drop the voter graph first"
                .into(),
        ));
    }
    Ok(())
}

/// Margin of a count vector, infinite for the empty vector.
fn vector_margin(vector: &[u64], instance: &DistrictingInstance) -> u64 {
    if vector.iter().all(|&v| v == 0) {
        return INF_VAL;
    }
    match margin_from_tallies(vector, instance.semantics()) {
        Margin::Finite(v) => v,
        Margin::Infinite => INF_VAL,
    }
}

/// Minimum over all size-feasible partitions into `k` districts of the
/// maximum district margin, with a witness assignment when finite.
pub fn solve_fair_partitioning(
    instance: &DistrictingInstance,
    budget: DpBudget,
) -> Result<(Margin, Option<Assignment>)> {
    check_fair_partitioning_shape(instance)?;
    let tallies = instance.global_tallies();
    let space = VectorSpace::new(&tallies);
    let k = instance.k() as u64;
    let cells = (space.cells as u128) * (k as u128);
    if cells > budget.max_table_cells as u128 {
        return Err(Error::ResourceLimit {
            what: "dp table cells (k * prod(n_a + 1))".into(),
            actual: cells,
            budget: budget.max_table_cells as u128,
        });
    }

    let size_ok = |size: u64| -> bool {
        size >= instance.s_min() as u64
            && instance.s_max().map_or(true, |mx| size <= mx as u64)
    };

    // Layer 1: a single district must hold the whole vector and fit the
    // size bounds.
    let mut prev: Vec<u64> = Vec::with_capacity(space.cells as usize);
    for idx in 0..space.cells {
        let vector = space.decode(idx);
        let size: u64 = vector.iter().sum();
        let value = if size_ok(size) {
            vector_margin(&vector, instance)
        } else {
            INF_VAL
        };
        prev.push(value);
    }

    // choices[l][cell] is the encoded sub-vector split off at layer l + 2.
    let mut choices: Vec<Vec<u64>> = Vec::new();
    for _layer in 2..=instance.k() {
        let mut cur = vec![INF_VAL; space.cells as usize];
        let mut choice = vec![0u64; space.cells as usize];
        for idx in 0..space.cells {
            let vector = space.decode(idx);
            let mut best = INF_VAL;
            let mut best_sub = 0u64;
            // Odometer over sub-vectors of `vector` in ascending
            // lexicographic order; strict improvement keeps the first
            // (lexicographically smallest) minimizer.
            let mut sub = vec![0u64; vector.len()];
            let mut sub_size = 0u64;
            loop {
                if size_ok(sub_size) {
                    let own = vector_margin(&sub, instance);
                    if own < best {
                        let rest_idx = idx - space.encode(&sub);
                        let value = own.max(prev[rest_idx as usize]);
                        if value < best {
                            best = value;
                            best_sub = space.encode(&sub);
                        }
                    }
                }
                // Advance the odometer (last coordinate fastest).
                let mut pos = vector.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    if sub[pos] < vector[pos] {
                        sub[pos] += 1;
                        sub_size += 1;
                        break;
                    }
                    sub_size -= sub[pos];
                    sub[pos] = 0;
                }
                if pos == 0 && sub[0] == 0 {
                    break;
                }
            }
            cur[idx as usize] = best;
            choice[idx as usize] = best_sub;
        }
        choices.push(choice);
        prev = cur;
    }

    let full_idx = space.cells - 1;
    let optimum = prev[full_idx as usize];
    if optimum == INF_VAL {
        return Ok((Margin::Infinite, None));
    }

    // Reconstruct one district count vector per slot, filling slots k-1
    // down to 0.
    let m = instance.m();
    let mut district_counts = vec![vec![0u64; m]; instance.k()];
    let mut remaining = full_idx;
    for layer in (2..=instance.k()).rev() {
        let sub_idx = choices[layer - 2][remaining as usize];
        district_counts[layer - 1] = space.decode(sub_idx);
        remaining -= sub_idx;
    }
    district_counts[0] = space.decode(remaining);

    // Hand voters to districts class by class; voters are anonymous within
    // a top-choice class, so ascending id order is as good as any.
    let mut by_class: Vec<Vec<VoterId>> = vec![Vec::new(); m];
    for v in instance.voters() {
        by_class[v.top_choice()].push(v.id);
    }
    let mut next_in_class = vec![0usize; m];
    let mut district_of = vec![0usize; instance.n()];
    for (d, counts) in district_counts.iter().enumerate() {
        for (a, &count) in counts.iter().enumerate() {
            for _ in 0..count {
                let v = by_class[a][next_in_class[a]];
                next_in_class[a] += 1;
                district_of[v] = d;
            }
        }
    }
    Ok((
        Margin::Finite(optimum),
        Some(Assignment::new(district_of)),
    ))
}

/// Decision form: is there a size-feasible partition with every district
/// margin at most `t`?
pub fn decide_fair_partitioning(
    instance: &DistrictingInstance,
    t: u64,
    budget: DpBudget,
) -> Result<bool> {
    let (optimum, _) = solve_fair_partitioning(instance, budget)?;
    Ok(optimum <= Margin::Finite(t))
}
