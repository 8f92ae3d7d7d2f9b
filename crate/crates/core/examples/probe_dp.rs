use std::time::Instant;
use fairdist_core::{MovSemantics, Margin};

fn all_tally_vectors(m: usize, max_total: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    fn rec(current: &mut Vec<u64>, m: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if current.len() == m { out.push(current.clone()); return; }
        for v in 0..=left { current.push(v); rec(current, m, left - v, out); current.pop(); }
    }
    rec(&mut Vec::new(), m, max_total, &mut out);
    out
}

fn main() {
    let start = Instant::now();
    let mut combos = 0u64;
    let mut solved = 0u64;
    for m in 2..=3usize {
        for tallies in all_tally_vectors(m, 10) {
            for k in 1..=3usize {
                for s_min in 0..=4usize {
                    for s_max in 2..=10usize {
                        if s_min > s_max { continue; }
                        for sem in [MovSemantics::SetChange, MovSemantics::ScoreGap] {
                            combos += 1;
                            // DP
                            let inst = {
                                let mut voters = Vec::new();
                                for (a, &t) in tallies.iter().enumerate() {
                                    for _ in 0..t { voters.push(fairdist_core::Voter::top(voters.len(), a)); }
                                }
                                let n = voters.len();
                                fairdist_core::DistrictingInstance::full_mobility(
                                    m, voters, k, fairdist_core::Assignment::new(vec![0; n]),
                                    s_min, Some(s_max), None, sem).unwrap()
                            };
                            let (opt, _) = fairdist_core::solve_fair_partitioning(&inst, fairdist_core::DpBudget::default()).unwrap();
                            if opt != Margin::Infinite { solved += 1; }
                        }
                    }
                }
            }
        }
    }
    println!("combos {combos} solved-finite {solved} in {:?}", start.elapsed());
}
