use fairdist_core::{
    generate_line_model, greedy_solve, GreedyConfig, GreedyVariant, LineModelConfig, Margin,
};

fn main() {
    for edge_prob in [0.1, 0.25, 0.5] {
        for h in [0.0, 0.5, 1.0] {
            let mut before_sum = 0.0;
            let mut after: Vec<(GreedyVariant, f64)> = vec![
                (GreedyVariant::Partitioning, 0.0),
                (GreedyVariant::Districting, 0.0),
                (GreedyVariant::ConnectedDistricting, 0.0),
            ];
            let count = 16;
            for seed in 0..count {
                let mut config = LineModelConfig::new(100, 5, 5, seed);
                config.homophily = h;
                config.edge_prob = edge_prob;
                config.semantics = fairdist_core::MovSemantics::ScoreGap;
                let inst = generate_line_model(&config).unwrap();
                let mut first = true;
                for (variant, acc) in after.iter_mut() {
                    let report = greedy_solve(&inst, GreedyConfig::new(*variant)).unwrap();
                    if first {
                        if let Margin::Finite(v) = report.max_mov_before {
                            before_sum += v as f64;
                        }
                        first = false;
                    }
                    if let Margin::Finite(v) = report.max_mov {
                        *acc += v as f64;
                    }
                }
            }
            let before = before_sum / count as f64;
            print!("p0={edge_prob} h={h}: before={before:.2}");
            for (variant, acc) in &after {
                let mean = acc / count as f64;
                print!(" | {:?}={:.2} ({:.0}%)", variant, mean, 100.0 * (1.0 - mean / before));
            }
            println!();
        }
    }
}
