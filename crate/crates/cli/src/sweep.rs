//! Experiment sweep: line-model instances across a homophily and size-slack
//! grid, each (parameter point, variant) summarized as one CSV row of means.

use std::path::Path;
use std::process::ExitCode;

use fairdist_core::{
    district_margins, generate_line_model, greedy_solve, solve_fair_partitioning, Assignment,
    DistrictingInstance, DpBudget, Error, GreedyConfig, GreedyVariant, LineModelConfig, Margin,
    MovSemantics, Result,
};
use serde::Deserialize;

fn default_edge_prob() -> f64 {
    0.25
}

fn default_iterations() -> u64 {
    1
}

fn default_max_iters() -> usize {
    1_000_000
}

fn default_budget() -> u64 {
    10_000_000
}

fn default_semantics() -> MovSemantics {
    MovSemantics::ScoreGap
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    voters: usize,
    candidates: usize,
    districts: usize,
    #[serde(default = "default_edge_prob")]
    edge_prob: f64,
    homophily: Vec<f64>,
    size_slack: Vec<f64>,
    instances: u64,
    #[serde(default)]
    base_seed: u64,
    /// Repeated runs per instance; the solvers are deterministic, so this
    /// only weights the averages and defaults to 1.
    #[serde(default = "default_iterations")]
    iterations: u64,
    variants: Vec<SweepVariant>,
    #[serde(default = "default_semantics")]
    semantics: MovSemantics,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_budget")]
    budget: u64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SweepVariant {
    GreedyPartitioning,
    GreedyDistricting,
    GreedyConnectedDistricting,
    /// Exact full-mobility optimum via the count-vector dynamic program.
    ExactBaseline,
}

impl SweepVariant {
    fn label(&self) -> &'static str {
        match self {
            SweepVariant::GreedyPartitioning => "greedy-partitioning",
            SweepVariant::GreedyDistricting => "greedy-districting",
            SweepVariant::GreedyConnectedDistricting => "greedy-connected-districting",
            SweepVariant::ExactBaseline => "exact-baseline",
        }
    }
}

fn finite(margin: Margin, what: &str) -> Result<u64> {
    margin.finite().ok_or_else(|| {
        Error::UnsupportedInstance(format!("{what} is infinite; sweep rows need finite margins"))
    })
}

/// (max, total) margins of an assignment.
fn margins_of(instance: &DistrictingInstance, assignment: &Assignment) -> Result<(u64, u64)> {
    let margins = district_margins(instance, assignment);
    let max = margins.iter().copied().max().unwrap_or(Margin::Infinite);
    let total = margins
        .iter()
        .fold(Margin::Finite(0), |acc, &m| acc.saturating_add(m));
    Ok((finite(max, "max margin")?, finite(total, "total margin")?))
}

fn run_variant(
    variant: SweepVariant,
    instance: &DistrictingInstance,
    config: &SweepConfig,
) -> Result<(u64, u64)> {
    match variant {
        SweepVariant::GreedyPartitioning
        | SweepVariant::GreedyDistricting
        | SweepVariant::GreedyConnectedDistricting => {
            let greedy_variant = match variant {
                SweepVariant::GreedyPartitioning => GreedyVariant::Partitioning,
                SweepVariant::GreedyDistricting => GreedyVariant::Districting,
                _ => GreedyVariant::ConnectedDistricting,
            };
            let report = greedy_solve(
                instance,
                GreedyConfig {
                    variant: greedy_variant,
                    max_iterations: config.max_iters,
                    pivot_fallback: false,
                },
            )?;
            Ok((
                finite(report.max_mov, "max margin")?,
                finite(report.total_mov, "total margin")?,
            ))
        }
        SweepVariant::ExactBaseline => {
            // The baseline ignores the voter graph and solves the
            // full-mobility relaxation exactly.
            let relaxed = instance.without_graph();
            let (optimum, witness) = solve_fair_partitioning(
                &relaxed,
                DpBudget {
                    max_table_cells: config.budget,
                },
            )?;
            let witness = witness.ok_or_else(|| {
                Error::UnsupportedInstance("baseline optimum is infinite".into())
            })?;
            let (max, total) = margins_of(&relaxed, &witness)?;
            debug_assert_eq!(Margin::Finite(max), optimum);
            Ok((max, total))
        }
    }
}

pub fn run(config_path: &Path, out_path: &Path) -> Result<ExitCode> {
    let config: SweepConfig = serde_json::from_str(&std::fs::read_to_string(config_path)?)?;
    let mut writer = csv::Writer::from_path(out_path).map_err(|e| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    writer
        .write_record([
            "homophily",
            "size_slack",
            "variant",
            "max_mov_before",
            "max_mov_after",
            "total_mov_before",
            "total_mov_after",
            "instances",
        ])
        .map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;

    for &homophily in &config.homophily {
        for &size_slack in &config.size_slack {
            let mut sums: Vec<[f64; 4]> = vec![[0.0; 4]; config.variants.len()];
            let mut samples = 0u64;
            for index in 0..config.instances {
                let line_config = LineModelConfig {
                    n_voters: config.voters,
                    n_candidates: config.candidates,
                    n_districts: config.districts,
                    homophily,
                    edge_prob: config.edge_prob,
                    size_slack,
                    semantics: config.semantics,
                    seed: config.base_seed + index,
                };
                let instance = generate_line_model(&line_config)?;
                let (max_before, total_before) = margins_of(&instance, instance.initial())?;
                for _iteration in 0..config.iterations {
                    samples += 1;
                    for (vi, &variant) in config.variants.iter().enumerate() {
                        let (max_after, total_after) =
                            run_variant(variant, &instance, &config)?;
                        sums[vi][0] += max_before as f64;
                        sums[vi][1] += max_after as f64;
                        sums[vi][2] += total_before as f64;
                        sums[vi][3] += total_after as f64;
                    }
                }
            }
            if samples == 0 {
                continue;
            }
            for (vi, variant) in config.variants.iter().enumerate() {
                let mean = |x: f64| x / samples as f64;
                writer
                    .write_record([
                        format!("{homophily}"),
                        format!("{size_slack}"),
                        variant.label().to_string(),
                        format!("{}", mean(sums[vi][0])),
                        format!("{}", mean(sums[vi][1])),
                        format!("{}", mean(sums[vi][2])),
                        format!("{}", mean(sums[vi][3])),
                        format!("{}", config.instances),
                    ])
                    .map_err(|e| Error::Parse {
                        line: 0,
                        msg: e.to_string(),
                    })?;
            }
        }
    }
    writer.flush()?;
    println!("wrote sweep results to {}", out_path.display());
    Ok(ExitCode::SUCCESS)
}
