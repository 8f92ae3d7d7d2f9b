//! Command-line surface tying generation, ingestion, solving, and
//! reporting together.
//!
//! Exit codes: 0 on success, 2 when a solve is infeasible or a verdict is
//! negative (the report is still written), 1 on usage/parse/budget errors
//! with a one-line diagnostic on stderr.

mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairdist_core::{
    decide_fair_districting, greedy_solve, instance_from_json, instance_to_json,
    load_aggregate_csv, load_locations_csv, margin_of_victory, minimize_fair_districting,
    reduce_2dcp_to_fair_connected_districting, reduce_sat_to_fair_districting,
    solve_fair_partitioning, validate, winners, Assignment, DistrictingInstance, DpBudget,
    ExpandOptions, GreedyConfig, GreedyVariant, GuessBudget, LineModelConfig, Margin,
    MovSemantics, SampleSpec, SatFormula, SolveReport, SolverInfo, TwoDcpInstance, VoteProfile,
};

#[derive(Parser)]
#[command(name = "fairdist", version, about = "District assignment solvers minimizing the maximum margin of victory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SemanticsArg {
    /// Ballots to change the winner set (ceil of half the gap).
    SetChange,
    /// Raw top-two tally gap.
    ScoreGap,
}

impl From<SemanticsArg> for MovSemantics {
    fn from(arg: SemanticsArg) -> Self {
        match arg {
            SemanticsArg::SetChange => MovSemantics::SetChange,
            SemanticsArg::ScoreGap => MovSemantics::ScoreGap,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Partitioning,
    Districting,
    Connected,
}

impl From<VariantArg> for GreedyVariant {
    fn from(arg: VariantArg) -> Self {
        match arg {
            VariantArg::Partitioning => GreedyVariant::Partitioning,
            VariantArg::Districting => GreedyVariant::Districting,
            VariantArg::Connected => GreedyVariant::ConnectedDistricting,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic line-model instance.
    Generate(GenerateArgs),
    /// Build an instance from aggregate vote and location CSVs.
    Ingest(IngestArgs),
    /// Margin of victory and winners of a single tally vector.
    Mov(MovArgs),
    /// Exact full-mobility solver (dynamic program over count vectors).
    SolveDp(SolveArgs),
    /// Exact mobility-respecting solver (guess enumeration plus flows).
    SolveFlow(SolveArgs),
    /// Greedy local search.
    Greedy(GreedyArgs),
    /// Build the hardness instance of a CNF formula (DIMACS input).
    ReduceSat(ReduceArgs),
    /// Build the connected-variant hardness instance of a 2DCP input.
    #[command(name = "reduce-2dcp")]
    Reduce2dcp(ReduceArgs),
    /// Evaluate an assignment against an instance.
    Evaluate(EvaluateArgs),
    /// Run a line-model experiment sweep into a CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    voters: usize,
    #[arg(long, default_value_t = 5)]
    candidates: usize,
    #[arg(long, default_value_t = 5)]
    districts: usize,
    #[arg(long, default_value_t = 0.0)]
    homophily: f64,
    #[arg(long, default_value_t = 0.25)]
    edge_prob: f64,
    /// District sizes may deviate from n/k by this fraction.
    #[arg(long, default_value_t = 0.2)]
    slack: f64,
    #[arg(long, value_enum, default_value_t = SemanticsArg::ScoreGap)]
    semantics: SemanticsArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Aggregate CSV with header `district,alternative,count`.
    #[arg(long)]
    votes: PathBuf,
    /// Locations CSV with header `district,x,y`.
    #[arg(long)]
    locations: Option<PathBuf>,
    /// Restrict voters to their closest q districts (home included).
    #[arg(long)]
    closest_q: Option<usize>,
    /// Keep each voter independently with this probability.
    #[arg(long)]
    sample_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    smin: usize,
    #[arg(long)]
    smax: Option<usize>,
    #[arg(long, value_enum, default_value_t = SemanticsArg::ScoreGap)]
    semantics: SemanticsArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MovArgs {
    /// Comma-separated tallies, e.g. 5,3,2.
    #[arg(long)]
    tallies: String,
    #[arg(long, value_enum, default_value_t = SemanticsArg::SetChange)]
    semantics: SemanticsArg,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Decide feasibility at this margin target instead of optimizing.
    #[arg(long)]
    target: Option<u64>,
    /// Resource budget (table cells or nominal guess-space size).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
    /// Try further pivot districts when the worst admits no improving move.
    #[arg(long, default_value_t = false)]
    pivot_fallback: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Assignment JSON: a bare array or a report with an `assignment` key.
    #[arg(long)]
    assignment: PathBuf,
    #[arg(long)]
    target: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if err.use_stderr() {
                eprintln!("error: {}", err.kind());
                return ExitCode::from(1);
            }
            // --help / --version.
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> fairdist_core::Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Ingest(args) => ingest(args),
        Command::Mov(args) => mov(args),
        Command::SolveDp(args) => solve_dp(args),
        Command::SolveFlow(args) => solve_flow(args),
        Command::Greedy(args) => greedy(args),
        Command::ReduceSat(args) => reduce_sat(args),
        Command::Reduce2dcp(args) => reduce_2dcp(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Sweep(args) => sweep::run(&args.config, &args.out),
    }
}

fn read_instance(path: &PathBuf) -> fairdist_core::Result<(DistrictingInstance, Option<u64>)> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

fn write_report(report: &SolveReport, out: Option<&PathBuf>) -> fairdist_core::Result<()> {
    if let Some(path) = out {
        std::fs::write(path, report.to_json())?;
    }
    Ok(())
}

fn summarize(report: &SolveReport) {
    println!(
        "max_mov {} -> {}, total_mov {} -> {}, moves {}",
        report.max_mov_before,
        report.max_mov,
        report.total_mov_before,
        report.total_mov,
        report.moves.len()
    );
}

fn generate(args: GenerateArgs) -> fairdist_core::Result<ExitCode> {
    let config = LineModelConfig {
        n_voters: args.voters,
        n_candidates: args.candidates,
        n_districts: args.districts,
        homophily: args.homophily,
        edge_prob: args.edge_prob,
        size_slack: args.slack,
        semantics: args.semantics.into(),
        seed: args.seed,
    };
    let instance = fairdist_core::generate_line_model(&config)?;
    std::fs::write(&args.out, instance_to_json(&instance, None))?;
    println!(
        "wrote instance: {} voters, {} candidates, {} districts, sizes [{}, {:?}]",
        instance.n(),
        instance.m(),
        instance.k(),
        instance.s_min(),
        instance.s_max()
    );
    Ok(ExitCode::SUCCESS)
}

fn ingest(args: IngestArgs) -> fairdist_core::Result<ExitCode> {
    let (records, names) = load_aggregate_csv(&args.votes)?;
    let locations = args
        .locations
        .as_ref()
        .map(|p| load_locations_csv(p))
        .transpose()?;
    let opts = ExpandOptions {
        closest_q: args.closest_q,
        sample: args.sample_rate.map(|rate| SampleSpec {
            rate,
            seed: args.seed,
        }),
        s_min: args.smin,
        s_max: args.smax,
        semantics: args.semantics.into(),
    };
    let instance =
        fairdist_core::expand_to_instance(&records, &names, locations.as_deref(), &opts)?;
    std::fs::write(&args.out, instance_to_json(&instance, None))?;
    println!(
        "wrote instance: {} voters over {} districts ({} alternatives)",
        instance.n(),
        instance.k(),
        instance.m()
    );
    Ok(ExitCode::SUCCESS)
}

fn mov(args: MovArgs) -> fairdist_core::Result<ExitCode> {
    let tallies = args
        .tallies
        .split(',')
        .map(|part| {
            part.trim().parse::<u64>().map_err(|_| {
                fairdist_core::Error::MalformedInput(format!("bad tally {part:?}"))
            })
        })
        .collect::<fairdist_core::Result<Vec<u64>>>()?;
    let profile = VoteProfile::from_tallies(tallies);
    let margin = margin_of_victory(&profile, args.semantics.into())?;
    let out = serde_json::json!({
        "tallies": profile.tallies(),
        "winners": winners(&profile),
        "mov": margin,
    });
    println!("{out}");
    Ok(ExitCode::SUCCESS)
}

/// Builds the report for an exact solve: the witness when one exists, the
/// untouched initial assignment otherwise.
fn exact_report(
    instance: &DistrictingInstance,
    witness: Option<Assignment>,
    verdict: &str,
    solver: SolverInfo,
) -> SolveReport {
    let final_assignment = witness.unwrap_or_else(|| instance.initial().clone());
    let moves = fairdist_core::report::diff_as_moves(instance.initial(), &final_assignment);
    SolveReport::build(instance, &final_assignment, moves, solver).with_verdict(verdict)
}

/// The exact solvers do not handle connectivity; at the CLI level a voter
/// graph is dropped with a note and the relaxation is solved.
fn strip_graph_with_note(instance: DistrictingInstance, solver: &str) -> DistrictingInstance {
    if instance.graph().is_some() {
        eprintln!("note: {solver} ignores the voter graph; solving without connectivity");
        instance.without_graph()
    } else {
        instance
    }
}

fn solve_dp(args: SolveArgs) -> fairdist_core::Result<ExitCode> {
    let (instance, recorded_target) = read_instance(&args.input)?;
    let instance = strip_graph_with_note(instance, "solve-dp");
    let budget = args
        .budget
        .map(|max_table_cells| DpBudget { max_table_cells })
        .unwrap_or_default();
    let target = args.target.or(recorded_target);
    let (optimum, witness) = solve_fair_partitioning(&instance, budget)?;
    let mut info = SolverInfo::new("exact-partitioning")
        .param("budget", budget.max_table_cells)
        .param("optimum", serde_json::to_value(optimum)?);
    if let Some(t) = target {
        info = info.param("target", t);
    }
    let (verdict, ok) = match (target, optimum) {
        (Some(t), opt) => {
            let feasible = opt <= Margin::Finite(t);
            (if feasible { "feasible" } else { "infeasible" }, feasible)
        }
        (None, Margin::Infinite) => ("infeasible", false),
        (None, _) => ("optimal", true),
    };
    let report = exact_report(&instance, witness, verdict, info);
    write_report(&report, args.out.as_ref())?;
    println!("optimum {optimum}, verdict {verdict}");
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn solve_flow(args: SolveArgs) -> fairdist_core::Result<ExitCode> {
    let (instance, recorded_target) = read_instance(&args.input)?;
    let instance = strip_graph_with_note(instance, "solve-flow");
    let budget = args
        .budget
        .map(|max_guesses| GuessBudget { max_guesses })
        .unwrap_or_default();
    let target = args.target.or(recorded_target);
    match target {
        Some(t) => {
            let (feasible, witness) = decide_fair_districting(&instance, t, budget)?;
            let verdict = if feasible { "feasible" } else { "infeasible" };
            let info = SolverInfo::new("exact-districting")
                .param("budget", budget.max_guesses)
                .param("target", t);
            let report = exact_report(&instance, witness, verdict, info);
            write_report(&report, args.out.as_ref())?;
            println!("target {t}, verdict {verdict}");
            Ok(if feasible {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        None => {
            let (optimum, witness) = minimize_fair_districting(&instance, budget)?;
            let verdict = if optimum.is_finite() {
                "optimal"
            } else {
                "infeasible"
            };
            let info = SolverInfo::new("exact-districting")
                .param("budget", budget.max_guesses)
                .param("optimum", serde_json::to_value(optimum)?);
            let report = exact_report(&instance, witness, verdict, info);
            write_report(&report, args.out.as_ref())?;
            println!("optimum {optimum}, verdict {verdict}");
            Ok(if optimum.is_finite() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn greedy(args: GreedyArgs) -> fairdist_core::Result<ExitCode> {
    let (instance, _) = read_instance(&args.input)?;
    let config = GreedyConfig {
        variant: args.variant.into(),
        max_iterations: args.max_iters,
        pivot_fallback: args.pivot_fallback,
    };
    let report = greedy_solve(&instance, config)?;
    write_report(&report, args.out.as_ref())?;
    summarize(&report);
    Ok(ExitCode::SUCCESS)
}

fn reduce_sat(args: ReduceArgs) -> fairdist_core::Result<ExitCode> {
    let formula = SatFormula::from_dimacs(&std::fs::read_to_string(&args.input)?)?;
    let gadget = reduce_sat_to_fair_districting(&formula)?;
    std::fs::write(
        &args.out,
        instance_to_json(&gadget.instance, Some(gadget.target)),
    )?;
    println!(
        "wrote gadget: {} voters, {} districts, decision target {}",
        gadget.instance.n(),
        gadget.instance.k(),
        gadget.target
    );
    Ok(ExitCode::SUCCESS)
}

fn reduce_2dcp(args: ReduceArgs) -> fairdist_core::Result<ExitCode> {
    let input: TwoDcpInstance = serde_json::from_str(&std::fs::read_to_string(&args.input)?)?;
    let gadget = reduce_2dcp_to_fair_connected_districting(&input)?;
    std::fs::write(
        &args.out,
        instance_to_json(&gadget.instance, Some(gadget.target)),
    )?;
    println!(
        "wrote gadget: {} voters, 2 districts, decision target {}",
        gadget.instance.n(),
        gadget.target
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_assignment(text: &str, n: usize) -> fairdist_core::Result<Assignment> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let array = match value {
        serde_json::Value::Array(a) => a,
        serde_json::Value::Object(mut o) => match o.remove("assignment") {
            Some(serde_json::Value::Array(a)) => a,
            _ => {
                return Err(fairdist_core::Error::MalformedInput(
                    "assignment file needs an `assignment` array".into(),
                ))
            }
        },
        _ => {
            return Err(fairdist_core::Error::MalformedInput(
                "assignment file must be an array or a report object".into(),
            ))
        }
    };
    let district_of: Vec<usize> = array
        .into_iter()
        .map(|v| {
            v.as_u64().map(|d| d as usize).ok_or_else(|| {
                fairdist_core::Error::MalformedInput("assignment entries must be integers".into())
            })
        })
        .collect::<fairdist_core::Result<_>>()?;
    if district_of.len() != n {
        return Err(fairdist_core::Error::MalformedInput(format!(
            "assignment covers {} voters, instance has {n}",
            district_of.len()
        )));
    }
    Ok(Assignment::new(district_of))
}

fn evaluate(args: EvaluateArgs) -> fairdist_core::Result<ExitCode> {
    let (instance, recorded_target) = read_instance(&args.input)?;
    let assignment = parse_assignment(&std::fs::read_to_string(&args.assignment)?, instance.n())?;
    let target = args.target.or(recorded_target);
    let violations = validate(&instance, &assignment, target);
    let moves = fairdist_core::report::diff_as_moves(instance.initial(), &assignment);
    let mut info = SolverInfo::new("evaluate");
    if let Some(t) = target {
        info = info.param("target", t);
    }
    let verdict = if violations.is_empty() { "valid" } else { "invalid" };
    let report = SolveReport::build(&instance, &assignment, moves, info).with_verdict(verdict);
    write_report(&report, args.out.as_ref())?;
    println!("district  winners  tallies  mov");
    for (d, summary) in report.districts.iter().enumerate() {
        println!(
            "{d:>8}  {:?}  {:?}  {}",
            summary.winners, summary.tallies, summary.mov
        );
    }
    println!("max_mov {}, total_mov {}", report.max_mov, report.total_mov);
    for violation in &violations {
        println!("violation: {violation}");
    }
    Ok(if violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
