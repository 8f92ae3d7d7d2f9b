//! Core library for minimizing the maximum margin of victory across
//! districts.
//!
//! The toolkit models plurality elections over named district slots with
//! per-voter mobility constraints, optional district-size bounds, and an
//! optional voter graph that forces districts to stay connected. It ships
//! two exact solvers (a count-vector dynamic program for the full-mobility
//! case and a guess-plus-flow procedure for few districts), three greedy
//! local-search heuristics, synthetic and hardness-based instance
//! generators, and CSV/JSON ingestion.

pub mod election;
pub mod error;
pub mod exact_district;
pub mod exact_partition;
pub mod flow;
pub mod greedy;
pub mod ingest;
pub mod model;
pub mod report;
pub mod synth;

pub use election::{
    margin_of_victory, max_gap_for_target, plurality_scores, winners, AltId, DistrictId, Margin,
    MovSemantics, VoteProfile, Voter, VoterId,
};
pub use error::{Error, Result};
pub use exact_district::{
    build_guess_network, decide_fair_districting, minimize_fair_districting, DistrictGuess,
    GuessBudget, GuessNetwork,
};
pub use exact_partition::{decide_fair_partitioning, solve_fair_partitioning, DpBudget};
pub use flow::{feasible_circulation, max_flow_with_demands, Flow, FlowEdge, FlowNetwork};
pub use greedy::{candidate_moves, greedy_solve, GreedyConfig, GreedyVariant, Move};
pub use ingest::{
    expand_to_instance, instance_from_json, instance_to_json, load_aggregate_csv,
    load_locations_csv, parse_aggregate_csv, parse_locations_csv, AggregateRecord, ExpandOptions,
    NameTables, SampleSpec, SiteLocation,
};
pub use model::{
    district_margins, district_profiles, is_connected_district, removable_without_disconnect,
    validate, Assignment, DistrictingInstance, InstanceParams, Violation, VoterGraph,
};
pub use report::{DistrictSummary, MoveRecord, SolveReport, SolverInfo};
pub use synth::{
    generate_line_model, reduce_2dcp_to_fair_connected_districting,
    reduce_sat_to_fair_districting, LineModelConfig, SatFormula, SatGadget, TwoDcpGadget,
    TwoDcpInstance,
};
