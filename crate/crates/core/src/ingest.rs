//! File-based ingestion: aggregate vote CSVs, site locations, and the
//! native instance JSON interchange format.
//!
//! Aggregate rows are expanded into one unit voter per counted vote, with
//! optional Bernoulli down-sampling and distance-based mobility ("each
//! voter may move to the `q` districts closest to its home district").
//! Synthesized preferences put the voter's own choice first and the
//! remaining alternatives in global popularity order; plurality only ever
//! reads the top entry.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::election::{AltId, DistrictId, MovSemantics, Voter};
use crate::error::{Error, Result};
use crate::model::{Assignment, DistrictingInstance, InstanceParams, VoterGraph};

/// One aggregate row: votes for one alternative in one district.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateRecord {
    pub district: DistrictId,
    pub alternative: AltId,
    pub count: u64,
}

/// Stable id assignment in first-appearance order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameTables {
    pub districts: Vec<String>,
    pub alternatives: Vec<String>,
}

impl NameTables {
    fn district_id(&mut self, name: &str) -> DistrictId {
        match self.districts.iter().position(|d| d == name) {
            Some(i) => i,
            None => {
                self.districts.push(name.to_string());
                self.districts.len() - 1
            }
        }
    }

    fn alternative_id(&mut self, name: &str) -> AltId {
        match self.alternatives.iter().position(|a| a == name) {
            Some(i) => i,
            None => {
                self.alternatives.push(name.to_string());
                self.alternatives.len() - 1
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct AggregateRow {
    district: String,
    alternative: String,
    count: i64,
}

/// Parses `district,alternative,count` rows from a reader.
pub fn parse_aggregate_csv<R: Read>(reader: R) -> Result<(Vec<AggregateRecord>, NameTables)> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut names = NameTables::default();
    let mut records = Vec::new();
    let mut seen: HashMap<(DistrictId, AltId), usize> = HashMap::new();
    for row in csv_reader.deserialize::<AggregateRow>() {
        let row = row.map_err(csv_error)?;
        // csv positions count the header, so records start at line 2.
        let line = records.len() + 2;
        if row.count < 0 {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "negative count {} for ({}, {})",
                    row.count, row.district, row.alternative
                ),
            });
        }
        let district = names.district_id(row.district.trim());
        let alternative = names.alternative_id(row.alternative.trim());
        if seen.insert((district, alternative), line).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "duplicate (district, alternative) pair ({}, {})",
                    row.district, row.alternative
                ),
            });
        }
        records.push(AggregateRecord {
            district,
            alternative,
            count: row.count as u64,
        });
    }
    Ok((records, names))
}

/// Loads an aggregate CSV file.
pub fn load_aggregate_csv(path: &Path) -> Result<(Vec<AggregateRecord>, NameTables)> {
    parse_aggregate_csv(std::fs::File::open(path)?)
}

/// A district's planar location (consistent but arbitrary units).
#[derive(Clone, Debug, PartialEq)]
pub struct SiteLocation {
    pub district: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Deserialize)]
struct LocationRow {
    district: String,
    x: f64,
    y: f64,
}

pub fn parse_locations_csv<R: Read>(reader: R) -> Result<Vec<SiteLocation>> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut out: Vec<SiteLocation> = Vec::new();
    for row in csv_reader.deserialize::<LocationRow>() {
        let row = row.map_err(csv_error)?;
        let line = out.len() + 2;
        if out.iter().any(|l| l.district == row.district) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate location for district {}", row.district),
            });
        }
        out.push(SiteLocation {
            district: row.district.trim().to_string(),
            x: row.x,
            y: row.y,
        });
    }
    Ok(out)
}

pub fn load_locations_csv(path: &Path) -> Result<Vec<SiteLocation>> {
    parse_locations_csv(std::fs::File::open(path)?)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    Error::Parse {
        line,
        msg: err.to_string(),
    }
}

/// Per-voter Bernoulli down-sampling.
#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    /// Keep probability in `(0, 1]`.
    pub rate: f64,
    pub seed: u64,
}

/// Options for [`expand_to_instance`].
#[derive(Clone, Debug)]
pub struct ExpandOptions {
    /// Restrict each voter to the `q` districts closest to its home
    /// district (home always included). `None` means full mobility.
    /// Values above `k` are clamped to `k` with a warning.
    pub closest_q: Option<usize>,
    pub sample: Option<SampleSpec>,
    pub s_min: usize,
    pub s_max: Option<usize>,
    pub semantics: MovSemantics,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            closest_q: None,
            sample: None,
            s_min: 0,
            s_max: None,
            semantics: MovSemantics::SetChange,
        }
    }
}

/// Expands aggregate records into a unit-voter instance.
///
/// Voters are emitted in record order; with sampling, each counted vote is
/// kept independently with the given probability under the seed. Mobility
/// uses Euclidean distance between district centers, ties broken by
/// district name.
pub fn expand_to_instance(
    records: &[AggregateRecord],
    names: &NameTables,
    locations: Option<&[SiteLocation]>,
    opts: &ExpandOptions,
) -> Result<DistrictingInstance> {
    let k = names.districts.len();
    let m = names.alternatives.len();
    if k == 0 || records.is_empty() {
        return Err(Error::MalformedInput("no aggregate records".into()));
    }

    let mobility_by_district: Vec<Vec<DistrictId>> = match opts.closest_q {
        None => {
            let all: Vec<DistrictId> = (0..k).collect();
            vec![all; k]
        }
        Some(q) => {
            if q == 0 {
                return Err(Error::MalformedInput(
                    "closest_q must be positive".into(),
                ));
            }
            let q = if q > k {
                log::warn!("closest_q {q} exceeds the {k} districts; clamping");
                k
            } else {
                q
            };
            let locations = locations.ok_or_else(|| {
                Error::MalformedInput("closest_q requires district locations".into())
            })?;
            let mut coords = vec![None; k];
            for loc in locations {
                if let Some(d) = names.districts.iter().position(|n| n == &loc.district) {
                    coords[d] = Some((loc.x, loc.y));
                }
            }
            let mut per_district = Vec::with_capacity(k);
            for home in 0..k {
                let (hx, hy) = coords[home].ok_or_else(|| {
                    Error::MalformedInput(format!(
                        "district {} has no location",
                        names.districts[home]
                    ))
                })?;
                let mut ranked: Vec<DistrictId> = (0..k).collect();
                ranked.sort_by(|&a, &b| {
                    let da = coords[a].map(|(x, y)| (x - hx).powi(2) + (y - hy).powi(2));
                    let db = coords[b].map(|(x, y)| (x - hx).powi(2) + (y - hy).powi(2));
                    match (da, db) {
                        (Some(da), Some(db)) => da
                            .partial_cmp(&db)
                            .unwrap()
                            .then_with(|| names.districts[a].cmp(&names.districts[b])),
                        (Some(_), None) => std::cmp::Ordering::Less,
                        (None, Some(_)) => std::cmp::Ordering::Greater,
                        (None, None) => names.districts[a].cmp(&names.districts[b]),
                    }
                });
                let mut opts_list: Vec<DistrictId> = ranked.into_iter().take(q).collect();
                if !opts_list.contains(&home) {
                    opts_list.pop();
                    opts_list.push(home);
                }
                per_district.push(opts_list);
            }
            per_district
        }
    };

    // Remaining alternatives ranked by global popularity (count desc, id
    // asc) complete each synthesized preference order.
    let mut global = vec![0u64; m];
    for r in records {
        global[r.alternative] += r.count;
    }
    let mut popularity: Vec<AltId> = (0..m).collect();
    popularity.sort_by(|&a, &b| global[b].cmp(&global[a]).then(a.cmp(&b)));

    let mut sampler = opts
        .sample
        .map(|s| (ChaCha8Rng::seed_from_u64(s.seed), s.rate));
    if let Some((_, rate)) = sampler {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::MalformedInput(format!(
                "sample rate must lie in (0, 1], got {rate}"
            )));
        }
    }

    let mut voters = Vec::new();
    let mut initial = Vec::new();
    let mut mobility = Vec::new();
    for r in records {
        for _ in 0..r.count {
            if let Some((rng, rate)) = sampler.as_mut() {
                if rng.gen::<f64>() >= *rate {
                    continue;
                }
            }
            let id = voters.len();
            let mut preference = Vec::with_capacity(m);
            preference.push(r.alternative);
            preference.extend(popularity.iter().copied().filter(|&a| a != r.alternative));
            voters.push(Voter::new(id, preference));
            initial.push(r.district);
            mobility.push(mobility_by_district[r.district].clone());
        }
    }

    DistrictingInstance::new(InstanceParams {
        m,
        voters,
        k,
        initial: Assignment::new(initial),
        mobility,
        s_min: opts.s_min,
        s_max: opts.s_max,
        graph: None,
        semantics: opts.semantics,
    })
}

#[derive(Serialize, Deserialize)]
struct VoterFile {
    id: usize,
    top_choice: AltId,
    district: DistrictId,
    mobility: Vec<DistrictId>,
}

/// Native instance interchange format.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    k: usize,
    semantics: MovSemantics,
    s_min: usize,
    s_max: Option<usize>,
    voters: Vec<VoterFile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    edges: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    target: Option<u64>,
}

/// Serializes an instance (plus an optional decision target) to the native
/// JSON format. Only top choices are stored; synthesized tail preferences
/// are not round-tripped because plurality never reads them.
pub fn instance_to_json(instance: &DistrictingInstance, target: Option<u64>) -> String {
    let file = InstanceFile {
        m: instance.m(),
        k: instance.k(),
        semantics: instance.semantics(),
        s_min: instance.s_min(),
        s_max: instance.s_max(),
        voters: instance
            .voters()
            .iter()
            .map(|v| VoterFile {
                id: v.id,
                top_choice: v.top_choice(),
                district: instance.initial().district_of(v.id),
                mobility: instance.mobility(v.id).to_vec(),
            })
            .collect(),
        edges: instance.graph().map(|g| g.edges().to_vec()),
        target,
    };
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

/// Parses the native JSON format back into an instance and the optional
/// target it records.
pub fn instance_from_json(text: &str) -> Result<(DistrictingInstance, Option<u64>)> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut voters = Vec::with_capacity(file.voters.len());
    let mut initial = Vec::with_capacity(file.voters.len());
    let mut mobility = Vec::with_capacity(file.voters.len());
    for (i, v) in file.voters.iter().enumerate() {
        if v.id != i {
            return Err(Error::MalformedInput(format!(
                "voter ids must be dense and ascending: position {i} holds id {}",
                v.id
            )));
        }
        voters.push(Voter::top(v.id, v.top_choice));
        initial.push(v.district);
        mobility.push(v.mobility.clone());
    }
    let graph = match file.edges {
        Some(edges) => Some(VoterGraph::new(file.voters.len(), &edges)?),
        None => None,
    };
    let instance = DistrictingInstance::new(InstanceParams {
        m: file.m,
        voters,
        k: file.k,
        initial: Assignment::new(initial),
        mobility,
        s_min: file.s_min,
        s_max: file.s_max,
        graph,
        semantics: file.semantics,
    })?;
    Ok((instance, file.target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::district_profiles;

    fn expand(
        csv: &str,
        locations: Option<&str>,
        opts: &ExpandOptions,
    ) -> Result<DistrictingInstance> {
        let (records, names) = parse_aggregate_csv(csv.as_bytes())?;
        let locations = locations
            .map(|text| parse_locations_csv(text.as_bytes()))
            .transpose()?;
        expand_to_instance(&records, &names, locations.as_deref(), opts)
    }

    #[test]
    fn two_by_two_file_parses() {
        let csv = "district,alternative,count\nD1,p,3\nD1,q,2\nD2,p,1\nD2,q,4\n";
        let (records, names) = parse_aggregate_csv(csv.as_bytes()).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(names.districts, vec!["D1", "D2"]);
        assert_eq!(names.alternatives, vec!["p", "q"]);
    }

    #[test]
    fn negative_count_names_the_line() {
        let csv = "district,alternative,count\nD1,p,3\nD1,q,-2\n";
        match parse_aggregate_csv(csv.as_bytes()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_pair_rejected() {
        let csv = "district,alternative,count\nD1,p,3\nD1,p,1\n";
        assert!(matches!(
            parse_aggregate_csv(csv.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn share_style_rows_expand_proportionally() {
        // Shares of a 1000-vote district, rounded to integers.
        let csv = "district,alternative,count\nEL,lab,363\nEL,con,298\nEL,snp,307\nEL,ld,31\n";
        let inst = expand(csv, None, &ExpandOptions::default()).unwrap();
        assert_eq!(inst.n(), 999);
        let profile = &district_profiles(&inst, inst.initial())[0];
        assert_eq!(profile.tallies(), &[363, 298, 307, 31]);
    }

    #[test]
    fn closest_q_equal_to_k_is_full_mobility() {
        let csv = "district,alternative,count\nD1,p,2\nD2,q,2\n";
        let locs = "district,x,y\nD1,0,0\nD2,1,0\n";
        let inst = expand(
            csv,
            Some(locs),
            &ExpandOptions {
                closest_q: Some(2),
                ..ExpandOptions::default()
            },
        )
        .unwrap();
        assert!(inst.is_full_mobility());
    }

    #[test]
    fn collinear_sites_pick_nearest_neighbors() {
        let csv = "district,alternative,count\nA,p,1\nB,q,1\nC,p,1\n";
        let locs = "district,x,y\nA,0,0\nB,1,0\nC,5,0\n";
        let inst = expand(
            csv,
            Some(locs),
            &ExpandOptions {
                closest_q: Some(2),
                ..ExpandOptions::default()
            },
        )
        .unwrap();
        // A's voter may reach {A, B}; C's voter {B, C}.
        assert_eq!(inst.mobility(0), &[0, 1]);
        assert_eq!(inst.mobility(2), &[1, 2]);
    }

    #[test]
    fn mobility_always_contains_home() {
        let csv = "district,alternative,count\nA,p,1\nB,q,1\nC,p,1\n";
        let locs = "district,x,y\nA,0,0\nB,1,0\nC,5,0\n";
        for q in 1..=4 {
            let inst = expand(
                csv,
                Some(locs),
                &ExpandOptions {
                    closest_q: Some(q),
                    ..ExpandOptions::default()
                },
            )
            .unwrap();
            for v in 0..inst.n() {
                let home = inst.initial().district_of(v);
                assert!(inst.mobility(v).contains(&home));
                assert_eq!(inst.mobility(v).len(), q.min(inst.k()));
            }
        }
    }

    #[test]
    fn seven_category_file_yields_seven_alternatives() {
        let mut csv = String::from("district,alternative,count\n");
        let races = [
            "asian",
            "native",
            "hispanic",
            "black",
            "white",
            "hawaiian",
            "mixed",
        ];
        for (i, race) in races.iter().enumerate() {
            csv.push_str(&format!("S1,{race},{}\n", i + 1));
        }
        let inst = expand(&csv, None, &ExpandOptions::default()).unwrap();
        assert_eq!(inst.m(), 7);
        assert_eq!(inst.n(), (1..=7).sum::<usize>());
    }

    #[test]
    fn sampling_is_seeded_and_counts_match_rate_roughly() {
        let csv = "district,alternative,count\nD1,p,500\nD1,q,500\n";
        let opts = ExpandOptions {
            sample: Some(SampleSpec {
                rate: 0.5,
                seed: 11,
            }),
            ..ExpandOptions::default()
        };
        let a = expand(csv, None, &opts).unwrap();
        let b = expand(csv, None, &opts).unwrap();
        assert_eq!(a.n(), b.n());
        assert!((300..700).contains(&a.n()), "kept {} of 1000", a.n());
    }

    #[test]
    fn instance_json_round_trip_is_stable() {
        let csv = "district,alternative,count\nD1,p,3\nD1,q,2\nD2,p,1\nD2,q,4\n";
        let inst = expand(csv, None, &ExpandOptions::default()).unwrap();
        let json = instance_to_json(&inst, Some(2));
        let (parsed, target) = instance_from_json(&json).unwrap();
        assert_eq!(target, Some(2));
        assert_eq!(instance_to_json(&parsed, Some(2)), json);
    }

    #[test]
    fn preferences_rank_own_choice_first_then_popularity() {
        let csv = "district,alternative,count\nD1,p,1\nD1,q,5\nD1,r,3\n";
        let inst = expand(csv, None, &ExpandOptions::default()).unwrap();
        // Popularity order: q (5), r (3), p (1).
        assert_eq!(inst.voters()[0].preference, vec![0, 1, 2]);
        assert_eq!(inst.voters()[1].preference, vec![1, 2, 0]);
    }
}
