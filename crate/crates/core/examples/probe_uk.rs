use fairdist_core::{
    expand_to_instance, greedy_solve, parse_aggregate_csv, parse_locations_csv, ExpandOptions,
    GreedyConfig, GreedyVariant, MovSemantics,
};

fn main() {
    // Five pairs of neighboring constituencies with complementary leaders.
    // Shares echo the source region: clear majorities, distinct runners-up.
    let votes = "\
district,alternative,count
Dunsmere,labour,260
Dunsmere,conservative,150
Dunsmere,snp,60
Dunsmere,libdem,30
Berwick Edge,conservative,255
Berwick Edge,labour,155
Berwick Edge,snp,55
Berwick Edge,libdem,35
East Lothwick,labour,215
East Lothwick,snp,165
East Lothwick,conservative,85
East Lothwick,libdem,35
Midlothwick,snp,225
Midlothwick,labour,160
Midlothwick,conservative,80
Midlothwick,libdem,35
Edinmouth South,snp,240
Edinmouth South,conservative,140
Edinmouth South,labour,90
Edinmouth South,libdem,30
Edinmouth East,conservative,230
Edinmouth East,snp,150
Edinmouth East,labour,85
Edinmouth East,libdem,35
Edinmouth North,labour,235
Edinmouth North,libdem,145
Edinmouth North,conservative,75
Edinmouth North,snp,45
Edinmouth West,libdem,240
Edinmouth West,labour,150
Edinmouth West,conservative,70
Edinmouth West,snp,40
Livingcross,snp,250
Livingcross,labour,145
Livingcross,conservative,70
Livingcross,libdem,35
Pentland Vale,labour,245
Pentland Vale,snp,155
Pentland Vale,conservative,65
Pentland Vale,libdem,35
";
    let locations = "\
district,x,y
Dunsmere,0.0,0.0
Berwick Edge,1.0,0.0
East Lothwick,10.0,0.0
Midlothwick,11.0,0.0
Edinmouth South,20.0,0.0
Edinmouth East,21.0,0.0
Edinmouth North,30.0,0.0
Edinmouth West,31.0,0.0
Livingcross,40.0,0.0
Pentland Vale,41.0,0.0
";
    let (records, names) = parse_aggregate_csv(votes.as_bytes()).unwrap();
    let locs = parse_locations_csv(locations.as_bytes()).unwrap();
    let opts = ExpandOptions {
        closest_q: Some(2),
        sample: None,
        s_min: 400,
        s_max: Some(600),
        semantics: MovSemantics::ScoreGap,
    };
    let inst = expand_to_instance(&records, &names, Some(&locs), &opts).unwrap();
    println!("n = {}, k = {}, m = {}", inst.n(), inst.k(), inst.m());
    for variant in [GreedyVariant::Districting, GreedyVariant::Partitioning] {
        let report = greedy_solve(&inst, GreedyConfig::new(variant)).unwrap();
        println!(
            "{:?}: max {} -> {}, total {} -> {}, moves {}",
            variant,
            report.max_mov_before,
            report.max_mov,
            report.total_mov_before,
            report.total_mov,
            report.moves.len()
        );
    }
}
