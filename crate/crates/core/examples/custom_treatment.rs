//! A treatment defined in a config table, simulated and analysed end to end.

use popmaxent::analysis::{analyze_record, AnalysisOptions};
use popmaxent::game_model::mixed_nash;
use popmaxent::session_io::{parse_treatment_config, SessionIdentity};
use popmaxent::simulator::{run_session, PolicySpec};

const TABLE: &str = "\
# id groups rounds  a11 b11  a12 b12  a21 b21  a22 b22
40 1 600   3 1   0 2   1 3   2 0
";

fn main() {
    let treatments = parse_treatment_config(TABLE).unwrap();
    let t = &treatments[0];
    let eq = mixed_nash(&t.payoffs).unwrap();
    println!("equilibrium ({:.4}, {:.4})", eq.p_star, eq.q_star);
    let rec = run_session(t, &PolicySpec::NASH, t.rounds_per_group, 5).unwrap();
    let identity = SessionIdentity {
        treatment_id: t.id,
        group_id: 1,
        source: "inline".into(),
    };
    let report = analyze_record(&rec, identity, &AnalysisOptions::default()).unwrap();
    print!("{}", report.to_json());
}
