//! A seeded ensemble, written to CSV and read back.

use popmaxent::game_model::find_treatment;
use popmaxent::game_model::treatment_catalog;
use popmaxent::session_io::{read_session_csv, session_digest, write_session_csv};
use popmaxent::simulator::{run_ensemble, PolicySpec};

fn main() {
    let catalog = treatment_catalog();
    let game = find_treatment(&catalog, 7).unwrap();
    let sessions = run_ensemble(
        game,
        &PolicySpec::NASH,
        game.groups,
        game.rounds_per_group,
        2024,
    )
    .unwrap();
    let dir = std::env::temp_dir().join("popmaxent-ensemble");
    std::fs::create_dir_all(&dir).unwrap();
    for (g, rec) in sessions.iter().enumerate() {
        let path = dir.join(format!("t07_g{:02}.csv", g + 1));
        write_session_csv(rec, &path).unwrap();
        let back = read_session_csv(&path).unwrap();
        assert_eq!(&back, rec);
        println!("{}  {}", path.display(), &session_digest(rec)[..16]);
    }
}
