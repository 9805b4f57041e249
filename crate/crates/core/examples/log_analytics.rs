//! Generate a noisy synthetic log, write it out, load it back and print the
//! task and step speed tables.
//!
//!     cargo run --example log_analytics [SESSIONS]

use ixcomplex::logs::{load_log, step_table, task_table, GroupBy};
use ixcomplex::movie_booking as mb;
use ixcomplex::synth::{generate_log, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sessions = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    let cfg = SynthConfig {
        concept: mb::v2(),
        binding: mb::v2_complexity_binding(),
        sessions,
        speed_mean: 1.05,
        speed_sd: 0.2,
        seed: 42,
    };
    let json = generate_log(&cfg)?.to_json();
    let path = std::env::temp_dir().join("ixcomplex-example-log.json");
    std::fs::write(&path, &json)?;
    println!("wrote {} sessions to {}", sessions, path.display());

    let log = load_log(&std::fs::read(&path)?)?;
    let tasks = task_table(&log, GroupBy::Concept)?;
    print!("\n{}", tasks.render_text());
    print!("\n{}", step_table(&log)?.render_csv());
    for w in tasks.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
