//! Runs a named experiment from the library and prints its claim table.
//!
//! `cargo run --release --example run_experiment -- bell3-cost`

use ndsd::experiments::{run_experiment, Params, EXPERIMENTS};

fn main() -> ndsd::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "mes6-cost".into());
    if !EXPERIMENTS.contains(&name.as_str()) {
        eprintln!("unknown experiment {name}; choose one of {}", EXPERIMENTS.join(", "));
        std::process::exit(2);
    }
    let params = Params { samples: 1000, restarts: 20, ..Params::default() };
    let report = run_experiment(&name, &params, 7)?;
    for row in &report.results {
        println!("{} {:<40} expected {:<12} computed {}", if row.pass { "ok  " } else { "FAIL" }, row.claim, row.expected, row.computed);
    }
    println!("{} in {} ms", if report.passed() { "all claims hold" } else { "some claims fail" }, report.runtime_ms);
    Ok(())
}
