use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ndsd::experiments::{csv_table, run_experiment, ExperimentReport, Params, EXPERIMENTS};

/// Reproducible non-destructive discrimination experiments.
///
/// Each experiment recomputes a set of claims and reports expected vs
/// computed values. The exit status is 0 iff every claim passes.
#[derive(Parser)]
#[command(name = "ndsd", version)]
struct Cli {
    /// Experiment to run, or `all`.
    #[arg(long, value_parser = experiment_name)]
    experiment: String,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Random separable instruments drawn per ensemble and class.
    #[arg(long, default_value_t = Params::default().samples)]
    samples: usize,

    /// Optimizer restarts per ensemble.
    #[arg(long, default_value_t = Params::default().restarts)]
    restarts: usize,

    /// JSON report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Optional CSV table of claim rows.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Longest word enumerated by the equivalence test.
    #[arg(long, default_value_t = Params::default().max_word_len)]
    max_word_len: usize,
}

fn experiment_name(s: &str) -> Result<String, String> {
    if s == "all" || EXPERIMENTS.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("expected one of: all, {}", EXPERIMENTS.join(", ")))
    }
}

fn run(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let params = Params { samples: cli.samples, restarts: cli.restarts, max_word_len: cli.max_word_len, ..Params::default() };
    let names: Vec<&str> = if cli.experiment == "all" { EXPERIMENTS.to_vec() } else { vec![cli.experiment.as_str()] };
    let reports = names
        .iter()
        .map(|n| run_experiment(n, &params, cli.seed))
        .collect::<Result<Vec<ExperimentReport>, _>>()?;
    for r in &reports {
        eprintln!(
            "{:<22} {:>3}/{:<3} claims passed  {} ms",
            r.experiment,
            r.results.iter().filter(|x| x.pass).count(),
            r.results.len(),
            r.runtime_ms
        );
        for f in r.failures() {
            eprintln!("  FAIL {}: expected {}, computed {}", f.claim, f.expected, f.computed);
        }
    }
    let json = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    match &cli.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    if let Some(path) = &cli.csv {
        std::fs::write(path, csv_table(&reports)?)?;
    }
    Ok(reports.iter().all(ExperimentReport::passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
