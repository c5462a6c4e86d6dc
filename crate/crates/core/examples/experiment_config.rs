//! Run a JSON experiment config through the same pipeline as the `qsp` binary.
//!
//!     cargo run --example experiment_config -- crates/core/examples/configs/minorized.json

use std::path::PathBuf;

use qsp_core::config::ExperimentConfig;
use qsp_core::experiment::{defects_csv, run, Command};

fn main() -> qsp_core::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/minorized.json")));
    let mut cfg = ExperimentConfig::from_path(&path)?;
    cfg.output = None;

    let out = run(&cfg, Command::Diagnose)?;
    print!("{}", defects_csv(&out.defects));
    for c in &out.summary.checks {
        println!("{:<40} {:>12.3e} <= {:<8.1e} {}", c.name, c.value, c.limit, if c.passed { "ok" } else { "FAILED" });
    }
    if let Some(f) = &out.summary.finals {
        println!("finals at ({}, {}): markov {:.3e}, qsp {:.3e}", f.m, f.n, f.markov, f.qsp);
    }
    std::process::exit(out.exit_code);
}
