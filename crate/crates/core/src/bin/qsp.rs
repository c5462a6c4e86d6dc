use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qsp_core::config::ExperimentConfig;
use qsp_core::experiment::{self, Command, EXIT_ASSERTION, EXIT_CONFIG};
use qsp_core::minorization::{check_corollary_conditions, check_lemma_conditions, lemma_table, LambdaSequence};
use qsp_core::QspError;

#[derive(Parser)]
#[command(name = "qsp", about = "Quadratic stochastic process experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate and validate the one-step kernels and the family.
    Validate(RunArgs),
    /// Build the family and write its trajectory.
    Simulate(RunArgs),
    /// Run the configured diagnostics and write defects.csv.
    Diagnose(RunArgs),
    /// Detect minorization and check the oscillation and recursion bounds.
    Minorize(RunArgs),
    /// Print the lemma table for a λ sequence.
    Lemma(LemmaArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory, overriding the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Constant,
    Harmonic,
    InverseSqrt,
    Custom,
}

#[derive(clap::Args)]
struct LemmaArgs {
    #[arg(long, value_enum, default_value = "constant")]
    family: Family,
    /// Scale `c` of the family.
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Comma-separated λ values for `--family custom`.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    a0: f64,
    #[arg(long, default_value_t = 20)]
    horizon: usize,
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn report_error(e: &QspError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        QspError::Config(_) | QspError::InvalidArgument(_) => exit(EXIT_CONFIG),
        _ => exit(EXIT_ASSERTION),
    }
}

fn run(args: RunArgs, command: Command) -> ExitCode {
    let mut cfg = match ExperimentConfig::from_path(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => return report_error(&e),
    };
    if args.out.is_some() {
        cfg.output = args.out;
    }
    let outcome = match experiment::run(&cfg, command) {
        Ok(o) => o,
        Err(e) => return report_error(&e),
    };
    for c in outcome.failures() {
        eprintln!("FAILED {}: {:e} (limit {:e})", c.name, c.value, c.limit);
    }
    if cfg.output.is_none() {
        match experiment::summary_json(&outcome.summary) {
            Ok(s) => print!("{s}"),
            Err(e) => return report_error(&e),
        }
    }
    if let Some(note) = &outcome.summary.certificate_note {
        eprintln!("{note}");
    }
    exit(outcome.exit_code)
}

fn lemma(args: LemmaArgs) -> ExitCode {
    let seq = match args.family {
        Family::Constant => LambdaSequence::constant(args.c, args.horizon),
        Family::Harmonic => LambdaSequence::harmonic(args.c, args.horizon),
        Family::InverseSqrt => LambdaSequence::inverse_sqrt(args.c, args.horizon),
        Family::Custom => LambdaSequence::new(args.values),
    };
    let seq = match seq {
        Ok(s) => s,
        Err(e) => return report_error(&e),
    };
    let rows = match lemma_table(&seq, args.a0) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    print!("{}", experiment::lemma_csv(&rows));
    let lemma = check_lemma_conditions(&seq);
    let cor = check_corollary_conditions(&seq);
    let verdict = |name: &str, v: &qsp_core::minorization::ConditionVerdict| {
        let kind = if v.heuristic { "heuristic" } else { "exact" };
        println!("# {name}: {} ({kind}, value {:e})", if v.holds { "holds" } else { "fails" }, v.value);
    };
    verdict("divergence", &lemma.divergence);
    verdict("decay", &lemma.decay);
    verdict("n_product", &cor.n_product);
    verdict("linear_growth", &cor.linear_growth);
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Cmd::Validate(a) => run(a, Command::Validate),
        Cmd::Simulate(a) => run(a, Command::Simulate),
        Cmd::Diagnose(a) => run(a, Command::Diagnose),
        Cmd::Minorize(a) => run(a, Command::Minorize),
        Cmd::Lemma(a) => lemma(a),
    }
}
