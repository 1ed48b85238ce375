use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use bruhat_core::report::{emit_report, format_residual, parse_word, SuiteConfig, SuiteName, SuiteReport};
use bruhat_core::suites::run;
use bruhat_core::Error;
use clap::Parser;

/// Run the numerical verification suites for Poisson groupoids of SL(n, C).
#[derive(Debug, Parser)]
#[command(name = "bruhat", version)]
struct Args {
    /// n of SL(n, C) for the configured words.
    #[arg(long, default_value_t = 3)]
    rank: usize,

    /// Weyl word as comma-separated simple reflection indices, e.g. 1,2 (repeatable).
    #[arg(long = "word")]
    words: Vec<String>,

    /// Samples per check (per-check defaults when omitted).
    #[arg(long)]
    samples: Option<usize>,

    /// Tolerance applied to every residual check (pinned defaults when omitted).
    #[arg(long)]
    tol: Option<f64>,

    /// Seed of the per-sample random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Suite to run: kernel, gamma, cells, gdbc, twist, tstar_c, poisson (repeatable; all when omitted).
    #[arg(long = "suite")]
    suites: Vec<String>,

    /// Write the JSON report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn config(args: &Args) -> bruhat_core::Result<SuiteConfig> {
    let words = args.words.iter().map(|w| parse_word(w, args.rank)).collect::<bruhat_core::Result<Vec<_>>>()?;
    let suites = if args.suites.is_empty() {
        SuiteName::ALL.to_vec()
    } else {
        args.suites.iter().map(|s| s.parse()).collect::<bruhat_core::Result<Vec<_>>>()?
    };
    let cfg = SuiteConfig { group_rank: args.rank, words, samples: args.samples, tol: args.tol, seed: args.seed, suites };
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(reports: &[SuiteReport]) {
    for r in reports {
        println!("{} ({} ms)", r.suite, r.wall_ms);
        for c in &r.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            println!("  {status} {:<48} max {:<24} tol {:e}  [{}]", c.id, format_residual(c.max_residual.0), c.tol, c.anchor);
        }
    }
}

fn execute(args: &Args) -> anyhow::Result<bool> {
    let cfg = config(args)?;
    let reports = run(&cfg)?;
    print_summary(&reports);
    if let Some(path) = &args.report {
        emit_report(&reports, path).with_context(|| format!("writing report to {}", path.display()))?;
    }
    Ok(reports.iter().all(SuiteReport::pass))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::ConfigError(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
