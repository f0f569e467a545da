use clap::{Args, Parser, Subcommand};
use lcsfluct::config::{Command, ConfigFile, Format, Overrides};
use lcsfluct::error::CliError;
use lcsfluct::report::{emit_report, Summary};
use lcsfluct::runner::run_experiment;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

/// Monte-Carlo experiments on longest-common-subsequence fluctuations.
#[derive(Parser, Debug)]
#[command(name = "lcsfluct", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Mean-score curve over length asymmetry, with a limit-constant fit.
    GammaCurve(RunArgs),
    /// Limit-constant extrapolation over a grid of alphabet sizes.
    GammaStar(RunArgs),
    /// Score variance versus total length on a log-log grid.
    VarianceScan(RunArgs),
    /// Mean score gain from reverting one planted run, over block sizes.
    BiasScan(RunArgs),
    /// Frequencies of the block-count, typicality, and gain events.
    Events(RunArgs),
    /// Mean score along the run-by-run interpolation chain.
    CouplingPath(RunArgs),
    /// Deterministic internal consistency battery.
    Selftest(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config file with experiment parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicate-count override.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory override (beats config file and LCSFLUCT_OUT).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated artifact formats: csv,json,svg.
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits 0 for --help/--version; everything else is a
            // usage problem and must map to exit code 1.
            let clean = err.exit_code() == 0;
            let _ = err.print();
            return ExitCode::from(if clean { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (command, args) = match cli.command {
        Cmd::GammaCurve(a) => (Command::GammaCurve, a),
        Cmd::GammaStar(a) => (Command::GammaStar, a),
        Cmd::VarianceScan(a) => (Command::VarianceScan, a),
        Cmd::BiasScan(a) => (Command::BiasScan, a),
        Cmd::Events(a) => (Command::Events, a),
        Cmd::CouplingPath(a) => (Command::CouplingPath, a),
        Cmd::Selftest(a) => (Command::Selftest, a),
    };

    let file = match &args.config {
        Some(path) => Some(ConfigFile::load(path)?),
        None => None,
    };
    let emit = args
        .emit
        .map(|names| {
            names
                .iter()
                .map(|name| Format::from_str(name))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()
        .map_err(lcsfluct::error::usage)?;
    let overrides = Overrides {
        seed: args.seed,
        reps: args.reps,
        out: args.out,
        threads: args.threads,
        emit,
    };
    let cfg = lcsfluct::config::resolve(command, file.as_ref(), &overrides)?;

    let report = run_experiment(&cfg)?;
    let paths = lcsfluct::config::artifact_paths(&cfg);
    let written = emit_report(&report, &cfg.emit, &paths)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    print_summary(&report.summary);

    if let Summary::Selftest { failed, .. } = report.summary {
        if failed > 0 {
            return Err(CliError::SelftestFailed(failed));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(summary: &Summary) {
    match summary {
        Summary::GammaCurve {
            gamma_star_hat,
            gamma_star_stderr,
            gamma_e,
            solved_q,
        } => {
            println!("limit constant ~ {gamma_star_hat:.6} (se {gamma_star_stderr:.2e})");
            if let (Some(target), Some(q)) = (gamma_e, solved_q) {
                println!("mean rate {target:.6} reached near |q| = {q:.6}");
            }
        }
        Summary::GammaStar { fits } => {
            for f in fits {
                println!(
                    "k = {}: limit constant ~ {:.6} (se {:.2e}), finite-size coefficient {:.4}",
                    f.k, f.gamma_star_hat, f.gamma_star_stderr, f.rate_coeff
                );
            }
        }
        Summary::VarianceScan {
            slope,
            intercept,
            slope_stderr,
        } => println!(
            "log-log scaling: slope {slope:.4} (se {slope_stderr:.4}), intercept {intercept:.4}"
        ),
        Summary::BiasScan { rates } => {
            for (d, rate) in rates {
                println!("d = {d}: revert gain rate {rate:.6}");
            }
        }
        Summary::Events { envelope } => {
            println!("block-count lower-tail envelope exp(-m p^2 / 2) = {envelope:.6e}")
        }
        Summary::CouplingPath {
            drop_mean,
            drop_stderr,
            variance_floor,
            ..
        } => println!(
            "chain drop {drop_mean:.4} (se {drop_stderr:.4}), variance floor {variance_floor:.4}"
        ),
        Summary::Selftest { passed, failed } => {
            println!("selftest: {passed} passed, {failed} failed")
        }
    }
}
