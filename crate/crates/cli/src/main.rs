use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use replayguard::montecarlo::FpTrialConfig;
use replayguard_cli::{
    cmd_calc, cmd_fig19, cmd_run, fmt_sig, CalcKind, CalcParams, CliError, RunOptions, SEED_ENV,
};

#[derive(Parser)]
#[command(
    name = "replayguard",
    version,
    about = "Replay-detection experiments for TinySec-style links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation (or sweep) described by a JSON config and emit CSV.
    Run {
        config: PathBuf,
        /// CSV destination; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace destination; overrides the config's `trace`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Evaluate one of the analytic formulas.
    Calc {
        /// eq4, fp_exact, fp_approx or state_bytes
        kind: String,
        /// Bytes per stored counter.
        #[arg(long = "B")]
        b: Option<u64>,
        /// Node count.
        #[arg(long)]
        n: Option<u64>,
        /// Filter size in bits.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        k: Option<u8>,
        /// Insertions.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        neighbors: Option<u64>,
        #[arg(long)]
        window: Option<u32>,
    },
    /// Measure false-positive rate against hash count (k = 1..=8).
    Fig19 {
        out: PathBuf,
        #[arg(long, default_value_t = FpTrialConfig::default().inserted)]
        inserted: u64,
        #[arg(long, default_value_t = FpTrialConfig::default().probes)]
        probes: u64,
        #[arg(long, default_value_t = FpTrialConfig::default().seed)]
        seed: u64,
    },
}

fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            CliError::Validation(format!("{SEED_ENV}={s:?} is not a 64-bit unsigned integer"))
        }),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, trace } => {
            let opts = RunOptions {
                seed: seed_override()?,
                output: out,
                trace,
            };
            let results = cmd_run(&config, &opts, &mut io::stdout().lock())?;
            for (cfg, m) in &results {
                eprintln!(
                    "{} seed={}: {} sent, {} delivered, {}/{} replays detected, {} false positives, {} false negatives, {} resets",
                    cfg.detector.scheme,
                    cfg.seed,
                    m.sent,
                    m.delivered,
                    m.replays_detected,
                    m.replays_injected,
                    m.false_positives,
                    m.false_negatives,
                    m.epoch_resets
                );
            }
        }
        Command::Calc {
            kind,
            b,
            n,
            m,
            k,
            p,
            scheme,
            neighbors,
            window,
        } => {
            let kind: CalcKind = kind.parse()?;
            let params = CalcParams {
                b,
                n,
                m,
                k,
                p,
                scheme,
                neighbors,
                window,
            };
            println!("{}", cmd_calc(kind, &params)?);
        }
        Command::Fig19 {
            out,
            inserted,
            probes,
            seed,
        } => {
            if inserted == 0 || probes == 0 {
                return Err(CliError::Validation(
                    "--inserted and --probes must be positive".into(),
                ));
            }
            let cfg = FpTrialConfig {
                inserted,
                probes,
                seed,
                ..FpTrialConfig::default()
            };
            for r in cmd_fig19(&out, &cfg)? {
                println!(
                    "k={} m={} fill={:.3} empirical={} predicted={} exact={}",
                    r.k,
                    r.filter_bits,
                    r.fill,
                    fmt_sig(r.fp_empirical, 6),
                    fmt_sig(r.fp_predicted, 6),
                    fmt_sig(r.fp_exact, 6)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
