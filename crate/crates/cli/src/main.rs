use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pinmg_cli::{execute, Command, NodeRef, Overrides};

/// Pinning selection and secondary-control simulation for islanded microgrids.
///
/// Every run reads one TOML document. Flags override the matching document
/// fields. Outputs go to `--out` together with `manifest.toml`, which can be
/// passed back as `--config` to replay the run.
///
/// Exit codes: 0 success, 2 configuration error, 3 unattainable rate target,
/// 4 unstable simulation.
#[derive(Parser, Debug)]
#[command(name = "pinmg", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Tabulate path/deg metrics, phi and its bounds for candidate sets.
    Analyze,
    /// Choose a pinning set (fixed-m, target-rate or exhaustive).
    Pin,
    /// Run the error dynamics or the plant model for a pinning set.
    Simulate,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Configuration document or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// pin: fixed-m | target-rate | exhaustive; simulate: errors | plant;
    /// analyze: literal | pinned-out-degree | layer-chain.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Number of pinned nodes for fixed-m and exhaustive selection.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Target convergence rate (1/s).
    #[arg(long = "lambda-star", global = true)]
    lambda_star: Option<f64>,
    /// Pinning gain g.
    #[arg(long, global = true)]
    gain: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Integration step (s).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Simulation horizon (s).
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// Pinned nodes, comma separated labels or 1-based numbers.
    #[arg(long, global = true, value_delimiter = ',')]
    pinned: Option<Vec<NodeRef>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config) = cli.common.config.clone() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(pinmg_cli::EXIT_CONFIG as u8);
    };
    let cmd = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Pin => Command::Pin,
        Cmd::Simulate => Command::Simulate,
    };
    let c = cli.common;
    let overrides = Overrides {
        mode: c.mode,
        m: c.m,
        lambda_star: c.lambda_star,
        gain: c.gain,
        dt: c.dt,
        t_end: c.t_end,
        pinned: c.pinned,
    };
    let outcome = execute(cmd, &config, &overrides, &c.out);
    print!("{}", outcome.stdout);
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
