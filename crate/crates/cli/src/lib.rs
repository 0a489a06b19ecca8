//! `pinmg` command-line runner: network analysis, pinning selection and
//! closed-loop simulation driven by one TOML document.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use config::{Command, ConfigDoc, NodeRef, Overrides, Resolved};
pub use manifest::{OutputEntry, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_UNSTABLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pinmg_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Prefixes a configuration message with the field it concerns.
    pub fn context(self, field: &str) -> Self {
        match self {
            CliError::Config(msg) => CliError::Config(format!("{field}: {msg}")),
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use pinmg_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_FAILURE,
            CliError::Core(e) => match e {
                E::Unattainable { .. } => EXIT_INFEASIBLE,
                E::Unstable { .. } | E::NonFinite { .. } => EXIT_UNSTABLE,
                E::InvalidNetwork(_)
                | E::SelfLoop(_)
                | E::NodeOutOfRange { .. }
                | E::Parse { .. }
                | E::InvalidPinning(_)
                | E::EmptyPinningSet
                | E::InvalidParameter(_)
                | E::TooManyPins { .. }
                | E::GuardExceeded { .. }
                | E::StepTooLarge { .. }
                | E::SingularAdmittance
                | E::Uncoverable { .. }
                | E::Config(_) => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// What a finished invocation reports back to `main`.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub error: Option<CliError>,
}

/// Loads the configuration, runs the command and writes the manifest.
/// A run that fails after resolution still gets a manifest listing whatever
/// it wrote, so partial output stays traceable.
pub fn execute(cmd: Command, config_path: &Path, overrides: &Overrides, out_dir: &Path) -> Outcome {
    let started = Instant::now();
    let fail = |e: CliError| Outcome {
        exit_code: e.exit_code(),
        stdout: String::new(),
        error: Some(e),
    };
    let doc = match config::load(config_path) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let resolved = match doc.resolve(&base, cmd, overrides) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut out = match commands::OutputDir::create(out_dir) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };

    let mut stdout = String::new();
    for w in &resolved.warnings {
        stdout.push_str(&format!("warning: {w}\n"));
    }
    let result = match cmd {
        Command::Analyze => commands::analyze(&resolved, &mut out, &mut stdout),
        Command::Pin => commands::pin(&resolved, &mut out, &mut stdout),
        Command::Simulate => commands::simulate(&resolved, &mut out, &mut stdout),
    };
    let exit_code = result.as_ref().err().map_or(EXIT_OK, CliError::exit_code);

    let manifest = RunManifest {
        command: command_name(cmd).to_string(),
        config: config_path.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        exit_code,
        wall_clock_s: started.elapsed().as_secs_f64(),
        note: result.as_ref().err().map(ToString::to_string),
        outputs: out.entries().to_vec(),
        resolved: resolved.doc.clone(),
    };
    if let Err(e) = manifest.write(out.path()) {
        return fail(e);
    }
    Outcome {
        exit_code,
        stdout,
        error: result.err(),
    }
}

pub fn command_name(cmd: Command) -> &'static str {
    match cmd {
        Command::Analyze => "analyze",
        Command::Pin => "pin",
        Command::Simulate => "simulate",
    }
}
