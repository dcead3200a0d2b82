mod classify;
mod portrait;
mod scan;
mod simulate;
mod verify;

use std::path::PathBuf;

use serde::Serialize;
use srgeo::UnimodularParams;

use crate::args::{Cli, Command, Format, GlobalArgs};
use crate::config::{pick, pick_enum, ConfigFile};
use crate::error::CliError;

pub use classify::{classify_report, ClassifyReport};
pub use portrait::{portrait, PortraitOptions, PortraitTrajectory};
pub use scan::{scan, ScanOptions, ScanRow};
pub use simulate::{simulate, SimulateOptions, SimulateOutcome};
pub use verify::{verify_report, VerifyReport};

pub const DEFAULT_SEED: u64 = 0;

/// Global settings after merging flags with the config file.
#[derive(Debug, Clone)]
pub struct Context {
    pub global: GlobalArgs,
    pub file: ConfigFile,
}

impl Context {
    pub fn new(global: GlobalArgs) -> Result<Self, CliError> {
        let file = match &global.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Self { global, file })
    }

    pub fn params(&self) -> Result<UnimodularParams, CliError> {
        let chi = pick(self.global.chi, &self.file, "chi")?.ok_or_else(|| CliError::Usage("missing --chi".into()))?;
        let kappa =
            pick(self.global.kappa, &self.file, "kappa")?.ok_or_else(|| CliError::Usage("missing --kappa".into()))?;
        Ok(UnimodularParams::new(chi, kappa)?)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(pick(self.global.seed, &self.file, "seed")?.unwrap_or(DEFAULT_SEED))
    }

    pub fn out(&self) -> Result<Option<PathBuf>, CliError> {
        pick(self.global.out.clone(), &self.file, "out")
    }

    pub fn format(&self, default: Format) -> Result<Format, CliError> {
        Ok(pick_enum(self.global.format, &self.file, "format")?.unwrap_or(default))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamsOut {
    pub chi: f64,
    pub kappa: f64,
}

impl From<UnimodularParams> for ParamsOut {
    fn from(p: UnimodularParams) -> Self {
        Self { chi: p.chi(), kappa: p.kappa() }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context::new(cli.global)?;
    match cli.command {
        Command::Classify => classify::run(&ctx),
        Command::Simulate(a) => simulate::run(&ctx, &a),
        Command::Verify(a) => verify::run(&ctx, &a),
        Command::Scan(a) => scan::run(&ctx, &a),
        Command::Portrait(a) => portrait::run(&ctx, &a),
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive (got {v})")))
    }
}
