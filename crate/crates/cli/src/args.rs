use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "srgeo",
    version,
    about = "Sub-Riemannian geodesic flows on 3D unimodular Lie groups",
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Invariant chi (must be non-negative).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    /// Invariant kappa.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Seed of the random sampler.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// File of `key = value` lines supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the algebra class, structure constants and Killing signature.
    Classify,
    /// Integrate the geodesic flow with adjoint transport and record integrals.
    Simulate(SimulateArgs),
    /// Run every property check for the given parameters.
    Verify(VerifyArgs),
    /// Sweep a grid of parameters.
    Scan(ScanArgs),
    /// Integrate pendulum trajectories for a phase portrait.
    Portrait(PortraitArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub h0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub h1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub h2: Option<f64>,
    /// Pendulum radius; with --gamma and --c replaces the h0, h1, h2 chart.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Fixed step of the rk4 method.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Output interval; every accepted step when absent.
    #[arg(long)]
    pub sample_every: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    /// Summary JSON path; next to --out when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Hamiltonian,
    Energy,
    Casimir,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// Random states per check.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScanArgs {
    /// `lo:hi` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub chi_range: Option<Span>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_range: Option<Span>,
    /// Points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Transport flows per cell.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PortraitArgs {
    #[arg(long)]
    pub r: Option<f64>,
    /// Seeds per axis of the (gamma, c) grid.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Half-height of the c range of the grid.
    #[arg(long)]
    pub c_max: Option<f64>,
    /// Extra seed `gamma,c`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_point: Vec<SeedPoint>,
    #[arg(long)]
    pub sample_every: Option<f64>,
    /// Also write an SVG plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Closed interval `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    /// `n` evenly spaced points; the lower end when `n = 1`.
    pub fn points(self, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![self.lo],
            _ => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        let span = match s.split_once(':') {
            Some((lo, hi)) => Span { lo: parse(lo)?, hi: parse(hi)? },
            None => {
                let v = parse(s)?;
                Span { lo: v, hi: v }
            }
        };
        if !(span.lo.is_finite() && span.hi.is_finite()) || span.lo > span.hi {
            return Err(format!("invalid range {s:?}"));
        }
        Ok(span)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Portrait seed `gamma,c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedPoint {
    pub gamma: f64,
    pub c: f64,
}

impl FromStr for SeedPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (g, c) = s.split_once(',').ok_or_else(|| format!("expected gamma,c in {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
        Ok(SeedPoint { gamma: parse(g)?, c: parse(c)? })
    }
}
