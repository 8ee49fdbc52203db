//! The `irbox` command line.
//!
//! Exit codes: 0 ok, 2 input error, 3 validation error, 4 internal limit.
//! Global flags can also be set through `IRBOX_TOLERANCE`, `IRBOX_FORMAT`
//! and `IRBOX_DEPTH_CAP`.

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::gasket::DEFAULT_DEPTH_CAP;
use crate::model::DEFAULT_TOLERANCE;

pub use commands::run;
pub use output::write_atomic;

#[derive(Debug, Parser)]
#[command(
    name = "irbox",
    version,
    about = "Insolvency risk indices, risk box and gasket tools"
)]
pub struct Cli {
    /// Relative tolerance for the accounting identity a = d + e
    #[arg(long, global = true, env = "IRBOX_TOLERANCE", default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    /// Output format for tabular results
    #[arg(long, global = true, env = "IRBOX_FORMAT", value_enum)]
    pub format: Option<Format>,

    /// Largest gasket depth any command may build
    #[arg(long, global = true, env = "IRBOX_DEPTH_CAP", default_value_t = DEFAULT_DEPTH_CAP)]
    pub depth_cap: u32,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Risk indices for every row of a balance-sheet CSV
    Indices(IndicesArgs),
    /// Render the risk box with points, isoclines and gasket as SVG
    Irbox(IrboxArgs),
    /// Build the gasket and report exact area and perimeter
    Gasket(GasketArgs),
    /// Fit the box-counting dimension of the gasket
    Dimension(DimensionArgs),
    /// Optimise firms and compute welfare for a JSON scenario
    Simulate(SimulateArgs),
    /// Estimate P(e <= 0 | d > 0) for a panel
    Prob(ProbArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    TimeSeries,
    CrossSection,
}

#[derive(Debug, Args)]
pub struct PanelArgs {
    /// Balance-sheet CSV: firm_id,period,debt,equity[,assets]
    pub csv: PathBuf,

    /// Panel axis; `auto` picks time-series for one firm, else cross-section
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,

    /// Admit non-positive equity
    #[arg(long)]
    pub distress: bool,
}

#[derive(Debug, Args)]
pub struct IndicesArgs {
    #[command(flatten)]
    pub panel: PanelArgs,

    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerName {
    Points,
    Unity,
    Tr,
    Nr,
    Aco,
    Firi,
    Gasket,
}

#[derive(Debug, Args)]
pub struct IrboxArgs {
    #[command(flatten)]
    pub panel: PanelArgs,

    /// Layers to draw, comma separated
    #[arg(long, value_enum, value_delimiter = ',')]
    pub layers: Vec<LayerName>,

    /// Total-risk levels (default: side x 0.5, 1, 1.5)
    #[arg(long, value_delimiter = ',')]
    pub tr_levels: Vec<f64>,

    /// Net-risk levels (default: side x 0.25, 0.5)
    #[arg(long, value_delimiter = ',')]
    pub nr_levels: Vec<f64>,

    /// Asset-capital overlap levels (default: side x 0.5, 1)
    #[arg(long, value_delimiter = ',')]
    pub aco_levels: Vec<f64>,

    /// FIRI ray levels in (0, 1] (default: 0.25, 0.5, 0.75)
    #[arg(long, value_delimiter = ',')]
    pub firi_levels: Vec<f64>,

    /// Depth of the gasket layer
    #[arg(long, default_value_t = 5)]
    pub gasket_depth: u32,

    #[arg(long, default_value_t = 800)]
    pub width: u32,

    #[arg(long, default_value_t = 800)]
    pub height: u32,

    /// SVG output path (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GasketArgs {
    /// Number of refinement steps
    #[arg(long)]
    pub depth: u32,

    /// SVG of the remaining triangles
    #[arg(long)]
    pub svg: Option<PathBuf>,

    /// Stats JSON (stdout if omitted)
    #[arg(long)]
    pub stats: Option<PathBuf>,

    /// Binary triangle list
    #[arg(long)]
    pub triangles: Option<PathBuf>,

    #[arg(long, default_value_t = 800)]
    pub width: u32,

    #[arg(long, default_value_t = 800)]
    pub height: u32,
}

/// Inclusive scale window written `MIN..MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window(pub u32, pub u32);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| format!("expected MIN..MAX, got {s:?}"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad scale {v:?} in window {s:?}"))
        };
        Ok(Window(parse(lo)?, parse(hi)?))
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.0, self.1)
    }
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    /// Gasket depth
    #[arg(long, default_value_t = 10)]
    pub depth: u32,

    /// Scale window MIN..MAX (default 3..depth-1, or 1..4 with --square)
    #[arg(long)]
    pub window: Option<Window>,

    /// Fit the filled unit square instead of the gasket
    #[arg(long)]
    pub square: bool,

    /// Count cells that only touch the set along an edge or corner
    #[arg(long)]
    pub closed_cells: bool,

    /// Read triangles from a binary list instead of building the gasket
    #[arg(long, conflicts_with = "square")]
    pub triangles: Option<PathBuf>,

    /// (m, N(m)) table as CSV
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Fit summary JSON (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON: {"params": {r, z, tau, p, pi_store}, "firms": [{d, e, x}]}
    pub scenario: PathBuf,

    /// Report JSON (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Empirical,
    Geometric,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    /// Balance-sheet CSV; negative equity is always admitted here
    pub csv: PathBuf,

    #[arg(long, value_enum, default_value_t = MethodArg::Empirical)]
    pub method: MethodArg,

    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,

    /// Report JSON (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Input = 2,
    Validation = 3,
    Limit = 4,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
