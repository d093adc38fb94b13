//! Command-line surface: the shared flag set and the subcommand tree.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{AxisArg, ModeArg, SystemArg};

/// Flags shared by every subcommand; each overrides the matching config
/// file entry.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Simulated system.
    #[arg(long, global = true, value_enum)]
    pub system: Option<SystemArg>,

    /// Sweep slope of the swept field splitting.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Coupling components x,y,z,xy,yx (comma separated).
    #[arg(
        long,
        global = true,
        value_name = "X,Y,Z,XY,YX",
        allow_hyphen_values = true,
        conflicts_with = "scenario"
    )]
    pub gammas: Option<String>,

    /// Named interaction scenario: NAME or NAME:GAMMA[:CROSS].
    #[arg(long, global = true, value_name = "NAME[:G[:C]]")]
    pub scenario: Option<String>,

    /// Dimensionless sweep exponent, used instead of alpha.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,

    /// Initial basis label; letters p/m may stand in for +/- (e.g. mm, m10).
    #[arg(long, global = true, value_name = "STATE", allow_hyphen_values = true)]
    pub initial: Option<String>,

    /// Adiabaticity margin sizing the sweep window.
    #[arg(long, global = true, value_name = "W")]
    pub window_factor: Option<f64>,

    /// Propagator accuracy target (classify: probability match tolerance).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Sweep across the crossing, or stop on it.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,

    /// Scanned quantity for the scan command.
    #[arg(long, global = true, value_enum)]
    pub scan_axis: Option<AxisArg>,

    /// Scan range LO:HI:N.
    #[arg(
        long,
        global = true,
        value_name = "LO:HI:N",
        allow_hyphen_values = true
    )]
    pub scan_range: Option<String>,

    /// Add numerically propagated results next to the closed forms.
    #[arg(long, global = true)]
    pub numeric: bool,

    /// Machine-readable JSON output where supported.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads for scan points (default: available parallelism).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Seed for the sampled self-test suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output CSV path (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Print the merged effective configuration as TOML and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
}

#[derive(Debug, Parser)]
#[command(
    name = "lmsz",
    version,
    about = "Avoided-crossing sweep simulator for coupled spin pairs",
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Propagate one sweep and emit the sampled time series as CSV.
    Simulate,
    /// Sweep one axis and emit asymptotic quantities per point as CSV.
    Scan,
    /// List interaction scenarios consistent with an observed probability pair.
    Classify {
        /// Observed even-block transition probability.
        #[arg(value_name = "P_PLUS")]
        p_plus: Option<f64>,
        /// Observed odd-block transition probability.
        #[arg(value_name = "P_MINUS")]
        p_minus: Option<f64>,
    },
    /// Report the sweep slope that maximizes entanglement, per block.
    EntangleCondition,
    /// Run the built-in consistency suites and report pass/fail.
    Selftest,
}
