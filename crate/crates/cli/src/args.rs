use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ccvp", version, about = "Optimality certificates for cone-constrained vector optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the KKT condition at a point, searching for multipliers unless given.
    CheckKkt {
        problem: PathBuf,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        multipliers: MultiplierArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Verify an AKKT certificate file against conditions (A0)-(A2).
    VerifyAkkt {
        problem: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate an AKKT certificate with the exterior penalty method.
    Generate {
        problem: PathBuf,
        /// Starting point; defaults to the named point `x0`, else the origin.
        #[command(flatten)]
        point: PointArg,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[command(flatten)]
        penalty: PenaltyArgs,
        /// Write the certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Constraint qualifications at a feasible point.
    Cq {
        problem: PathBuf,
        #[command(flatten)]
        point: PointArg,
        #[command(flatten)]
        probe: ProbeArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Built-in reference problems 1, 2 and 3.
    Example {
        id: u32,
        #[command(flatten)]
        action: ExampleAction,
        #[command(flatten)]
        multipliers: MultiplierArgs,
        #[command(flatten)]
        probe: ProbeArgs,
        /// Write the problem file here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct PointArg {
    /// A named point from the problem file or reals, e.g. `1,0`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
}

#[derive(Debug, Args)]
pub struct MultiplierArgs {
    #[arg(long, allow_hyphen_values = true, requires = "mu")]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "lambda")]
    pub mu: Option<String>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Defaults to 1e-6; 1e-3 for the example 1 reference certificate,
    /// whose last step is k = 1000.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sorted `key value` lines with 17 significant digits.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Args)]
pub struct PenaltyArgs {
    #[arg(long, default_value_t = 1.0)]
    pub rho0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub gamma: f64,
    /// Number of outer iterations.
    #[arg(long, default_value_t = 12)]
    pub outer: usize,
    /// Steepest descent instead of Newton in the inner solver.
    #[arg(long)]
    pub steepest: bool,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Also run the sampling probe for AKKT-regularity.
    #[arg(long)]
    pub probe_regularity: bool,
    #[arg(long, env = "CCVP_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct ExampleAction {
    /// Verify the reference AKKT certificate.
    #[arg(long)]
    pub verify_akkt: bool,
    /// Check KKT at `xbar`.
    #[arg(long)]
    pub check_kkt: bool,
    /// Constraint qualifications at `xbar`.
    #[arg(long)]
    pub cq: bool,
}
