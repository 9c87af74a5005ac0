use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "nijenhuis",
    version,
    about = "Construct Nijenhuis operators and verify their identities numerically"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an operator family at the given points.
    Construct(Opts),
    /// Torsion components at the given points.
    Torsion(Opts),
    /// Seeded sweep of one or all identities over a box.
    Verify {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_enum, default_value_t = Check::All)]
        check: Check,
    },
    /// Characteristic-polynomial coefficients at points.
    Charpoly(Opts),
    /// Classify points by the smoothness of the quotients by f_y.
    Diagnose(Opts),
    /// Residuals of the remainder system for R (or for the Morse remainder of f).
    PdeCheck(Opts),
    /// Reduce f to ±ỹ² + R(x) fiberwise and check the normal form on a grid.
    MorseReduce(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Torsion(_) => "torsion",
            Command::Verify { .. } => "verify",
            Command::Charpoly(_) => "charpoly",
            Command::Diagnose(_) => "diagnose",
            Command::PdeCheck(_) => "pde-check",
            Command::MorseReduce(_) => "morse-reduce",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Construct(o)
            | Command::Torsion(o)
            | Command::Verify { opts: o, .. }
            | Command::Charpoly(o)
            | Command::Diagnose(o)
            | Command::PdeCheck(o)
            | Command::MorseReduce(o) => o,
        }
    }

    pub fn opts_mut(&mut self) -> &mut Opts {
        match self {
            Command::Construct(o)
            | Command::Torsion(o)
            | Command::Verify { opts: o, .. }
            | Command::Charpoly(o)
            | Command::Diagnose(o)
            | Command::PdeCheck(o)
            | Command::MorseReduce(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Torsion,
    Conjugation,
    Sigma,
    Pde,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Companion,
    Diffnondeg,
    #[value(name = "2d")]
    TwoDim,
    Theorem1,
    Theorem2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Dimension of the manifold.
    #[arg(long)]
    pub n: Option<usize>,
    /// Expression for f in x1 … x(n-1), y.
    #[arg(long = "f", value_name = "EXPR")]
    pub f: Option<String>,
    /// Expression for the remainder R in x1 … x(n-1).
    #[arg(long = "R", value_name = "EXPR")]
    pub r: Option<String>,
    /// Comma-separated expressions σ_1, …, σ_n.
    #[arg(long, value_name = "EXPR,...")]
    pub sigma: Option<String>,
    /// `diag:e1,e2,...` or row-major `a,b;c,d`.
    #[arg(long, value_name = "LITERAL")]
    pub matrix: Option<String>,
    /// +1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    pub sign: Option<String>,
    /// A point; repeat the flag for several.
    #[arg(long = "point", num_args = 1.., allow_negative_numbers = true, action = ArgAction::Append, value_name = "V")]
    pub point_values: Vec<f64>,
    /// `--point` values grouped by occurrence, filled in after parsing.
    #[arg(skip)]
    pub point: Vec<Vec<f64>>,
    /// `lo hi` for every axis, or one `lo hi` pair per axis.
    #[arg(long = "box", num_args = 2.., allow_negative_numbers = true, value_name = "BOUND")]
    pub bounds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Overrides the default tolerance of every check run.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "fd-step", default_value_t = nijenhuis::torsion::DEFAULT_FD_STEP)]
    pub fd_step: f64,
    /// Sweeps reject points whose f_y or det J is smaller than this.
    #[arg(long = "min-denominator", default_value_t = nijenhuis::torsion::DEFAULT_MIN_DENOMINATOR)]
    pub min_denominator: f64,
    /// Points per axis for grid-based commands.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
