use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "qglt", version, about = "Lieb-Thirring ratios and spectral identities on star graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every subcommand. Unset values fall back to the config
/// file named by `QGLT_CONFIG`, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Number of edges of the star graph.
    #[arg(long, global = true)]
    pub edges: Option<usize>,
    /// Potential-field JSON file.
    #[arg(long, global = true, value_name = "FILE")]
    pub potential: Option<PathBuf>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Grid step.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Edge length; must be a multiple of the grid step.
    #[arg(long, global = true)]
    pub len: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub far_bc: Option<FarBc>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol_eig: Option<f64>,
    #[arg(long, global = true)]
    pub tol_zero: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FarBc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Negative spectrum, Riesz mean and ratio of one field.
    Solve {
        /// Write the assembled operator as JSON.
        #[arg(long, value_name = "FILE")]
        dump_operator: Option<PathBuf>,
    },
    /// Check an identity or bound on a field or on random fields.
    Verify(VerifyArgs),
    /// Ratios of radially translated line wells.
    Sweep(SweepArgs),
    /// Projected-gradient search for large ratios.
    Search(SearchArgs),
    /// Bound states from the secular equation, optionally against the grid.
    Oracle {
        /// Also solve the discrete problem and report differences.
        #[arg(long)]
        compare: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Sector,
    Lemma,
    CutEven,
    CutSplit,
    Theorem1,
    Theorem2,
    SplitBound,
    Mono,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, required_unless_present = "suite", conflicts_with = "suite")]
    pub check: Option<Check>,
    /// Run every check that applies to the field.
    #[arg(long)]
    pub suite: bool,
    /// Random fields to draw when no potential is given.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Edge subset for cut-split, 1-based; every subset of size at most 2
    /// when omitted.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
    /// Odd sub-star size for mono.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Constant assumed for the sub-star in mono.
    #[arg(long)]
    pub l_n0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0])]
    pub offsets: Vec<f64>,
    /// Depth of the centered line well (ignored with --potential).
    #[arg(long, default_value_t = 1.0)]
    pub depth: f64,
    #[arg(long, default_value_t = 2.0)]
    pub width: f64,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub symmetrize: bool,
}
