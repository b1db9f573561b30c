use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "tensorforge", version, about = "Tensor rank and depth-3 circuit reconstruction over finite fields")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Job seed; falls back to TENSORFORGE_SEED, then 0.
    #[arg(long, global = true, env = "TENSORFORGE_SEED")]
    pub seed: Option<u64>,
    /// `p` or `p^t`; input files carry their own field.
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Candidate budget for the reconstruction searches.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true)]
    pub allow_extension: bool,
    #[arg(long, global = true)]
    pub cluster_r_init: Option<usize>,
    #[arg(long, global = true)]
    pub cluster_kappa: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Set-multilinear tensor of rank `k`.
    Sml,
    /// Symmetric tensor of a sum of `k` powers.
    Waring,
    /// Two-cluster multilinear circuit with a shared gcd.
    Ml,
    /// Multilinear circuit with `k` gates of degree `d`.
    MlLowdeg,
    /// Polynomial system, solvable when `--planted`.
    System,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tensor rank of a tensor file.
    Rank { input: PathBuf },
    /// Minimal CP decomposition of a tensor file.
    Decompose { input: PathBuf },
    /// Symmetric rank of a cubical tensor file.
    RankSym { input: PathBuf },
    /// Minimal power-sum decomposition of a cubical tensor file.
    DecomposeSym { input: PathBuf },
    /// Learn a multilinear circuit from black-box access to the circuit in a file.
    ReconstructMl {
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Compare a tensor or circuit with a decomposition or circuit.
    Verify { input: PathBuf, candidate: PathBuf },
    /// Solve a polynomial system file.
    Solve { input: PathBuf },
    /// Write a random planted instance and its plant sidecar.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Part width for tensors.
        #[arg(long, default_value_t = 2)]
        nj: usize,
        /// Variables for circuits, unknowns for systems.
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Equations in a system.
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        planted: bool,
        /// Instance path; the plant goes next to it with a `.plant.json` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
