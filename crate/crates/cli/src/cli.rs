use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "suspension-lab", version, about = "Seeded experiments on Poisson suspensions over an odometer tower")]
pub struct Cli {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one Poisson configuration.
    Sample(SampleArgs),
    /// Push a configuration forward by `T^steps`.
    Evolve(EvolveArgs),
    /// Superpose two independent configurations.
    Superpose(SuperposeArgs),
    /// Thin a marked configuration at level `c`.
    Thin(ThinArgs),
    /// Compare both sides of Mecke's formula by Monte Carlo.
    Mecke(MeckeArgs),
    /// Estimate a chaos projection `E[Dⁿ F]` at given points.
    Project(ProjectArgs),
    /// Exact computations on a finite ground set.
    Oracle(OracleArgs),
    /// Riesz-product coefficients and singularity evidence.
    Riesz(RieszArgs),
    /// Exact autocorrelations `μ(A ∩ T^{-n} A)`.
    Autocorr(AutocorrArgs),
    /// Run a canned suite of checks.
    Suite(SuiteArgs),
}

/// Where to sample: `--window L=3` or a union of rectangles.
#[derive(Clone, Debug, Args, Serialize)]
pub struct RegionArgs {
    /// The window `X_L`, written `L=<levels>`.
    #[arg(long, value_name = "L=N", conflicts_with = "region")]
    pub window: Option<String>,

    /// Rectangles such as `C(0)[1..1] | P(10)[1..2]`.
    #[arg(long, value_name = "RECTS")]
    pub region: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub region: RegionArgs,

    /// Include the uniform marks.
    #[arg(long)]
    pub marked: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub region: RegionArgs,

    /// A configuration in JSON lines, as written by `sample`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["window", "region"])]
    pub input: Option<PathBuf>,

    #[arg(long, allow_hyphen_values = true)]
    pub steps: i64,
}

#[derive(Debug, Args, Serialize)]
pub struct SuperposeArgs {
    /// First intensity region, `L=<levels>` or rectangles.
    #[arg(long)]
    pub first: String,

    #[arg(long)]
    pub second: String,

    /// Run `--trials` repetitions and test the total count against Poisson.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ThinArgs {
    #[command(flatten)]
    pub region: RegionArgs,

    /// Retention level in (0, 1].
    #[arg(long)]
    pub c: f64,

    /// Run `--trials` repetitions and test retained counts and independence.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct MeckeArgs {
    /// The configuration observable, e.g. `N(C(0)[1..1])`.
    #[arg(long)]
    pub g: String,

    /// The simple function, e.g. `C(1)[1..2]` or `2*C(0)[1..1] - P(10)[1..2]`.
    #[arg(long)]
    pub f: String,

    /// Sampling region; defaults to the supports of `g` and `f`.
    #[command(flatten)]
    pub region: RegionArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    #[arg(long)]
    pub f: String,

    /// A rectangle per point; each point is drawn uniformly from it.
    #[arg(long = "at", value_name = "RECT")]
    pub at: Vec<String>,

    /// Sampling region; defaults to the support of `f`.
    #[command(flatten)]
    pub region: RegionArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub op: OracleOp,

    /// Atom masses, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<f64>,

    /// The ground set as `{"lambda": [...], "count_cap": K}`.
    #[arg(long, global = true, conflicts_with = "lambda")]
    pub ground: Option<String>,

    /// Per-atom count cap of the enumeration.
    #[arg(long, global = true)]
    pub count_cap: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleOp {
    /// `E[F]` by enumeration.
    Expect {
        #[arg(long)]
        f: String,
    },
    /// The table of `E[Dⁿ F]` over all n-tuples of atoms.
    Project {
        #[arg(long)]
        f: String,
        #[arg(long)]
        order: usize,
    },
    /// Mecke's identity for `h(ν, x) = g(ν) f(x)`.
    Mecke {
        #[arg(long)]
        g: String,
        /// Function on atoms, e.g. `A(0) - 2*A(1)`.
        #[arg(long)]
        f: String,
    },
    /// Orthogonality of first-chaos `h` to second-chaos `g`.
    Orth {
        #[arg(long)]
        h: String,
        #[arg(long)]
        g: String,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct RieszArgs {
    #[command(subcommand)]
    pub op: RieszOp,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RieszOp {
    /// `σ̂(m)` from the level-J partial product and the full product.
    Coeff {
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 8)]
        levels: usize,
    },
    /// Coefficients of the p-th convolution power.
    Power {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// A single frequency instead of the whole table.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Overlap and divergence witness for powers p and q.
    Singular {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
        levels: Vec<usize>,
        /// Grid size; defaults to four times the next power of two above 2 n_J.
        #[arg(long)]
        grid: Option<u64>,
        /// Dump both densities at the last level as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct AutocorrArgs {
    /// A finite union of rectangles.
    #[arg(long)]
    pub set: String,

    /// `auto-nj` for the heights `n_0..n_J`, or a comma separated list.
    #[arg(long, default_value = "auto-nj")]
    pub lags: String,

    #[arg(long, default_value_t = 4)]
    pub max_j: usize,

    /// Also estimate each covariance from `--trials` samples.
    #[arg(long)]
    pub monte_carlo: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SuiteArgs {
    #[arg(long, default_value = "acceptance")]
    pub name: String,

    /// Criterion ids to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}
