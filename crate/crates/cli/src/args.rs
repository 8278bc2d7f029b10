use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kdefect",
    version,
    about = "Defect of unitary Kronecker products"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimension of the generator span, defect and generalized defect.
    Defect(DefectArgs),
    /// Lower bounds on the generalized defect for a size sequence.
    Bound(BoundArgs),
    /// Direct-sum and invariant checks on one input.
    Verify(VerifyArgs),
    /// Haar campaign: generalized defect against the lower bound.
    Sample(SampleArgs),
    /// Direct against decomposed timings on a grid of shapes.
    Bench(BenchArgs),
}

/// Comma separated factor sizes, e.g. `2,3,3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeList(pub Vec<usize>);

impl FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let sizes = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad size {t:?}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if sizes.contains(&0) {
            return Err("sizes must be at least 1".into());
        }
        Ok(SizeList(sizes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Decomposed,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// JSON file holding one matrix or an array of factor matrices.
    #[arg(long, value_name = "PATH", conflicts_with = "sizes")]
    pub factors: Option<PathBuf>,
    /// Factor sizes; needs --haar to synthesize factors.
    #[arg(long, value_name = "LIST")]
    pub sizes: Option<SizeList>,
    /// Draw Haar random factors for --sizes.
    #[arg(long, requires = "sizes")]
    pub haar: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DefectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Decomposed)]
    pub method: MethodArg,
    /// Explicit rank tolerance; automatic when absent.
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,
    /// Include wall times in the report.
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long, value_name = "LIST", required_unless_present = "factors")]
    pub sizes: Option<SizeList>,
    /// Take the sizes from a factor file.
    #[arg(long, value_name = "PATH", conflicts_with = "sizes")]
    pub factors: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long, value_name = "LIST")]
    pub sizes: SizeList,
    /// Trial `t` uses seed `seed + t`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: u64,
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// One shape per occurrence, e.g. `--sizes 2,2 --sizes 3,3`.
    #[arg(long, value_name = "LIST")]
    pub sizes: Vec<SizeList>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seeds per shape.
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
