use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fom-lab", version, about = "Fixed-step first-order method experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method on one problem and emit its trace
    Run(RunArgs),
    /// Verify a dual certificate for a step triangle
    Certify(CertifyArgs),
    /// Build a worst-case instance and check the bound is met exactly
    Worst(WorstArgs),
    /// Print a theta sequence and the matching momentum coefficients
    Theta(ThetaArgs),
    /// Reciprocal gradient bounds per N, measured on the worst cases
    Table(TableArgs),
    /// Run several methods over several N concurrently
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct FormatArgs {
    /// Emit JSON
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV (default)
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Builtin problem (quadratic, huber, least-squares, logistic,
    /// worst:gm-huber, worst:ogmg-huber, worst:ogmg-quadratic) or a JSON file
    #[arg(long, default_value = "quadratic")]
    pub problem: String,
    /// Smoothness constant for builtin problems
    #[arg(long = "L", default_value_t = 1.0)]
    pub lipschitz: f64,
    /// Initial gap radius: builtin problems start with f(x0) - f* = L R^2 / 2
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    /// Dimension for builtin problems
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    /// Huber radius for the builtin `huber` problem
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Seed for the random builtin problems
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunMethod {
    Gm,
    Fgm,
    Ogm,
    #[value(name = "ogm_zform")]
    OgmZform,
    Ogmg,
    #[value(name = "ogmg_zform")]
    OgmgZform,
    Chain,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub method: RunMethod,
    #[arg(short = 'N')]
    pub n: usize,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CertMethodArg {
    Gm,
    Ogmg,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Use the analytic triangle and certificate of this method
    #[arg(long, value_enum)]
    pub method: Option<CertMethodArg>,
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Step triangle JSON ({"N", "method", "h"})
    #[arg(long)]
    pub triangle: Option<PathBuf>,
    /// Certificate JSON ({"N", "a", "b", "c", "e"})
    #[arg(long)]
    pub cert: Option<PathBuf>,
    #[arg(long = "L", default_value_t = 1.0)]
    pub lipschitz: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    /// Include the assembled S matrix
    #[arg(long)]
    pub full: bool,
    /// Tolerance overrides, e.g. `psd=1e-9,equality=1e-11`
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Huber,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct WorstArgs {
    #[arg(long, value_enum)]
    pub method: CertMethodArg,
    #[arg(long, value_enum, default_value = "huber")]
    pub flavor: FlavorArg,
    #[arg(short = 'N')]
    pub n: usize,
    #[arg(long = "L", default_value_t = 1.0)]
    pub lipschitz: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long)]
    pub tol: Option<String>,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Ogmg,
    Ogm,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[arg(long, value_enum, default_value = "ogmg")]
    pub variant: VariantArg,
    #[arg(short = 'N')]
    pub n: usize,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Comma-separated iteration counts
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,10,20,30,40,50")]
    pub n_list: Vec<usize>,
    #[arg(long)]
    pub tol: Option<String>,
    #[command(flatten)]
    pub format: FormatArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated methods
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gm,fgm,ogm,ogmg,chain")]
    pub methods: Vec<RunMethod>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    pub n_list: Vec<usize>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub format: FormatArgs,
}
