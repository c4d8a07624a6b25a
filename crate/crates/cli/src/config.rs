use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "pretlab", version, about = "Predictions and brute-force checks for pretentious multiplicative functions")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunOptions,

    #[command(subcommand)]
    pub command: Command,
}

/// Execution settings. They never change a report's numbers, so they are
/// left out of the embedded config.
#[derive(Debug, Args)]
pub struct RunOptions {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Run the oracles on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Mean of f(P(n)) against its Euler product.
    Meanvalue(MeanvalueArgs),
    /// Correlation of f(P(n)) and g(Q(n)).
    Correlate(CorrelateArgs),
    /// Shifted self-correlation of f pretending to be χ(n) n^{it}.
    CharShift(CharShiftArgs),
    /// Number of roots of P modulo p^k.
    Omega(OmegaArgs),
    /// Pretentious distance, optionally minimised over characters.
    Distance(DistanceArgs),
    /// Bounded-discrepancy characterization for ±1-valued f.
    Ect(EctArgs),
    /// Logarithmic mean of |f(n+1) − f(n)|² against the energy prediction.
    Katai(KataiArgs),
    /// Representations n = m + (n − m) with m ∈ A, n − m ∈ B.
    Brudern(BrudernArgs),
    /// Steered function with a large mean of f(n² + 1).
    Adversary(AdversaryArgs),
    /// m-point correlation of linear forms.
    Multi(MultiArgs),
    /// Reduced-scale invariant suite.
    Selftest(SelftestArgs),
    /// Re-run the config embedded in a JSON report.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MeanvalueArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long = "P", default_value = "x")]
    #[serde(rename = "P")]
    pub p: String,
    #[arg(long)]
    pub x: u64,
    /// Largest prime in the Euler product (default: x).
    #[arg(long)]
    pub product_limit: Option<u64>,
    /// Skip the direct sum.
    #[arg(long)]
    pub no_direct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Singular series for two linear forms, Euler product otherwise.
    Auto,
    Linear,
    Poly,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub f: String,
    /// Second function (default: f).
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long = "P", default_value = "x")]
    #[serde(rename = "P")]
    pub p: String,
    #[arg(long = "Q", default_value = "x+1")]
    #[serde(rename = "Q")]
    pub q: String,
    #[arg(long)]
    pub x: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, value_enum, default_value_t = Route::Auto)]
    pub route: Route,
    #[arg(long)]
    pub no_direct: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CharShiftArgs {
    #[arg(long)]
    pub f: String,
    /// Modulus of the primitive character.
    #[arg(long)]
    pub q: u64,
    /// Index of the character in the group mod q.
    #[arg(long, default_value_t = 1)]
    pub chi: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub d: i64,
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub no_direct: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OmegaArgs {
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub p_poly: String,
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub k: u32,
    /// Also list the roots (small moduli only).
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistanceArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value = "one")]
    pub g: String,
    #[arg(long, default_value_t = 1.0)]
    pub y: f64,
    #[arg(long)]
    pub x: u64,
    /// Add the large prime powers dividing values of this polynomial.
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub p: Option<String>,
    /// With --P: sum over prime powers weighted by 1/p^k.
    #[arg(long)]
    pub starred: bool,
    /// Also minimise over primitive characters of modulus up to this.
    #[arg(long)]
    pub scan_q: Option<u64>,
    /// Grid of t values for the scan.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EctArgs {
    #[arg(long)]
    pub f: String,
    /// Discrepancy and G-series range.
    #[arg(long)]
    pub x: u64,
    /// Threshold beyond which f(p^k) must stabilize.
    #[arg(long = "M", default_value_t = 30)]
    #[serde(rename = "M")]
    pub m: u64,
    /// Second moments for H = 1..=h_max (0 to skip).
    #[arg(long, default_value_t = 0)]
    pub h_max: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KataiArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long, default_value_t = 0)]
    pub chi: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long)]
    pub x: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    Printed,
    Normalized,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BrudernArgs {
    /// Indicator of A.
    #[arg(long)]
    pub a: String,
    /// Indicator of B (default: A).
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub n: u64,
    /// Normalization of a(p^k) in the σ(n) diagnostic.
    #[arg(long, value_enum, default_value_t = Reading::Printed)]
    pub reading: Reading,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AdversaryArgs {
    #[arg(long = "P", default_value = "x^2+1")]
    #[serde(rename = "P")]
    pub p: String,
    #[arg(long)]
    pub x: u64,
    #[arg(long, default_value = "one")]
    pub base: String,
    /// Instead run the iterated construction at x_k = 2^{2^k}, k <= K.
    #[arg(long)]
    pub levels: Option<u32>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MultiArgs {
    /// One factor f(a n + b) as "SPEC | a | b" or "SPEC | a | b | t".
    #[arg(long = "term", required = true)]
    pub terms: Vec<String>,
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub no_direct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectFault {
    GSign,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 10_000)]
    pub x: u64,
    /// Corrupt a component on purpose to exercise the failure path.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<InjectFault>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// A JSON report written by this tool.
    pub report: PathBuf,
}
