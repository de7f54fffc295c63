use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cknscope", version, about = "Scaled local functionals, inequality checks and regularity screening for sampled Navier-Stokes flows")]
pub struct Cli {
    /// Worker threads (defaults to CKNSCOPE_THREADS, then to the number of CPUs).
    #[arg(long, global = true, env = "CKNSCOPE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated flow as an NSFLOW1 file.
    Gen(GenCmd),
    /// Evaluate the scaled functionals at one point and a list of radii.
    Functionals(FunctionalsCmd),
    /// Run the inequality checkers over a random suite and fit empirical constants.
    Verify(VerifyCmd),
    /// Sweep scales and apply the regularity criteria at a set of points.
    Scan(ScanCmd),
    /// Emit traces of the iteration and theorem bound chains, or the eps/M curve.
    Trace(TraceCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Shear,
    Beltrami,
    Random,
    Selfsimilar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct GenSpec {
    /// Generator name.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Box side; defaults to 2π.
    #[arg(long)]
    pub box_length: Option<f64>,
    #[arg(long, default_value_t = 17)]
    pub n_times: usize,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest wavenumber of the random field.
    #[arg(long, default_value_t = 2)]
    pub kmax: usize,
    /// Amplitude of the random field.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Beltrami amplitudes A,B,C.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.0, 1.0])]
    pub amplitudes: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub viscosity: f64,
    /// Focal time of the self-similar fixture.
    #[arg(long, default_value_t = 1.0)]
    pub blowup_time: f64,
    #[arg(long, default_value_t = 1.0)]
    pub profile_scale: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// NSFLOW1 input file.
    #[arg(long, conflicts_with = "kind")]
    pub flow: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GenSpec,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenCmd {
    #[command(flatten)]
    pub gen: GenSpec,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FunctionalsCmd {
    #[command(flatten)]
    pub source: Source,
    /// Point x1,x2,x3; the box centre when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Time; the last slice when absent.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5])]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Fail when the flow carries no pressure.
    #[arg(long)]
    pub require_pressure: bool,
    /// Admit small cylinders (interpolated quadrature, short windows).
    #[arg(long)]
    pub relaxed: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[arg(long, default_value_t = 200)]
    pub fields: usize,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![32, 64])]
    pub resolutions: Vec<usize>,
    /// Lemma ids to check (L31, L32, L41, L44, L51a, L51b, L52, L53, L54, L55); all when absent.
    #[arg(long, value_delimiter = ',')]
    pub lemma: Vec<String>,
    /// Single (q, k) pair for L52 and L53 in place of the default corner set.
    #[arg(long, requires = "k")]
    pub q: Option<f64>,
    #[arg(long, requires = "q")]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub kmax: usize,
    #[arg(long, default_value_t = 9)]
    pub n_times: usize,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Keep every individual check in the report.
    #[arg(long)]
    pub keep_checks: bool,
    /// Baseline fits (JSON list of ConstantFit, or a verify report) for the regression comparison.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Number of forced fields for the pressure-decomposition constants (0 skips them).
    #[arg(long, default_value_t = 0)]
    pub pressure_fields: usize,
    #[arg(long, default_value_t = 1.0)]
    pub pressure_radius: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    #[command(flatten)]
    pub source: Source,
    /// Explicit point x1,x2,x3 (repeatable).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Vec<f64>,
    /// Cube of points about the centre: half-width,per-axis.
    #[arg(long, value_delimiter = ',')]
    pub cube: Option<Vec<f64>>,
    /// Time; the last slice when absent.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub r_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec!["theorem1".to_string(), "theorem2".into(), "ckn".into(), "seregin".into()])]
    pub criteria: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Exponent for Theorem 1.
    #[arg(long, default_value_t = 1.8)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m_cap: f64,
    #[arg(long)]
    pub tail: Option<usize>,
    /// Exit nonzero when any point fails.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true)))]
pub struct TraceCmd {
    #[arg(long, group = "mode")]
    pub iteration: bool,
    #[arg(long, group = "mode")]
    pub theorem1: bool,
    #[arg(long, group = "mode")]
    pub theorem2: bool,
    #[arg(long, group = "mode")]
    pub epsilon_curve: bool,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// M (a list for the eps/M curve).
    #[arg(long = "M", value_delimiter = ',', default_values_t = vec![2.0])]
    pub m_bar: Vec<f64>,
    #[arg(long = "m", default_value_t = 0.0)]
    pub m_under: f64,
    #[arg(long = "Y0", default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, default_value_t = 60)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[command(flatten)]
    pub output: Output,
}
