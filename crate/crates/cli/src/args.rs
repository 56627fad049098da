//! Command-line surface and resolution of the effective settings.

use crate::config::ConfigFile;
use crate::error::CliError;
use clap::{Args, Parser, Subcommand};
use snpmrf::{InitStrategy, LabelOrder, LabelSet, Method, ModelParams, SolverConfig, SsimMode};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(
    name = "snpmrf",
    version,
    about = "Salt-and-pepper restoration with grid MRF solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add salt-and-pepper noise; also writes the detection mask.
    Corrupt(CorruptArgs),
    /// Restore a noisy image.
    Denoise(DenoiseArgs),
    /// Compare a restored image against a reference.
    Eval(EvalArgs),
    /// Run the method x noise-level grid on one or more images.
    Bench(BenchArgs),
    /// Upsample by treating the new pixels as missing data.
    Superres(SuperresArgs),
}

/// Model, solver and reporting flags shared by several subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonFlags {
    /// Flat key = value settings file; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Smoothness weight (non-negative integer).
    #[arg(long, value_name = "F")]
    pub lambda: Option<f64>,
    /// Truncation of the smoothness penalty (non-negative integer).
    #[arg(long, value_name = "F")]
    pub vmax: Option<f64>,
    /// Smoothness exponent: 1 (truncated linear) or 2 (truncated quadratic).
    #[arg(long, value_name = "1|2")]
    pub k: Option<u32>,
    /// Use every N-th intensity as a label.
    #[arg(long = "label-stride", value_name = "N")]
    pub label_stride: Option<usize>,
    /// Cap on solver cycles or message passes.
    #[arg(long = "max-cycles", value_name = "N")]
    pub max_cycles: Option<usize>,
    /// Starting labeling: observed, midgray or median.
    #[arg(long, value_name = "NAME")]
    pub init: Option<String>,
    /// SSIM flavour: global or windowed.
    #[arg(long, value_name = "MODE")]
    pub ssim: Option<String>,
    /// Label visiting order for move solvers: ascending or shuffled.
    #[arg(long, value_name = "ORDER")]
    pub order: Option<String>,
    /// Seed for noise and shuffled label orders.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    pub input: PathBuf,
    /// Noise level R; pepper and salt each get R/2.
    #[arg(long, value_name = "R")]
    pub noise: Option<f64>,
    /// Output PGM; the mask goes next to it as <stem>.mask.pgm.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "NAME")]
    pub method: Option<String>,
    /// Mask PGM (0 known, 255 missing) instead of min/max detection.
    #[arg(long, value_name = "PATH")]
    pub mask: Option<PathBuf>,
    /// Clean reference; when given PSNR and SSIM are printed.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    /// Output PGM; the trace goes next to it as <stem>.trace.csv.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub reference: PathBuf,
    pub restored: PathBuf,
    /// Print both SSIM flavours.
    #[arg(long)]
    pub verbose: bool,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
    /// Comma-separated noise levels (default 0.1,0.2,...,0.9).
    #[arg(long, value_name = "LIST")]
    pub levels: Option<String>,
    /// Comma-separated methods (default all six).
    #[arg(long, value_name = "LIST")]
    pub methods: Option<String>,
    /// Restrict each image to its central N x N block.
    #[arg(long, value_name = "N")]
    pub crop: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

#[derive(Debug, Args)]
pub struct SuperresArgs {
    pub input: PathBuf,
    #[arg(long, value_name = "N")]
    pub factor: Option<usize>,
    #[arg(long, value_name = "NAME")]
    pub method: Option<String>,
    /// High-resolution reference; when given PSNR and SSIM are printed.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonFlags,
}

/// Effective settings after merging flags, settings file and defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub params: ModelParams,
    pub label_stride: usize,
    pub max_cycles: Option<usize>,
    pub init: InitStrategy,
    pub ssim: SsimMode,
    pub order: LabelOrder,
    pub seed: u64,
    pub file: ConfigFile,
}

fn integral(name: &str, v: f64) -> Result<u32, CliError> {
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
        Ok(v as u32)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be a non-negative integer, got {v}"
        )))
    }
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.parsed(key),
    }
}

fn parse_named<T: FromStr>(
    raw: Option<String>,
    file: &ConfigFile,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let raw = match raw {
        Some(v) => Some(v),
        None => file.get(key).map(str::to_string),
    };
    raw.map(|v| v.parse::<T>().map_err(|e| CliError::Usage(e.to_string())))
        .transpose()
}

impl CommonFlags {
    pub fn resolve(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let defaults = ModelParams::default();
        let lambda = match pick(self.lambda, &file, "lambda")? {
            Some(v) => integral("lambda", v)?,
            None => defaults.lambda,
        };
        let v_max = match pick(self.vmax, &file, "vmax")? {
            Some(v) => integral("vmax", v)?,
            None => defaults.v_max,
        };
        let exponent = pick(self.k, &file, "k")?.unwrap_or(defaults.exponent);
        if exponent != 1 && exponent != 2 {
            return Err(CliError::Usage(format!(
                "--k must be 1 or 2, got {exponent}"
            )));
        }
        let stride = pick(self.label_stride, &file, "label_stride")?.unwrap_or(1);
        let labels = LabelSet::strided(stride).map_err(|e| CliError::Usage(e.to_string()))?;
        let max_cycles = pick(self.max_cycles, &file, "max_cycles")?;
        if max_cycles == Some(0) {
            return Err(CliError::Usage("--max-cycles must be at least 1".into()));
        }
        let init =
            parse_named::<InitStrategy>(self.init.clone(), &file, "init")?.unwrap_or_default();
        let ssim = parse_named::<SsimMode>(self.ssim.clone(), &file, "ssim")?.unwrap_or_default();
        let seed = pick(self.seed, &file, "seed")?.unwrap_or(0);
        let order = match parse_named::<String>(self.order.clone(), &file, "order")?.as_deref() {
            None | Some("ascending") => LabelOrder::Ascending,
            Some("shuffled") => LabelOrder::Shuffled { seed },
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "unknown order '{other}' (expected ascending or shuffled)"
                )))
            }
        };
        Ok(Settings {
            params: ModelParams {
                lambda,
                exponent,
                v_max,
                labels,
            },
            label_stride: stride,
            max_cycles,
            init,
            ssim,
            order,
            seed,
            file,
        })
    }
}

impl Settings {
    pub fn solver_config(&self, method: Method) -> SolverConfig {
        let mut cfg = method.default_config();
        if let Some(n) = self.max_cycles {
            cfg.max_cycles = n;
        }
        cfg.label_order = self.order;
        cfg
    }

    /// Method from the flag, else the settings file, else expansion.
    pub fn method(&self, flag: Option<&str>) -> Result<Method, CliError> {
        match flag.or(self.file.get("method")) {
            Some(name) => Ok(name.parse::<Method>()?),
            None => Ok(Method::Expansion),
        }
    }
}

/// Splits a comma-separated list, dropping blanks.
pub fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect()
}
