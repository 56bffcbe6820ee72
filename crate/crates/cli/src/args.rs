//! Flag definitions. Every subcommand's arguments serialize into the run
//! manifest, which is how `replay` reconstructs a run.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "levytail",
    version,
    about = "Power-tail diagnostics for jump-driven time series"
)]
pub struct Cli {
    /// Worker threads (falls back to LEVYTAIL_THREADS, then all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Draw i.i.d. jumps and write them one per line.
    Simulate(SimulateArgs),
    /// Distance curve α ↦ w̃ at one cutoff.
    Curve(CurveArgs),
    /// Distance curves over a cutoff grid, locus of minima and global best.
    Sweep(SweepArgs),
    /// Two-sided sweep with a combined summary of both tails.
    Analyze(SweepArgs),
    /// Monte Carlo convergence tables.
    Convergence(ConvergenceArgs),
    /// Path-space bound between two SDEs driven by Lévy noise.
    Bound(BoundArgs),
    /// Re-run a recorded manifest and compare output digests.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Curve(_) => "curve",
            Command::Sweep(_) => "sweep",
            Command::Analyze(_) => "analyze",
            Command::Convergence(_) => "convergence",
            Command::Bound(_) => "bound",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out_dir_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            Command::Simulate(a) => Some(&mut a.out_dir),
            Command::Curve(a) => Some(&mut a.data.out_dir),
            Command::Sweep(a) | Command::Analyze(a) => Some(&mut a.data.out_dir),
            Command::Convergence(a) => Some(&mut a.out_dir),
            Command::Bound(a) => Some(&mut a.out_dir),
            Command::Replay(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Powerlaw,
    Gaussian,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Dist::Powerlaw)]
    pub dist: Dist,
    /// Tail index of the power law.
    #[arg(long, value_parser = positive)]
    pub alpha0: Option<f64>,
    /// Lower end of the power-law support.
    #[arg(long, value_parser = positive, default_value_t = 0.5)]
    pub rho0: f64,
    /// Standard deviation of Gaussian jumps.
    #[arg(long, value_parser = positive)]
    pub sigma: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Also render a compound Poisson path with this jump intensity.
    #[arg(long, value_parser = positive)]
    pub intensity: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Pos,
    Neg,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IqrOf {
    /// Interquartile range of the increments.
    Increments,
    /// Interquartile range of the raw series.
    Series,
}

/// Ingestion and analysis flags shared by `curve` and `sweep`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// CSV file: headerless single column, or headered with --column.
    #[arg(long)]
    pub input: PathBuf,
    /// Column name, or 1-based column position.
    #[arg(long)]
    pub column: Option<String>,
    /// Values are already increments; skip differencing.
    #[arg(long)]
    pub increments_given: bool,
    /// Tail to analyse [default: pos; both for analyze].
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    /// Exponent grid as lo:hi:step.
    #[arg(long, default_value = "0.5:8:0.01")]
    pub alpha_grid: GridArg,
    /// Truncation level of the distance (`inf` disables truncation).
    #[arg(long, value_parser = positive_or_inf, default_value_t = 1.0)]
    pub s: f64,
    /// Keep the data in its own units instead of dividing by the IQR.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_enum, default_value_t = IqrOf::Increments)]
    pub iqr_of: IqrOf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Cutoff in (normalized) data units.
    #[arg(long, value_parser = positive)]
    pub rho: f64,
    /// Polish the grid minimum by golden-section search.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Cutoff grid as lo:hi:step; defaults to 40 log-spaced |x| quantiles in [0.5, 0.995].
    #[arg(long)]
    pub rho_grid: Option<GridArg>,
    /// Exceedance count below which a cutoff is flagged unreliable.
    #[arg(long, default_value_t = levytail::estimator::DEFAULT_MIN_POINTS)]
    pub min_points: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConvergenceArgs {
    #[arg(long, value_delimiter = ',', value_parser = positive, default_values_t = vec![1.4, 1.8, 3.0])]
    pub alpha0: Vec<f64>,
    #[arg(long, value_parser = positive, default_value_t = 0.5)]
    pub rho0: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 1_000, 10_000, 100_000])]
    pub n_list: Vec<usize>,
    /// Replications per sample size.
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    #[arg(long, value_parser = positive_or_inf, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_half_width: f64,
    #[arg(long, value_parser = positive, default_value_t = 0.01)]
    pub alpha_step: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    /// First jump measure, e.g. stable:1.4, stable:1.4:0.5:1, powerlaw:1.6:0.5:2,
    /// bounded:1.2:two, gaussian:1:3.
    #[arg(long)]
    pub jump1: JumpArg,
    #[arg(long)]
    pub jump2: JumpArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub drift1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub drift2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub diffusion1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub diffusion2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x2: f64,
    /// Lipschitz constant of the drift.
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub ell: f64,
    /// Intensity splitting small and large jumps.
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub lambda: f64,
    /// Also report the coupling distance over the default λ grid.
    #[arg(long)]
    pub coupling: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the replayed outputs (default: a `replay` directory
    /// next to the manifest).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// `lo:hi:step` inclusive linear grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridArg {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridArg {
    pub fn points(&self) -> levytail::Result<Vec<f64>> {
        levytail::numeric::linear_grid(self.lo, self.hi, self.step)
    }
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got `{s}`"));
        };
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{x}` is not a number"))
        };
        let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
        if !(lo > 0.0
            && lo.is_finite()
            && hi.is_finite()
            && hi >= lo
            && step > 0.0
            && step.is_finite())
        {
            return Err(format!("need 0 < lo <= hi and step > 0, got `{s}`"));
        }
        Ok(Self { lo, hi, step })
    }
}

impl std::fmt::Display for GridArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Jump measure given on the command line as `kind:param[:param...]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpArg {
    Stable {
        alpha: f64,
        c_minus: f64,
        c_plus: f64,
    },
    Powerlaw {
        alpha: f64,
        rho0: f64,
        intensity: f64,
    },
    Bounded {
        alpha: f64,
        two_sided: bool,
    },
    Gaussian {
        sigma: f64,
        intensity: f64,
    },
}

impl FromStr for JumpArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let num = |k: usize| -> Result<f64, String> {
            rest.get(k)
                .ok_or_else(|| format!("`{s}`: missing parameter {}", k + 1))?
                .parse::<f64>()
                .map_err(|_| format!("`{s}`: parameter {} is not a number", k + 1))
        };
        let arity = |lo: usize, hi: usize| {
            if rest.len() < lo || rest.len() > hi {
                Err(format!("`{s}`: {kind} takes {lo} to {hi} parameters"))
            } else {
                Ok(())
            }
        };
        match kind.as_str() {
            "stable" => {
                arity(1, 3)?;
                if rest.len() == 2 {
                    return Err(format!("`{s}`: give both tail weights or neither"));
                }
                let (c_minus, c_plus) = if rest.len() == 3 {
                    (num(1)?, num(2)?)
                } else {
                    (1.0, 1.0)
                };
                Ok(JumpArg::Stable {
                    alpha: num(0)?,
                    c_minus,
                    c_plus,
                })
            }
            "powerlaw" => {
                arity(2, 3)?;
                let intensity = if rest.len() == 3 { num(2)? } else { 1.0 };
                Ok(JumpArg::Powerlaw {
                    alpha: num(0)?,
                    rho0: num(1)?,
                    intensity,
                })
            }
            "bounded" => {
                arity(1, 2)?;
                let two_sided = match rest.get(1).copied() {
                    None | Some("two") => true,
                    Some("one") => false,
                    Some(other) => return Err(format!("`{s}`: expected one|two, got `{other}`")),
                };
                Ok(JumpArg::Bounded {
                    alpha: num(0)?,
                    two_sided,
                })
            }
            "gaussian" => {
                arity(2, 2)?;
                Ok(JumpArg::Gaussian {
                    sigma: num(0)?,
                    intensity: num(1)?,
                })
            }
            _ => Err(format!("`{s}`: unknown measure kind `{kind}`")),
        }
    }
}

impl std::fmt::Display for JumpArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            JumpArg::Stable {
                alpha,
                c_minus,
                c_plus,
            } => write!(f, "stable:{alpha}:{c_minus}:{c_plus}"),
            JumpArg::Powerlaw {
                alpha,
                rho0,
                intensity,
            } => write!(f, "powerlaw:{alpha}:{rho0}:{intensity}"),
            JumpArg::Bounded { alpha, two_sided } => {
                write!(
                    f,
                    "bounded:{alpha}:{}",
                    if two_sided { "two" } else { "one" }
                )
            }
            JumpArg::Gaussian { sigma, intensity } => write!(f, "gaussian:{sigma}:{intensity}"),
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        Ok(x) => Err(format!("must be finite and > 0, got {x}")),
        Err(_) => Err(format!("`{s}` is not a number")),
    }
}

fn positive_or_inf(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 => Ok(x),
        Ok(x) => Err(format!("must be > 0, got {x}")),
        Err(_) => Err(format!("`{s}` is not a number")),
    }
}
