use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_perf::channel::{CascadedLink, Parameterization, RicianParams};
use ris_perf::performance::{CsiArgument, Modulation};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "ris-perf",
    version,
    about = "Error rate and capacity of RIS-assisted links over cascaded Rician fading"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Gamma approximation of the sum amplitude and its moments.
    Params(ParamsArgs),
    /// Evaluate every metric over an SNR grid and emit CSV.
    Sweep(SweepArgs),
    /// Emit the data behind one of the three standard figures.
    Figure(FigureArgs),
    /// Compare closed forms, quadrature and Monte Carlo over a grid.
    Validate(ValidateArgs),
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive and finite"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not finite"))
    }
}

/// Per-hop scale: either a fixed mean power or a fixed scatter variance.
#[derive(Debug, Clone, Args)]
pub struct ScaleArgs {
    /// Mean power of the first hop; selects the fixed-Ω parameterization.
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub omega1: Option<f64>,
    /// Mean power of the second hop; selects the fixed-Ω parameterization.
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub omega2: Option<f64>,
    /// Scatter variance per quadrature component, shared by both hops.
    #[arg(long, value_parser = positive, allow_negative_numbers = true,
          conflicts_with_all = ["omega1", "omega2"])]
    pub sigma2: Option<f64>,
}

impl ScaleArgs {
    pub const DEFAULT_SIGMA2: f64 = 0.5;

    pub fn hops(&self, k1: f64, k2: f64) -> Result<(RicianParams, RicianParams), CliError> {
        let (p, s1, s2) = if self.omega1.is_some() || self.omega2.is_some() {
            (Parameterization::FixOmega, self.omega1.unwrap_or(1.0), self.omega2.unwrap_or(1.0))
        } else {
            let s = self.sigma2.unwrap_or(Self::DEFAULT_SIGMA2);
            (Parameterization::FixSigma2, s, s)
        };
        Ok((p.hop(k1, s1).map_err(CliError::usage)?, p.hop(k2, s2).map_err(CliError::usage)?))
    }

    pub fn describe(&self) -> String {
        if self.omega1.is_some() || self.omega2.is_some() {
            format!(
                "omega1={} omega2={}",
                self.omega1.unwrap_or(1.0),
                self.omega2.unwrap_or(1.0)
            )
        } else {
            format!("sigma2={}", self.sigma2.unwrap_or(Self::DEFAULT_SIGMA2))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Rician factor of the source-to-surface hop.
    #[arg(long, default_value_t = 1.0, value_parser = non_negative, allow_negative_numbers = true)]
    pub k1: f64,
    /// Rician factor of the surface-to-destination hop.
    #[arg(long, default_value_t = 1.0, value_parser = non_negative, allow_negative_numbers = true)]
    pub k2: f64,
    /// Number of surface elements.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    #[command(flatten)]
    pub scale: ScaleArgs,
}

impl LinkArgs {
    pub fn link(&self) -> Result<CascadedLink, CliError> {
        let (h1, h2) = self.scale.hops(self.k1, self.k2)?;
        CascadedLink::new(h1, h2, self.n).map_err(CliError::usage)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// First average SNR of the sweep, dB.
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub snr_db_start: f64,
    /// Last average SNR of the sweep, dB (inclusive).
    #[arg(long, default_value_t = 20.0, value_parser = finite, allow_negative_numbers = true)]
    pub snr_db_stop: f64,
    /// Grid spacing, dB.
    #[arg(long, default_value_t = 1.0, value_parser = positive, allow_negative_numbers = true)]
    pub snr_db_step: f64,
}

impl GridArgs {
    /// Grid points from start to stop inclusive, rounded to 1e-9 dB so that
    /// decimal steps print cleanly.
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let (start, stop, step) = (self.snr_db_start, self.snr_db_stop, self.snr_db_step);
        if start > stop {
            return Err(CliError::Usage(format!("--snr-db-start {start} exceeds --snr-db-stop {stop}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(CliError::Usage(format!("{count} grid points is too many")));
        }
        Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModulationKind {
    Bpsk,
    Qpsk,
    /// Error kernel `p Q(√(2qγ))` with `--p` and `--q`.
    Custom,
}

#[derive(Debug, Clone, Args)]
pub struct ModulationArgs {
    #[arg(long, value_enum, default_value_t = ModulationKind::Bpsk)]
    pub modulation: ModulationKind,
    /// Error-kernel multiplier for `--modulation custom`.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Error-kernel SNR scale for `--modulation custom`.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
}

impl ModulationArgs {
    pub fn modulation(&self) -> Result<Modulation, CliError> {
        match (self.modulation, self.p, self.q) {
            (ModulationKind::Custom, Some(p), Some(q)) => Modulation::new(p, q).map_err(CliError::usage),
            (ModulationKind::Custom, _, _) => {
                Err(CliError::Usage("--modulation custom needs both --p and --q".into()))
            }
            (_, None, None) => Ok(if self.modulation == ModulationKind::Bpsk {
                Modulation::BPSK
            } else {
                Modulation::QPSK
            }),
            _ => Err(CliError::Usage("--p and --q apply only to --modulation custom".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CsiArg {
    /// `4γ̄b²/γ₀`
    Corrected,
    /// `4b²/γ₀`
    Literal,
}

impl From<CsiArg> for CsiArgument {
    fn from(a: CsiArg) -> Self {
        match a {
            CsiArg::Corrected => CsiArgument::Corrected,
            CsiArg::Literal => CsiArgument::Literal,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub link: LinkArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub modulation: ModulationArgs,
    /// Monte-Carlo trials per grid point; omit to skip simulation.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub mc_trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    /// Argument of the water-filling capacity closed form.
    #[arg(long, value_enum, default_value_t = CsiArg::Corrected)]
    pub csi_argument: CsiArg,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render capacity curves as SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Fail with exit code 3 if a closed form strays from quadrature by 1e-5.
    #[arg(long)]
    pub strict: bool,
    /// Shift the first lower Meijer G parameter of every closed form.
    #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb_meijer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    /// ASEP versus SNR, N = 5, K = 1, three scatter variances.
    Fig2,
    /// Capacity with and without CSI, N = 2, four Rician factors.
    Fig3,
    /// As fig3 with N = 5.
    Fig4,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub name: FigureName,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub modulation: ModulationArgs,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    #[arg(long, value_enum, default_value_t = CsiArg::Corrected)]
    pub csi_argument: CsiArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    pub modulation: ModulationArgs,
    /// Element counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 5],
          value_parser = clap::value_parser!(u32).range(1..))]
    pub grid_n: Vec<u32>,
    /// Rician factors (both hops), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 5.0, 10.0],
          value_parser = non_negative, allow_negative_numbers = true)]
    pub grid_k: Vec<f64>,
    /// Average SNRs in dB, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 5.0, 10.0, 15.0, 20.0],
          value_parser = finite, allow_negative_numbers = true)]
    pub grid_snr_db: Vec<f64>,
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub mc_trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    /// Exit with code 3 when no closed-form candidate tracks quadrature.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb_meijer: f64,
}
