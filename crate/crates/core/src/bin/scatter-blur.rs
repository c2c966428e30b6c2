use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scatter_blur::cli_io::{
    cmd_blur, cmd_ess, cmd_kernel, cmd_separate, cmd_spectrum, EssSource, RunConfig, SpectrumGeometry,
};
use scatter_blur::spectral_diag::CIRCLE_RESIDUAL_TOL;
use scatter_blur::BlurError;

/// Blur scalar data measured at scattered points.
///
/// Exit codes: 0 success, 1 input/parse, 2 conditioning, 3 size guard,
/// 4 domain. Errors are printed to stderr as one line:
/// `error: code=<n> kind=<kind> <message>`.
#[derive(Parser, Debug)]
#[command(name = "scatter-blur", version, subcommand_required = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Settings {
    /// Operator length scale; 0 gives the identity.
    #[arg(long)]
    ell: Option<f64>,
    /// Operator exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Trapezoid step of the Gaussian-mixture quadrature.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    m_minus: Option<u32>,
    #[arg(long)]
    m_plus: Option<u32>,
    /// Standard deviation of the Gaussian RBF.
    #[arg(long)]
    rbf_sd: Option<f64>,
    /// Rescale so that the unit constant vector maps to norm 1.
    #[arg(long)]
    normalize: bool,
    /// Drop points closer than this to an already kept point.
    #[arg(long)]
    min_sep: Option<f64>,
    /// Remove a least-squares affine trend before separating scales.
    #[arg(long)]
    detrend: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative residual accepted from the RBF solve.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Treat the two coordinates as lon,lat degrees and project to km
    /// about LON,LAT.
    #[arg(long, value_name = "LON,LAT", value_parser = parse_center, allow_hyphen_values = true)]
    project_center: Option<(f64, f64)>,
}

impl Settings {
    fn resolve(&self, base: RunConfig) -> RunConfig {
        RunConfig {
            ell: self.ell.unwrap_or(base.ell),
            beta: self.beta.unwrap_or(base.beta),
            h: self.h.unwrap_or(base.h),
            m_minus: self.m_minus.unwrap_or(base.m_minus),
            m_plus: self.m_plus.unwrap_or(base.m_plus),
            rbf_sd: self.rbf_sd.unwrap_or(base.rbf_sd),
            normalize: self.normalize || base.normalize,
            min_sep: self.min_sep.unwrap_or(base.min_sep),
            detrend: self.detrend || base.detrend,
            seed: self.seed.unwrap_or(base.seed),
            projection: self.project_center.or(base.projection),
            residual_tol: self.residual_tol.unwrap_or(base.residual_tol),
        }
    }
}

fn parse_center(s: &str) -> Result<(f64, f64), String> {
    let (lon, lat) = s.split_once(',').ok_or("expected LON,LAT")?;
    let lon = lon.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let lat = lat.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lon, lat))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the input columns plus `blurred`.
    #[command(allow_negative_numbers = true)]
    Blur {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Write the input columns plus `large`, `small` and `trend_removed`.
    #[command(allow_negative_numbers = true)]
    Separate {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Circulant spectrum on equally spaced points on a circle.
    ///
    /// Defaults: 100 unit-spaced points, ell 1, beta 1, RBF standard
    /// deviation 2.5, residual tolerance 1e-3.
    #[command(allow_negative_numbers = true)]
    Spectrum {
        output: PathBuf,
        /// Points on the built-in circle.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        /// Use the coordinates of this CSV instead of the built-in circle.
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Effective sample size of SIR weights over a list of ell values.
    #[command(allow_negative_numbers = true)]
    Ess {
        output: PathBuf,
        /// Comma-separated ell values.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4")]
        ells: Vec<f64>,
        #[arg(long, default_value_t = 90)]
        n_obs: usize,
        #[arg(long, default_value_t = 80)]
        members: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Observation CSV (`x.., value[, sd]`); requires --ensemble.
        #[arg(long, requires = "ensemble")]
        obs: Option<PathBuf>,
        /// Ensemble CSV: one column per member, rows aligned with --obs.
        #[arg(long, requires = "obs")]
        ensemble: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Write the Gaussian-mixture Green's function as `c,rho` rows.
    #[command(allow_negative_numbers = true)]
    Kernel {
        output: PathBuf,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Also write the Fourier-space error profile here.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 49.0)]
        k_max: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[command(flatten)]
        settings: Settings,
    },
}

fn run(cli: Cli) -> scatter_blur::Result<()> {
    match cli.command {
        Command::Blur { input, output, settings } => cmd_blur(&settings.resolve(RunConfig::default()), &input, &output),
        Command::Separate { input, output, settings } => {
            cmd_separate(&settings.resolve(RunConfig::default()), &input, &output)
        }
        Command::Spectrum { output, n, spacing, geometry, settings } => {
            let base = RunConfig { rbf_sd: 2.5, residual_tol: CIRCLE_RESIDUAL_TOL, ..RunConfig::default() };
            let geometry = match geometry {
                Some(path) => SpectrumGeometry::File(path),
                None => SpectrumGeometry::Circle { n, spacing },
            };
            cmd_spectrum(&settings.resolve(base), &geometry, &output)
        }
        Command::Ess { output, ells, n_obs, members, trials, obs, ensemble, settings } => {
            let source = match (obs, ensemble) {
                (Some(obs), Some(members)) => EssSource::Files { obs, members },
                _ => EssSource::Synthetic { n_obs, n_members: members, trials },
            };
            cmd_ess(&settings.resolve(RunConfig::default()), &source, &ells, &output)
        }
        Command::Kernel { output, dim, profile, k_max, samples, settings } => {
            let cfg = settings.resolve(RunConfig::default());
            cmd_kernel(&cfg, dim, &output, profile.as_deref().map(|p| (p, k_max, samples)))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let text = e.to_string();
            let words: Vec<&str> = text
                .lines()
                .take_while(|l| !l.trim_start().starts_with("Usage:") && !l.trim_start().starts_with("tip:"))
                .flat_map(str::split_whitespace)
                .collect();
            let msg = words.join(" ");
            eprintln!("error: code=1 kind=usage {}", msg.strip_prefix("error: ").unwrap_or(&msg));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &BlurError) {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error: code={} kind={} {msg}", e.exit_code(), e.kind());
}
