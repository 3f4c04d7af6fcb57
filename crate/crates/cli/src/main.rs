//! `qwscatter`: stationary states, sweeps, hitting moments and spectra of a
//! quantum walk scattering off a block of identical coins.
//!
//! Exit codes: 0 all verifications passed, 1 a verification failed,
//! 2 invalid arguments, 3 numerical failure.

mod args;
mod check;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use args::FrequencySpec;
use commands::{Failure, MomentArgs, Outcome};

#[derive(Parser)]
#[command(
    name = "qwscatter",
    version,
    about = "Quantum walk scattering off a block of coin impurities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Coin preset: identity, hadamard or rotation:<angle>
    #[arg(long)]
    coin: Option<String>,

    /// Coin entries a, b, c, d as re,im pairs (8 numbers)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coin_entries: Option<Vec<f64>>,

    /// Block length
    #[arg(long = "M")]
    m: Option<usize>,

    /// Block lengths lo:hi:factor (geometric) or lo:hi:+step (arithmetic)
    #[arg(long = "M-range")]
    m_range: Option<String>,

    /// Worker threads (default: available cores)
    #[arg(long)]
    jobs: Option<usize>,

    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Verification tolerance
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Clone)]
struct Freq {
    /// Single wavenumber; accepts forms like 1.2, pi/4, -2pi/3
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,

    /// Wavenumbers lo:hi:n, hi excluded
    #[arg(long, allow_hyphen_values = true)]
    k_grid: Option<String>,

    /// Designed frequency M theta = x pi + M^-alpha, given as x,alpha
    #[arg(long)]
    design: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-site stationary amplitudes from one or more routes
    Stationary {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        freq: Freq,
        /// Routes: closed, solve, iterate
        #[arg(long, default_value = "closed,solve")]
        route: String,
    },
    /// Rates, energies and asymptotic predictions over (M, k)
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        freq: Freq,
    },
    /// Hitting-time moments by direct summation and by quadrature
    Moments {
        #[command(flatten)]
        common: Common,
        /// Moment orders (0, 1, 2)
        #[arg(long = "m", value_delimiter = ',', default_value = "0,1")]
        orders: Vec<u32>,
        /// Steps of the direct summation
        #[arg(long, default_value_t = 4096)]
        horizon: usize,
        /// Starting quadrature points (power of two), doubled until converged
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Eigenvalues of the truncated evolution
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-route verification table
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        freq: Freq,
    },
}

fn run_in_pool(
    jobs: Option<usize>,
    f: impl FnOnce() -> Result<Outcome, Failure> + Send,
) -> Result<Outcome, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn coin_of(common: &Common) -> Result<qwscatter::Coin, Failure> {
    Ok(args::resolve_coin(
        common.coin.as_deref(),
        common.coin_entries.as_deref(),
    )?)
}

fn sizes_of(common: &Common) -> Result<Vec<usize>, Failure> {
    Ok(args::resolve_sizes(common.m, common.m_range.as_deref())?)
}

fn freqs_of(freq: &Freq) -> Result<FrequencySpec, Failure> {
    Ok(args::resolve_frequencies(
        freq.k.as_deref(),
        freq.k_grid.as_deref(),
        freq.design.as_deref(),
    )?)
}

fn tol_of(common: &Common, default: f64) -> Result<f64, Failure> {
    match common.tol {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(Failure::Usage(format!("--tol {t} must be positive"))),
    }
}

fn dispatch(command: Command) -> Result<(Outcome, Option<PathBuf>), Failure> {
    match command {
        Command::Stationary {
            common,
            freq,
            route,
        } => {
            let coin = coin_of(&common)?;
            let sizes = sizes_of(&common)?;
            let freqs = freqs_of(&freq)?;
            let routes = args::parse_routes(&route)?;
            let tol = tol_of(&common, 1e-8)?;
            let out = run_in_pool(common.jobs, || {
                commands::stationary(&coin, &sizes, &freqs, &routes, tol)
            })?;
            Ok((out, common.out))
        }
        Command::Sweep { common, freq } => {
            let coin = coin_of(&common)?;
            let sizes = sizes_of(&common)?;
            let freqs = freqs_of(&freq)?;
            let tol = tol_of(&common, 1e-9)?;
            let out = run_in_pool(common.jobs, || commands::sweep(&coin, &sizes, &freqs, tol))?;
            Ok((out, common.out))
        }
        Command::Moments {
            common,
            orders,
            horizon,
            grid,
        } => {
            let coin = coin_of(&common)?;
            let sizes = sizes_of(&common)?;
            let args = MomentArgs {
                orders,
                horizon,
                grid,
                tol: tol_of(&common, 1e-8)?,
            };
            let out = run_in_pool(common.jobs, || commands::moments(&coin, &sizes, &args))?;
            Ok((out, common.out))
        }
        Command::Spectrum { common } => {
            let coin = coin_of(&common)?;
            let sizes = sizes_of(&common)?;
            let out = run_in_pool(common.jobs, || commands::spectrum(&coin, &sizes))?;
            Ok((out, common.out))
        }
        Command::Check { common, freq } => {
            let coin = coin_of(&common)?;
            let sizes = match (common.m, common.m_range.as_deref()) {
                (None, None) => vec![1, 2, 3, 8],
                (m, r) => args::resolve_sizes(m, r)?,
            };
            let ks = match freqs_of(&freq) {
                Ok(FrequencySpec::Grid(ks)) => ks,
                Ok(FrequencySpec::Design { .. }) => {
                    return Err(Failure::Usage("check takes --k or --k-grid".into()));
                }
                Err(_) if freq.k.is_none() && freq.k_grid.is_none() && freq.design.is_none() => {
                    args::parse_k_grid("0:2pi:32")?
                }
                Err(e) => return Err(e),
            };
            let out = run_in_pool(common.jobs, || check::check(&coin, &sizes, &ks))?;
            Ok((out, common.out))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QWSCATTER_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok((outcome, path)) => {
            if let Err(e) = outcome.csv.emit(path.as_deref()) {
                error!("cannot write output: {e}");
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(3);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(match f {
                Failure::Usage(_) => 2,
                Failure::Numerical(_) => 3,
            })
        }
    }
}
