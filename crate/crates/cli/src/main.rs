//! `quasiriesz` command-line front end.
//!
//! Exit status: 0 when every verdict passes, 1 when one fails, 2 on
//! invalid input, 3 when a computation or write fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use quasiriesz::avdonin::Precision;
use quasiriesz::riesz::Perturbation;

use quasiriesz_cli::commands;
use quasiriesz_cli::config::{config_from_text, Command, RunConfig};

#[derive(Parser)]
#[command(name = "quasiriesz", version, about = "Quasicrystal exponential bases for multiband spectra")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Enumerate the node set block by block.
    Construct {
        #[command(flatten)]
        common: Common,
        /// Block range `lo:hi`.
        #[arg(long, default_value = "-100:100", value_parser = range, allow_hyphen_values = true)]
        n_range: (i64, i64),
    },
    /// Check the block identities, the boundedness witness and the
    /// separation, deviation and mean conditions.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Block range for the block identities; also the inner
        /// boundedness window.
        #[arg(long, default_value = "-10000:10000", value_parser = range, allow_hyphen_values = true)]
        n_range: (i64, i64),
        #[arg(long, default_value = "-100000:100000", value_parser = range, allow_hyphen_values = true)]
        bound_range: (i64, i64),
        /// Offsets `a` of the averaging windows.
        #[arg(long, default_value = "-100000:100000", value_parser = range, allow_hyphen_values = true)]
        a_range: (i64, i64),
        /// Largest averaging length on the 1, 2, 5, 10, … grid.
        #[arg(long, default_value_t = 10_000)]
        n_max: usize,
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
        /// Exact deviations where mes S has a representable reciprocal.
        #[arg(long)]
        exact: bool,
    },
    /// Finite-section Riesz bounds over growing windows.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "25,50,100", value_parser = radii)]
        radii: Radii,
        #[arg(long, value_enum, default_value = "none")]
        perturb: PerturbArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Reconstruct a random band-limited signal from its samples.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of kernels in the random signal.
        #[arg(long = "K", alias = "kernels", default_value_t = 40)]
        kernels: usize,
        #[arg(long, default_value_t = 20.0)]
        signal_radius: f64,
        #[arg(long, default_value_t = 30.0)]
        sample_radius: f64,
        #[arg(long, default_value_t = 10.0)]
        eval_radius: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Paired primal and dual sweeps with the boundary audit.
    Duality {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "25,50,100", value_parser = radii)]
        radii: Radii,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Lower end of the window `I = [a, a + mes S)`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        anchor: String,
    },
    /// Re-run from a configuration or from any artifact's provenance.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the recorded output directory.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Spectrum JSON file.
    #[arg(long)]
    spectrum: PathBuf,
    /// Output directory; without it the main JSON report goes to stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PerturbArg {
    None,
    AddNear,
    Remove,
}

type Radii = Vec<f64>;

fn range(s: &str) -> std::result::Result<(i64, i64), String> {
    quasiriesz::parse::int_range(s).map_err(|e| e.to_string())
}

fn radii(s: &str) -> std::result::Result<Radii, String> {
    quasiriesz::parse::radii(s).map_err(|e| e.to_string())
}

/// Marks failures caused by the input rather than the computation.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| InputError(e).into())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn base_config(command: Command, spectrum: &Path, out: Option<String>) -> Result<RunConfig> {
    let spectrum = quasiriesz::schema::parse_spectrum_file(&read(spectrum)?)
        .with_context(|| format!("parsing {}", spectrum.display()))?;
    Ok(RunConfig {
        command,
        spectrum,
        n_range: (-100, 100),
        bound_range: (-100_000, 100_000),
        a_range: (-100_000, 100_000),
        n_max: 10_000,
        required_margin: 0.1,
        radii: vec![25.0, 50.0, 100.0],
        perturb: Perturbation::None,
        seed: 7,
        kernels: 40,
        signal_radius: 20.0,
        sample_radius: 30.0,
        eval_radius: 10.0,
        grid_step: 0.01,
        tol: 1e-8,
        anchor: "0".into(),
        precision: Precision::Float,
        out,
    })
}

fn build_config(sub: Sub) -> Result<RunConfig> {
    let config = match sub {
        Sub::Construct { common, n_range } => {
            let mut c = base_config(Command::Construct, &common.spectrum, common.out)?;
            c.n_range = n_range;
            c.bound_range = (c.bound_range.0.min(n_range.0), c.bound_range.1.max(n_range.1));
            c
        }
        Sub::Verify { common, n_range, bound_range, a_range, n_max, margin, exact } => {
            let mut c = base_config(Command::Verify, &common.spectrum, common.out)?;
            c.n_range = n_range;
            c.bound_range = bound_range;
            c.a_range = a_range;
            c.n_max = n_max;
            c.required_margin = margin;
            c.precision = if exact { Precision::Exact } else { Precision::Float };
            c
        }
        Sub::Certify { common, radii, perturb, tol } => {
            let mut c = base_config(Command::Certify, &common.spectrum, common.out)?;
            c.radii = radii;
            c.perturb = match perturb {
                PerturbArg::None => Perturbation::None,
                PerturbArg::AddNear => Perturbation::AddNear,
                PerturbArg::Remove => Perturbation::Remove,
            };
            c.tol = tol;
            c
        }
        Sub::Reconstruct { common, seed, kernels, signal_radius, sample_radius, eval_radius, grid_step, tol } => {
            let mut c = base_config(Command::Reconstruct, &common.spectrum, common.out)?;
            c.seed = seed;
            c.kernels = kernels;
            c.signal_radius = signal_radius;
            c.sample_radius = sample_radius;
            c.eval_radius = eval_radius;
            c.grid_step = grid_step;
            c.tol = tol;
            c
        }
        Sub::Duality { common, radii, tol, anchor } => {
            let mut c = base_config(Command::Duality, &common.spectrum, common.out)?;
            c.radii = radii;
            c.tol = tol;
            c.anchor = anchor;
            c
        }
        Sub::Run { config, out } => {
            let mut c = config_from_text(&read(&config)?)?;
            if out.is_some() {
                c.out = out;
            }
            c
        }
    };
    config.validate()?;
    Ok(config)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QUASIRIESZ_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("QUASIRIESZ_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    input(configure_threads())?;
    let config = input(build_config(cli.command))?;
    let spectrum = input(config.spectrum.spectrum().map_err(anyhow::Error::from))?;
    let outcome = commands::run(&config, &spectrum)?;
    match &config.out {
        Some(dir) => {
            let dir = Path::new(dir);
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in &outcome.artifacts {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        None => {
            let main = outcome.artifacts.last().expect("every command emits a report");
            print!("{}", main.contents);
        }
    }
    eprintln!("{}: {}", config.command.name(), if outcome.pass { "pass" } else { "fail" });
    Ok(outcome.pass)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    use quasiriesz::Error as E;
    match err.downcast_ref::<E>() {
        Some(
            E::Parse(_)
            | E::InvalidInput(_)
            | E::NotIndicator { .. }
            | E::NotRepresentable(_)
            | E::InsufficientPrecision { .. }
            | E::DuplicateNode(_)
            | E::InsufficientWindow(_)
            | E::Json(_),
        ) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
