use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sysrel::bounds::{default_time_grid, uniform_grid, DEFAULT_GRID_POINTS};
use sysrel::io::{emit_curve_csv, parse_scenario_doc, what_if_bounds, write_what_if_csv, CsvExport};
use sysrel::lifetime::{elicit_y0_interval, mean_lifetime_from_scale, ObservationSet, PriorParams};
use sysrel::oracle::{mc_system_reliability, McConfig};
use sysrel::{
    check_coherence, component_predictive_bounds, compute_survival_signature, imprecision_curve, parse_observations_doc,
    parse_system_doc, reliability_bounds_curve, system_reliability_point, Error, SurvivalSignature, SystemDefinition,
    TimeScale, TypeSetup64, WeibullShape,
};

#[derive(Parser)]
#[command(name = "sysrel", version, about = "Robust Bayesian reliability bounds for coherent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GridArgs {
    /// Last time of the grid (default: t_now plus three upper mean lifetimes)
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    t_points: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Survival signature as CSV
    Signature {
        system: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that the structure function is monotone
    Coherence { system: PathBuf },
    /// Lower and upper system reliability over a time grid
    Bounds {
        system: PathBuf,
        /// Observations document (prior bounds when omitted)
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        /// Condition on the system working at t_now
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predictive reliability bounds for a single component type
    ComponentBounds {
        system: PathBuf,
        #[arg(long = "type")]
        type_name: String,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Last time of the grid (default: three upper mean lifetimes)
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        t_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper minus lower system reliability over a time grid
    Imprecision {
        system: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Scale::Elapsed)]
        scale: Scale,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map bounds on the mean lifetime to bounds on y0
    Elicit {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        mean_lo: f64,
        #[arg(long)]
        mean_hi: f64,
    },
    /// Posterior bounds under hypothetical data sets
    WhatIf {
        system: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo system reliability at one time for fixed priors
    Simulate {
        system: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Where in each prior box to fix (n0, y0)
        #[arg(long, value_enum, default_value_t = At::Center)]
        at: At,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Elapsed,
    Prospective,
}

#[derive(Clone, Copy, ValueEnum)]
enum At {
    Center,
    Lower,
    Upper,
}

enum Outcome {
    Done,
    Incoherent,
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<SystemDefinition, Error> {
    parse_system_doc(&read(path)?)
}

fn load_obs(def: &SystemDefinition, data: Option<&Path>) -> Result<Vec<ObservationSet<f64>>, Error> {
    match data {
        Some(p) => parse_observations_doc(&read(p)?, &def.model),
        None => Ok(def.model.types().iter().map(|d| ObservationSet::none(d.count)).collect()),
    }
}

fn coherent_signature(def: &SystemDefinition) -> Result<SurvivalSignature, Error> {
    let report = check_coherence(&def.model);
    if !report.coherent {
        return Err(Error::Document(format!("bounds need a coherent system: {report}")));
    }
    compute_survival_signature(&def.model)
}

fn grid_for(setups: &[TypeSetup64], grid: &GridArgs) -> Result<Vec<f64>, Error> {
    match grid.t_max {
        None if grid.t_points == DEFAULT_GRID_POINTS => default_time_grid(setups),
        None => {
            let full = default_time_grid(setups)?;
            uniform_grid(full[0], full[full.len() - 1], grid.t_points)
        }
        Some(t_max) => {
            let t_now = setups.first().map(|s| s.obs.t_now()).unwrap_or(0.0);
            uniform_grid(t_now, t_max, grid.t_points)
        }
    }
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Result<(), Error> {
    match out {
        Some(p) => {
            let mut buf = Vec::new();
            write(&mut buf)?;
            fs::write(p, buf).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn emit_csv<C: CsvExport>(out: Option<&Path>, c: &C) -> Result<(), Error> {
    emit(out, |mut w| emit_curve_csv(c, &mut w))
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Signature { system, out } => {
            let def = load_system(&system)?;
            let sig = compute_survival_signature(&def.model)?;
            emit_csv(out.as_deref(), &sig)?;
        }
        Command::Coherence { system } => {
            let def = load_system(&system)?;
            let report = check_coherence(&def.model);
            println!("{report}");
            if !report.coherent {
                return Ok(Outcome::Incoherent);
            }
        }
        Command::Bounds {
            system,
            data,
            grid,
            normalize,
            out,
        } => {
            let def = load_system(&system)?;
            let sig = coherent_signature(&def)?;
            let setups = def.setups(load_obs(&def, data.as_deref())?)?;
            let times = grid_for(&setups, &grid)?;
            let curve = reliability_bounds_curve(&sig, &setups, &times, normalize)?;
            emit_csv(out.as_deref(), &curve)?;
        }
        Command::ComponentBounds {
            system,
            type_name,
            data,
            t_max,
            t_points,
            out,
        } => {
            let def = load_system(&system)?;
            let k = def
                .model
                .type_index(&type_name)
                .ok_or_else(|| Error::Document(format!("unknown component type `{type_name}`")))?;
            let shape = WeibullShape::new(def.model.types()[k].shape)?;
            let b = def.boxes[k];
            let obs = match data {
                Some(p) => Some(load_obs(&def, Some(&p))?.swap_remove(k)),
                None => None,
            };
            let t_max = match t_max {
                Some(t) => t,
                None => 3.0 * mean_lifetime_from_scale(shape, b.y0_hi)?,
            };
            let times = uniform_grid(0.0, t_max, t_points)?;
            let mut curve = component_predictive_bounds(shape, &b, obs.as_ref(), &times)?;
            curve.type_names = vec![type_name];
            emit_csv(out.as_deref(), &curve)?;
        }
        Command::Imprecision {
            system,
            data,
            scale,
            grid,
            normalize,
            out,
        } => {
            let def = load_system(&system)?;
            let sig = coherent_signature(&def)?;
            let setups = def.setups(load_obs(&def, data.as_deref())?)?;
            let times = grid_for(&setups, &grid)?;
            let curve = reliability_bounds_curve(&sig, &setups, &times, normalize)?;
            let scale = match scale {
                Scale::Elapsed => TimeScale::Elapsed,
                Scale::Prospective => TimeScale::Prospective,
            };
            emit_csv(out.as_deref(), &imprecision_curve(&curve, scale))?;
        }
        Command::Elicit { beta, mean_lo, mean_hi } => {
            let (lo, hi) = elicit_y0_interval(WeibullShape::new(beta)?, mean_lo, mean_hi)?;
            println!("y0_lo,y0_hi");
            println!("{},{}", sysrel::io::format_number(lo), sysrel::io::format_number(hi));
        }
        Command::WhatIf {
            system,
            scenario,
            normalize,
            out,
        } => {
            let def = load_system(&system)?;
            let sig = coherent_signature(&def)?;
            let set = parse_scenario_doc(&read(&scenario)?, &def.model)?;
            let rows = what_if_bounds(&def, &sig, &set, normalize)?;
            emit(out.as_deref(), |mut w| write_what_if_csv(&rows, &mut w))?;
        }
        Command::Simulate {
            system,
            data,
            t,
            samples,
            seed,
            at,
        } => {
            let def = load_system(&system)?;
            let setups = def.setups(load_obs(&def, data.as_deref())?)?;
            let inputs = setups
                .iter()
                .map(|s| {
                    let b = &s.prior_box;
                    let p = match at {
                        At::Center => b.center(),
                        At::Lower => PriorParams::new(b.n0_lo, b.y0_lo)?,
                        At::Upper => PriorParams::new(b.n0_hi, b.y0_hi)?,
                    };
                    Ok(s.with_prior(p))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let est = mc_system_reliability(&def.model, &inputs, t, &McConfig::new(samples, seed))?;
            let sig = compute_survival_signature(&def.model)?;
            let exact = system_reliability_point(&sig, &inputs, t)?;
            let f = sysrel::io::format_number;
            println!("t,estimate,std_error,samples,seed,closed_form");
            println!(
                "{},{},{},{},{},{}",
                f(t),
                f(est.estimate),
                f(est.std_error),
                est.samples,
                est.seed,
                f(exact)
            );
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Incoherent) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
