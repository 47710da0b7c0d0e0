use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regprop::elements::OrbitElements;
use regprop_cli::config::{Config, Scenario};
use regprop_cli::output::write_json;
use regprop_cli::transition::{self, Method};
use regprop_cli::verify::{parse_suites, run_suites, thread_limit};
use regprop_cli::{elements, propagate, CliError, CliResult};

#[derive(Parser)]
#[command(name = "regprop", version, about = "Regularized orbit propagation in projective coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a scenario and write trajectory, Cartesian, periapsis and drift files
    Propagate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output.dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite (roundtrip, conservation, closedform, stm, symplectic, j2 or all)
    Verify {
        #[arg(long)]
        suite: String,
        /// Write the per-check report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// State transition matrix in (q, p, u, w) from the scenario's initial state
    Stm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, conflicts_with = "variational")]
        closed_form: bool,
        #[arg(long)]
        variational: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert between classical elements (degrees) and a Cartesian state
    Elements(ElementsArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("direction").required(true).args(["to_cartesian", "to_elements"]))]
struct ElementsArgs {
    #[arg(long, requires_all = ["a", "e"])]
    to_cartesian: bool,
    #[arg(long, requires_all = ["r", "v"])]
    to_elements: bool,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long)]
    e: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    i: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    omega: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    raan: f64,
    /// True anomaly
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    f: f64,
    /// Position as x,y,z
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Option<Vec<f64>>,
    /// Velocity as vx,vy,vz
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    v: Option<Vec<f64>>,
    /// Gravitational parameter
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
}

fn triple(name: &str, v: Option<&[f64]>) -> CliResult<[f64; 3]> {
    match v {
        Some(&[x, y, z]) => Ok([x, y, z]),
        _ => Err(CliError::Config(format!("--{name} takes three comma-separated values"))),
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Propagate { config, out } => {
            let s = Scenario::from_config(&Config::load(&config)?)?;
            let dir = out.unwrap_or_else(|| s.output.dir.clone());
            let prop = propagate::propagate(&s)?;
            prop.write(&s, &dir)?;
            println!("{}: {} steps, {} periapsis passages, output in {}", s.name, prop.rows.len(), prop.periapses.len(), dir.display());
            if !prop.drift.is_empty() {
                println!("max |q|-1 drift {:.3e}, max lambda drift {:.3e}", prop.drift.max_q_drift, prop.drift.max_lambda_drift);
            }
            Ok(true)
        }
        Command::Verify { suite, json } => {
            let suites = parse_suites(&suite)?;
            let checks = run_suites(&suites, thread_limit()?)?;
            for c in &checks {
                println!("{:<4} {:<55} {:.3e} (tolerance {:.0e})", if c.pass { "ok" } else { "FAIL" }, c.name, c.residual, c.tolerance);
            }
            if let Some(path) = json {
                write_json(&path, &checks)?;
            }
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::Stm { config, tau, closed_form: _, variational, out } => {
            let s = Scenario::from_config(&Config::load(&config)?)?;
            let method = if variational { Method::Variational } else { Method::ClosedForm };
            let stm = transition::compute(&s, tau, method)?;
            let path = transition::write(&stm, &s, &out.unwrap_or_else(|| s.output.dir.clone()))?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Elements(a) => {
            let text = if a.to_cartesian {
                let el = OrbitElements {
                    a: a.a.unwrap_or_default(),
                    e: a.e.unwrap_or_default(),
                    i: a.i,
                    omega_arg: a.omega,
                    raan: a.raan,
                    true_anomaly: a.f,
                };
                elements::to_cartesian(&el, a.mu)?
            } else {
                elements::to_elements(triple("r", a.r.as_deref())?, triple("v", a.v.as_deref())?, a.mu)?
            };
            print!("{text}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("regprop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
