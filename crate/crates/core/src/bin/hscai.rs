use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hscai::bench::{parse_values, run_sweep, to_csv, SweepSpec};
use hscai::message::MessageKind;
use hscai::model::{generate_random, GeneratorParams};
use hscai::{solve, AgentId, Algorithm, Error, Problem, SolverConfig, ThresholdSpec};

#[derive(Parser)]
#[command(name = "hscai", version, about = "Hybrid search + context-based inference DCOP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected instance as JSON.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one instance and print cost and metrics.
    Solve {
        /// Instance file; a generated instance when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Pseudo-tree root (1-based agent number).
        #[arg(long)]
        root: Option<usize>,
        /// Write the message trace (TSV) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the result as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run algorithms over a grid of generated instances and write CSV.
    Sweep {
        #[arg(long, default_value_t = 22)]
        agents: usize,
        /// Value, list `a,b` or range `a..b[:step]`.
        #[arg(long, default_value = "0.3")]
        density: String,
        #[arg(long, default_value_t = 3)]
        domain: usize,
        #[arg(long, default_value_t = 100)]
        max_cost: u64,
        /// Comma-separated algorithms.
        #[arg(long, default_value = "hs-cai,hs-ai,hs-cai-nm")]
        algo: String,
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Value, list or range; defaults by k.
        #[arg(long, conflicts_with = "t")]
        rho: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = 10)]
    agents: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 3)]
    domain: usize,
    #[arg(long, default_value_t = 100)]
    max_cost: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl InstanceArgs {
    fn generate(&self) -> Result<Problem, Error> {
        generate_random(GeneratorParams {
            agents: self.agents,
            density: self.density,
            domain_size: self.domain,
            max_cost: self.max_cost,
            seed: self.seed,
        })
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "hs-cai")]
    algo: String,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, conflicts_with = "t")]
    rho: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
}

/// Usage and configuration problems exit with 2, solver failures with 3.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BadConfig(_)
        | Error::InvalidProblem(_)
        | Error::DensityTooLow { .. }
        | Error::NotConnected
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 3,
    }
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => emit(text),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<(), Error> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn threshold(rho: Option<f64>, t: Option<f64>) -> ThresholdSpec {
    match (rho, t) {
        (_, Some(t)) => ThresholdSpec::T(t),
        (Some(r), None) => ThresholdSpec::Rho(r),
        (None, None) => ThresholdSpec::Default,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen { instance, out } => {
            let problem = instance.generate()?;
            write_or_print(out.as_ref(), &(problem.to_json() + "\n"))
        }
        Command::Solve { input, instance, solver, root, trace, out } => {
            let problem = match input {
                Some(path) => Problem::from_json(&fs::read_to_string(path)?)?,
                None => instance.generate()?,
            };
            let mut config = SolverConfig::new(solver.algo.parse()?, solver.k);
            config.threshold = threshold(solver.rho, solver.t);
            config.trace = trace.is_some();
            if let Some(r) = root {
                if r == 0 {
                    return Err(Error::BadConfig("agents are numbered from 1".into()));
                }
                config.root = Some(AgentId(r - 1));
            }
            let result = solve(&problem, &config)?;
            let m = &result.metrics;
            let mut report = String::new();
            let _ = writeln!(report, "cost\t{}", result.cost);
            let _ = writeln!(report, "assignment\t{}", result.assignment);
            let _ = writeln!(report, "messages\t{}", m.messages);
            let _ = writeln!(report, "network_load\t{}", m.network_load);
            let _ = writeln!(report, "nclo\t{}", m.nclo);
            for kind in MessageKind::ALL.into_iter().filter(|k| m.count(*k) > 0) {
                let _ = writeln!(report, "messages.{}\t{}", kind, m.count(kind));
            }
            emit(&report)?;
            if let (Some(path), Some(text)) = (trace.as_ref(), result.trace.as_ref()) {
                fs::write(path, text)?;
            }
            if let Some(path) = out {
                let json = serde_json::json!({
                    "algo": config.algorithm.name(),
                    "cost": result.cost,
                    "assignment": result.assignment.to_values(problem.agent_count())?,
                    "messages": m.messages,
                    "network_load": m.network_load,
                    "nclo": m.nclo,
                });
                fs::write(path, serde_json::to_string_pretty(&json)? + "\n")?;
            }
            Ok(())
        }
        Command::Sweep { agents, density, domain, max_cost, algo, k, rho, t, instances, seed, out } => {
            let algorithms = algo.split(',').map(|a| a.trim().parse()).collect::<Result<Vec<Algorithm>, _>>()?;
            let thresholds = match (rho, t) {
                (_, Some(t)) => vec![ThresholdSpec::T(t)],
                (Some(r), None) => parse_values(&r, 0.1)?.into_iter().map(ThresholdSpec::Rho).collect(),
                (None, None) => vec![ThresholdSpec::Default],
            };
            let spec = SweepSpec {
                agents,
                densities: parse_values(&density, 0.1)?,
                domain_size: domain,
                max_cost,
                algorithms,
                k,
                thresholds,
                instances,
                seed,
            };
            write_or_print(out.as_ref(), &to_csv(&run_sweep(&spec)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
