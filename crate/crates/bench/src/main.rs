use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sclplan::controller::{GoalRefresh, Mode};
use sclplan::pddl::{ground, parse_domain, parse_problem, validate_plan};
use sclplan::search::{solve, solve_traced, SearchConfig, SolveOutcome};
use sclplan_bench::metrics::{delta_report, read_csv};
use sclplan_bench::runner::{run_suite, BackendSpec, RunConfig};

#[derive(Parser)]
#[command(name = "sclplan", version, about = "Hybrid symbolic/LLM household task planner benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a task suite and write metric tables and transcripts.
    Run {
        #[arg(long)]
        suite: String,
        /// One or more of react, react-pv, sclplan, symbolic (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        mode: Vec<Mode>,
        /// scripted:PATH, record:PATH[@INNER], live or emulated:weak|medium|strong.
        /// `{mode}` in a path is replaced by the mode name.
        #[arg(long)]
        backend: BackendSpec,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of tasks sampled (default: 10 with repeats, else all).
        #[arg(long)]
        sample: Option<usize>,
        /// Run only these tasks (comma separated).
        #[arg(long, value_delimiter = ',')]
        tasks: Option<Vec<String>>,
        /// Use the repeat index in completion fingerprints.
        #[arg(long)]
        stochastic: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "on-failure")]
        goal_refresh: RefreshArg,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Print signed metric differences between two metrics.csv files.
    Report {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Parse a PDDL domain and summarise it.
    ValidateDomain { file: PathBuf },
    /// Solve a PDDL problem and validate the plan.
    Solve {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        /// Print one line per node expansion to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 2)]
        width: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RefreshArg {
    Cache,
    OnFailure,
    EveryIteration,
}

impl From<RefreshArg> for GoalRefresh {
    fn from(r: RefreshArg) -> Self {
        match r {
            RefreshArg::Cache => GoalRefresh::Cache,
            RefreshArg::OnFailure => GoalRefresh::OnFailure,
            RefreshArg::EveryIteration => GoalRefresh::EveryIteration,
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { suite, mode, backend, repeats, seed, sample, tasks, stochastic, jobs, goal_refresh, max_steps, out } => {
            let mut cfg = RunConfig::new(&suite, mode, backend);
            cfg.repeats = repeats;
            cfg.seed = seed;
            cfg.sample = sample;
            cfg.tasks = tasks;
            cfg.stochastic = stochastic;
            cfg.jobs = jobs;
            cfg.goal_refresh = goal_refresh.into();
            cfg.max_steps = max_steps;
            let output = run_suite(&cfg)?;
            output.write(&out)?;
            print!("{}", std::fs::read_to_string(out.join("metrics.txt"))?);
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { baseline, candidate } => {
            let b = read_csv(&read(&baseline)?)?;
            let c = read_csv(&read(&candidate)?)?;
            print!("{}", delta_report(&b, &c));
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateDomain { file } => match parse_domain(&read(&file)?) {
            Ok(d) => {
                println!("domain {}: {} types, {} predicates, {} actions", d.name, d.types.len(), d.predicates.len(), d.actions.len());
                for a in &d.actions {
                    println!("  {:<16} {}", a.name, a.syntax);
                }
                Ok(ExitCode::SUCCESS)
            }
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                Ok(ExitCode::FAILURE)
            }
        },
        Command::Solve { domain, problem, trace, width } => {
            let d = parse_domain(&read(&domain)?).map_err(|e| anyhow::anyhow!("{}: {e}", domain.display()))?;
            let p = parse_problem(&read(&problem)?, &d).map_err(|e| anyhow::anyhow!("{}: {e}", problem.display()))?;
            let task = ground(&d, &p)?;
            let config = SearchConfig::default().with_width(width);
            let outcome = if trace { solve_traced(&task, &config, &mut std::io::stderr()) } else { solve(&task, &config) };
            match outcome {
                SolveOutcome::Solved(plan) => {
                    for &i in &plan.actions {
                        println!("{}", task.actions[i]);
                    }
                    let check = validate_plan(&task, &plan.actions);
                    println!("; cost {} ({})", plan.cost, if check.is_valid() { "valid" } else { "INVALID" });
                    Ok(if check.is_valid() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
                }
                SolveOutcome::Unsolvable => {
                    println!("; unsolvable");
                    Ok(ExitCode::FAILURE)
                }
                SolveOutcome::Budget(reason) => {
                    println!("; search budget exhausted: {reason:?}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
    }
}
