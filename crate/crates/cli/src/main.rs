//! `scoper`: scope planning tasks, report sizes, cross-check with the
//! oracle planner and time external planners.
//!
//! Exit codes: 0 success, 1 any other failure (missing file, parse error,
//! verification FAIL), 2 unsupported feature, 3 CNF blow-up.

mod bench;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use regex::Regex;
use scoper_core::emit::stats;
use scoper_core::logic::DEFAULT_CLAUSE_CAP;
use scoper_core::oracle::{solve, SearchLimits, SolveOutcome};
use scoper_core::par::{self, Exec};
use scoper_core::pddl::{GroundOptions, PddlError, DEFAULT_MAX_ACTIONS};
use scoper_core::sas::SasError;
use scoper_core::scoping::{ScopeError, ScopeOptions};
use scoper_core::synth::{micro_batch, MicroConfig};
use scoper_core::verify::{verify, Checks, VerifyReport};

use input::Format;

#[derive(Parser)]
#[command(name = "scoper", version, about = "Task scoping for grounded planning problems")]
struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scope a task and write the pruned files plus a report.
    Scope {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        out: PathBuf,
        /// Report path; defaults to OUT/report.json.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the scoping report without writing files.
    Stats {
        #[command(flatten)]
        task: TaskArgs,
        /// Sizes of the unscoped task only.
        #[arg(long)]
        no_scope: bool,
    },
    /// Check a scoping result against the oracle planner.
    Verify {
        #[command(flatten)]
        task: OptionalTaskArgs,
        /// Check K random micro problems instead of a file.
        #[arg(long, value_name = "K")]
        random: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        /// Ignore side effects when scoping and skip structural checks.
        #[arg(long)]
        mutate: bool,
        /// Print one JSON object per instance.
        #[arg(long)]
        json: bool,
    },
    /// Solve a task optimally with the built-in oracle planner.
    Plan {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
    },
    /// Time an external planner on original and scoped tasks.
    Bench {
        /// Command with {domain} {problem} or {sas} placeholders, run by sh.
        #[arg(long)]
        planner_cmd: String,
        /// Lines `pddl DOMAIN PROBLEM` or `sas FILE`.
        #[arg(long)]
        tasks: PathBuf,
        /// Line-delimited JSON records.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Seconds per planner run.
        #[arg(long, default_value_t = 1800.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Regex whose first group is the plan cost in planner output.
        #[arg(long)]
        cost_regex: Option<String>,
        /// Where scoped files go; defaults to OUT.work.
        #[arg(long)]
        work_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CLAUSE_CAP)]
        clause_cap: usize,
    },
}

#[derive(Args)]
struct TaskArgs {
    #[arg(long, value_enum)]
    format: Format,
    /// PDDL domain, or the SAS+ file.
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CLAUSE_CAP)]
    clause_cap: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ACTIONS)]
    max_actions: usize,
}

#[derive(Args)]
struct OptionalTaskArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CLAUSE_CAP)]
    clause_cap: usize,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(p) = cause.downcast_ref::<PddlError>() {
            if matches!(p, PddlError::UnsupportedFeature(_)) {
                return 2;
            }
        }
        if let Some(s) = cause.downcast_ref::<SasError>() {
            if matches!(s, SasError::UnsupportedVersion(_) | SasError::AxiomsUnsupported(_) | SasError::UnsupportedFeature(_)) {
                return 2;
            }
        }
        if let Some(ScopeError::Cnf(_)) = cause.downcast_ref::<ScopeError>() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SCOPER_LOG", "info")).format_timestamp(None).init();
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match run(cli.command, exec) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn options(clause_cap: usize, max_actions: usize, exec: Exec) -> (ScopeOptions, GroundOptions) {
    (ScopeOptions { clause_cap, exec, ..Default::default() }, GroundOptions { max_actions, exec })
}

fn run(cmd: Cmd, exec: Exec) -> Result<ExitCode> {
    match cmd {
        Cmd::Scope { task, out, report } => {
            let (sopts, gopts) = options(task.clause_cap, task.max_actions, exec);
            let mut loaded = input::load(task.format, &task.domain, task.problem.as_deref(), &gopts)?;
            let result = input::scope(&mut loaded, &sopts)?;
            let name = task.domain.file_name().map_or("output.sas".into(), |n| n.to_string_lossy().into_owned());
            let written = input::write_scoped(&mut loaded, &result, &out, &name, &gopts)?;
            let r = input::report(&loaded, &result);
            let report = report.unwrap_or_else(|| out.join("report.json"));
            std::fs::write(&report, r.to_json() + "\n").map_err(|e| anyhow::anyhow!("cannot write {}: {e}", report.display()))?;
            for p in written {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", report.display());
            println!("kept {} of {} actions", r.actions.kept, r.actions.kept + r.actions.deleted);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Stats { task, no_scope } => {
            let (sopts, gopts) = options(task.clause_cap, task.max_actions, exec);
            let mut loaded = input::load(task.format, &task.domain, task.problem.as_deref(), &gopts)?;
            let r = if no_scope {
                let mut r = stats(loaded.problem(), None);
                r.timings_ms = loaded.timings.clone();
                r
            } else {
                let result = input::scope(&mut loaded, &sopts)?;
                input::report(&loaded, &result)
            };
            println!("{}", r.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { task, random, seed, max_states, mutate, json } => {
            let opts = ScopeOptions { clause_cap: task.clause_cap, exec, ignore_side_effects: mutate };
            let limits = SearchLimits { max_expanded_states: max_states, ..Default::default() };
            let checks = if mutate { Checks::OracleOnly } else { Checks::All };
            let problems = match (random, task.format, task.domain) {
                (Some(k), None, None) => micro_batch(seed, k, &MicroConfig::default()),
                (None, Some(format), Some(domain)) => {
                    let (_, gopts) = options(task.clause_cap, DEFAULT_MAX_ACTIONS, exec);
                    vec![input::load(format, &domain, task.problem.as_deref(), &gopts)?.problem().clone()]
                }
                _ => bail!("give either --random K or --format with --domain"),
            };
            // instances run in parallel, each search on one thread
            let inner = ScopeOptions { exec: Exec::Sequential, ..opts };
            let reports: Vec<VerifyReport> = par::map(exec, &problems, |pp| verify(pp, &inner, &limits, checks));
            let (mut pass, mut fail, mut inconclusive) = (0, 0, 0);
            for (i, r) in reports.iter().enumerate() {
                if json {
                    println!("{}", serde_json::json!({ "instance": i, "report": r }));
                } else {
                    let costs = match (&r.original_cost, &r.reduced_cost) {
                        (Some(a), Some(b)) => format!(" [cost {a} / {b}]"),
                        _ => String::new(),
                    };
                    println!("instance {i}: {}{costs}", r.verdict);
                }
                match () {
                    _ if r.verdict.is_pass() => pass += 1,
                    _ if r.verdict.is_fail() => fail += 1,
                    _ => inconclusive += 1,
                }
            }
            println!("{pass} PASS, {fail} FAIL, {inconclusive} INCONCLUSIVE");
            Ok(if fail == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Plan { task, max_states } => {
            let (_, gopts) = options(task.clause_cap, task.max_actions, exec);
            let loaded = input::load(task.format, &task.domain, task.problem.as_deref(), &gopts)?;
            let pp = loaded.problem();
            let limits = SearchLimits { max_expanded_states: max_states, ..Default::default() };
            match solve(pp, &limits)? {
                SolveOutcome::Solved(plan) => {
                    for a in &plan.actions {
                        println!("({a})");
                    }
                    println!("; cost: {}", plan.cost);
                    Ok(ExitCode::SUCCESS)
                }
                SolveOutcome::Unsolvable => bail!("no plan exists"),
                SolveOutcome::Inconclusive => bail!("search limit reached before a plan was found"),
            }
        }
        Cmd::Bench { planner_cmd, tasks, out, reps, timeout, jobs, cost_regex, work_dir, clause_cap } => {
            let specs = bench::read_tasks(&tasks)?;
            let (scope, ground) = options(clause_cap, DEFAULT_MAX_ACTIONS, exec);
            let cfg = bench::BenchConfig {
                template: planner_cmd,
                reps,
                timeout: Duration::from_secs_f64(timeout),
                jobs,
                cost_regex: cost_regex.as_deref().map(Regex::new).transpose()?,
                work_dir: work_dir.unwrap_or_else(|| out.with_extension("work")),
                scope,
                ground,
            };
            let records = bench::bench(&specs, &cfg, &out)?;
            println!("{:<32} {:<9} {:>3} {:>12} {:>12}", "task", "variant", "n", "mean s", "stddev s");
            for s in bench::summarize(&records) {
                println!("{:<32} {:<9} {:>3} {:>12.6} {:>12.6}", s.task, s.variant, s.n, s.mean, s.stddev);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
