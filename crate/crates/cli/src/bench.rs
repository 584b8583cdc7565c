//! Timing an external planner on original and scoped tasks.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::input::{self, Format};
use scoper_core::pddl::GroundOptions;
use scoper_core::scoping::ScopeOptions;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BenchRecord {
    pub task: String,
    pub variant: String,
    pub rep: usize,
    pub planner_command: String,
    pub seconds: f64,
    /// `None` when the planner was killed or did not start.
    pub exit: Option<i32>,
    pub timed_out: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scoping_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub id: String,
    pub format: Format,
    pub domain: PathBuf,
    pub problem: Option<PathBuf>,
}

pub struct BenchConfig {
    pub template: String,
    pub reps: usize,
    pub timeout: Duration,
    pub jobs: usize,
    pub cost_regex: Option<Regex>,
    pub work_dir: PathBuf,
    pub scope: ScopeOptions,
    pub ground: GroundOptions,
}

/// Reads `pddl DOMAIN PROBLEM` and `sas FILE` lines; `#` starts a comment.
/// Relative paths are taken from the list's directory.
pub fn read_tasks(path: &Path) -> Result<Vec<TaskSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = vec![];
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let (format, domain, problem) = match words.as_slice() {
            ["pddl", d, p] => (Format::Pddl, base.join(d), Some(base.join(p))),
            ["sas", f] => (Format::Sas, base.join(f), None),
            _ => bail!("{}:{}: expected `pddl DOMAIN PROBLEM` or `sas FILE`", path.display(), n + 1),
        };
        let stem = problem.as_ref().unwrap_or(&domain).file_stem().map_or("task".into(), |s| s.to_string_lossy().into_owned());
        out.push(TaskSpec { id: format!("{}-{stem}", out.len() + 1), format, domain, problem });
    }
    Ok(out)
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

pub fn instantiate(template: &str, format: Format, domain: &Path, problem: Option<&Path>) -> String {
    let mut cmd = template.to_string();
    match format {
        Format::Pddl => {
            cmd = cmd.replace("{domain}", &quote(domain));
            if let Some(p) = problem {
                cmd = cmd.replace("{problem}", &quote(p));
            }
        }
        Format::Sas => cmd = cmd.replace("{sas}", &quote(domain)).replace("{domain}", &quote(domain)),
    }
    cmd
}

struct Run {
    seconds: f64,
    exit: Option<i32>,
    timed_out: bool,
    stdout: String,
    error: Option<String>,
}

fn run(cmd: &str, timeout: Duration) -> Run {
    let start = Instant::now();
    let mut command = Command::new("sh");
    command.arg("-c").arg(cmd).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null());
    #[cfg(unix)]
    std::os::unix::process::CommandExt::process_group(&mut command, 0);
    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => {
            return Run { seconds: 0.0, exit: None, timed_out: false, stdout: String::new(), error: Some(e.to_string()) };
        }
    };
    let mut pipe = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = pipe.read_to_string(&mut s);
        s
    });
    let mut pause = Duration::from_millis(1);
    let (status, timed_out) = loop {
        match child.try_wait() {
            Ok(Some(status)) => break (Some(status), false),
            Ok(None) if start.elapsed() >= timeout => {
                kill_group(&mut child);
                let _ = child.wait();
                break (None, true);
            }
            Ok(None) => {
                thread::sleep(pause);
                pause = (pause * 2).min(Duration::from_millis(20));
            }
            Err(e) => {
                let _ = child.kill();
                return Run { seconds: start.elapsed().as_secs_f64(), exit: None, timed_out: false, stdout: String::new(), error: Some(e.to_string()) };
            }
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let stdout = reader.join().unwrap_or_default();
    Run { seconds, exit: status.and_then(|s| s.code()), timed_out, stdout, error: None }
}

/// Kills the shell and everything it started.
fn kill_group(child: &mut std::process::Child) {
    #[cfg(unix)]
    let _ = Command::new("kill").args(["-s", "KILL", "--"]).arg(format!("-{}", child.id())).status();
    let _ = child.kill();
}

fn parse_cost(re: Option<&Regex>, stdout: &str) -> Option<f64> {
    let caps = re?.captures_iter(stdout).last()?;
    caps.get(1).or_else(|| caps.get(0))?.as_str().trim().parse().ok()
}

/// Scopes and emits one task, returning the scoped paths and the time
/// spent, emission included.
fn prepare_scoped(task: &TaskSpec, cfg: &BenchConfig) -> Result<(PathBuf, Option<PathBuf>, f64)> {
    let start = Instant::now();
    let mut loaded = input::load(task.format, &task.domain, task.problem.as_deref(), &cfg.ground)?;
    let result = input::scope(&mut loaded, &cfg.scope)?;
    let name = task.domain.file_name().map_or("output.sas".into(), |n| n.to_string_lossy().into_owned());
    let dir = cfg.work_dir.join(&task.id);
    let paths = input::write_scoped(&mut loaded, &result, &dir, &name, &cfg.ground)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(match task.format {
        Format::Pddl => (paths[0].clone(), Some(paths[1].clone()), seconds),
        Format::Sas => (paths[0].clone(), None, seconds),
    })
}

fn bench_task(task: &TaskSpec, cfg: &BenchConfig, sink: &Mutex<BufWriter<File>>) -> Result<()> {
    let emit = |r: BenchRecord| -> Result<()> {
        let mut w = sink.lock().expect("record writer");
        writeln!(w, "{}", serde_json::to_string(&r)?)?;
        w.flush()?;
        Ok(())
    };
    let record = |variant: &str, rep: usize, cmd: &str, run: Run, scoping: Option<f64>| BenchRecord {
        task: task.id.clone(),
        variant: variant.into(),
        rep,
        planner_command: cmd.into(),
        seconds: run.seconds,
        exit: run.exit,
        timed_out: run.timed_out,
        cost: parse_cost(cfg.cost_regex.as_ref(), &run.stdout),
        scoping_seconds: scoping,
        error: run.error,
    };

    let cmd = instantiate(&cfg.template, task.format, &task.domain, task.problem.as_deref());
    for rep in 0..cfg.reps {
        emit(record("original", rep, &cmd, run(&cmd, cfg.timeout), None))?;
    }
    match prepare_scoped(task, cfg) {
        Ok((d, p, scoping)) => {
            let cmd = instantiate(&cfg.template, task.format, &d, p.as_deref());
            for rep in 0..cfg.reps {
                emit(record("scoped", rep, &cmd, run(&cmd, cfg.timeout), Some(scoping)))?;
            }
        }
        Err(e) => {
            log::error!("task {}: scoping failed: {e:#}", task.id);
            for rep in 0..cfg.reps {
                let failed = Run { seconds: 0.0, exit: None, timed_out: false, stdout: String::new(), error: Some(format!("scoping failed: {e:#}")) };
                emit(record("scoped", rep, "", failed, None))?;
            }
        }
    }
    Ok(())
}

/// Runs every task; repetitions of one task are sequential, distinct tasks
/// share `cfg.jobs` workers.
pub fn bench(tasks: &[TaskSpec], cfg: &BenchConfig, out: &Path) -> Result<Vec<BenchRecord>> {
    fs::create_dir_all(&cfg.work_dir).with_context(|| format!("cannot create {}", cfg.work_dir.display()))?;
    let file = File::create(out).with_context(|| format!("cannot write {}", out.display()))?;
    let sink = Mutex::new(BufWriter::new(file));
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(vec![]);
    thread::scope(|s| {
        for _ in 0..cfg.jobs.max(1).min(tasks.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(task) = tasks.get(i) else { break };
                log::info!("benchmarking {}", task.id);
                if let Err(e) = bench_task(task, cfg, &sink) {
                    failures.lock().expect("failure list").push(format!("{}: {e:#}", task.id));
                }
            });
        }
    });
    let failures = failures.into_inner().expect("failure list");
    if !failures.is_empty() {
        bail!("could not record results: {}", failures.join("; "));
    }
    drop(sink);
    let text = fs::read_to_string(out)?;
    text.lines().map(|l| Ok(serde_json::from_str(l)?)).collect()
}

pub struct Summary {
    pub task: String,
    pub variant: String,
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
}

/// Mean and sample standard deviation of total time (scoping plus
/// planning) per task and variant, over runs that exited normally.
pub fn summarize(records: &[BenchRecord]) -> Vec<Summary> {
    let mut groups: std::collections::BTreeMap<(String, String), Vec<f64>> = Default::default();
    for r in records.iter().filter(|r| r.exit.is_some() && r.error.is_none()) {
        groups.entry((r.task.clone(), r.variant.clone())).or_default().push(r.seconds + r.scoping_seconds.unwrap_or(0.0));
    }
    groups
        .into_iter()
        .map(|((task, variant), xs)| {
            let n = xs.len();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
            Summary { task, variant, n, mean, stddev: var.sqrt() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_are_quoted() {
        let c = instantiate("plan {domain} {problem}", Format::Pddl, Path::new("/a b/d.pddl"), Some(Path::new("p.pddl")));
        assert_eq!(c, "plan '/a b/d.pddl' 'p.pddl'");
        assert_eq!(instantiate("fd {sas}", Format::Sas, Path::new("x.sas"), None), "fd 'x.sas'");
    }

    #[test]
    fn cost_from_last_match() {
        let re = Regex::new(r"cost\s*[:=]\s*([0-9.]+)").unwrap();
        assert_eq!(parse_cost(Some(&re), "cost: 3\nbetter cost = 2.5\n"), Some(2.5));
        assert_eq!(parse_cost(Some(&re), "no plan"), None);
        assert_eq!(parse_cost(None, "cost: 3"), None);
    }

    #[test]
    fn summary_statistics() {
        let r = |v: &str, s: f64, sc: Option<f64>| BenchRecord {
            task: "t".into(),
            variant: v.into(),
            rep: 0,
            planner_command: String::new(),
            seconds: s,
            exit: Some(0),
            timed_out: false,
            cost: None,
            scoping_seconds: sc,
            error: None,
        };
        let s = summarize(&[r("original", 1.0, None), r("original", 3.0, None), r("scoped", 0.5, Some(0.5))]);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].mean, s[0].stddev), (2.0, 2f64.sqrt()));
        assert_eq!((s[1].mean, s[1].n), (1.0, 1));
    }

    #[test]
    fn timeout_is_recorded() {
        let r = run("sleep 5", Duration::from_millis(100));
        assert!(r.timed_out && r.exit.is_none() && r.seconds < 2.0);
        let r = run("echo cost: 4; exit 3", Duration::from_secs(10));
        assert_eq!((r.exit, r.timed_out), (Some(3), false));
        assert!(r.stdout.contains("cost: 4"));
    }
}
