//! Loading tasks from disk and running the scoping pipeline on them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use scoper_core::emit::{emit_pddl, emit_sas, stats, ScopeReport};
use scoper_core::model::PlanningProblem;
use scoper_core::pddl::{self, Domain, GroundOptions, GroundedTask, PddlError, Problem};
use scoper_core::sas::{self, SasTask};
use scoper_core::scoping::{scope_task, ScopeOptions, ScopeResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pddl,
    Sas,
}

pub enum Source {
    Pddl { domain: Domain, problem: Problem, task: Box<GroundedTask> },
    Sas { task: SasTask, problem: PlanningProblem },
}

pub struct Loaded {
    pub source: Source,
    pub timings: BTreeMap<String, f64>,
}

impl Loaded {
    pub fn problem(&self) -> &PlanningProblem {
        match &self.source {
            Source::Pddl { task, .. } => &task.problem,
            Source::Sas { problem, .. } => problem,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn located(path: &Path, e: PddlError) -> anyhow::Error {
    match e {
        PddlError::Parse { loc, message } => anyhow!("{}:{loc}: {message}", path.display()),
        other => anyhow::Error::new(other).context(path.display().to_string()),
    }
}

pub fn load(format: Format, domain: &Path, problem: Option<&Path>, ground: &GroundOptions) -> Result<Loaded> {
    let mut timings = BTreeMap::new();
    let source = match format {
        Format::Pddl => {
            let problem_path = problem.ok_or_else(|| anyhow!("--problem is required for PDDL input"))?;
            let (dt, pt) = (read(domain)?, read(problem_path)?);
            let t = Instant::now();
            let d = pddl::parse_domain(&dt).map_err(|e| located(domain, e))?;
            let p = pddl::parse_problem(&pt).map_err(|e| located(problem_path, e))?;
            timings.insert("parse".into(), ms(t));
            let t = Instant::now();
            let task = pddl::ground(&d, &p, ground).map_err(anyhow::Error::new)?;
            timings.insert("ground".into(), ms(t));
            Source::Pddl { domain: d, problem: p, task: Box::new(task) }
        }
        Format::Sas => {
            if problem.is_some() {
                bail!("SAS+ input takes a single file via --domain");
            }
            let text = read(domain)?;
            let t = Instant::now();
            let task = sas::parse_sas(&text).map_err(|e| anyhow::Error::new(e).context(domain.display().to_string()))?;
            let problem = sas::sas_to_problem(&task);
            timings.insert("parse".into(), ms(t));
            Source::Sas { task, problem }
        }
    };
    log::info!("loaded {} fluents, {} actions", problem_of(&source).fluents.len(), problem_of(&source).actions.len());
    Ok(Loaded { source, timings })
}

fn problem_of(s: &Source) -> &PlanningProblem {
    match s {
        Source::Pddl { task, .. } => &task.problem,
        Source::Sas { problem, .. } => problem,
    }
}

pub fn scope(loaded: &mut Loaded, opts: &ScopeOptions) -> Result<ScopeResult> {
    let t = Instant::now();
    let result = scope_task(loaded.problem(), opts)?;
    loaded.timings.insert("scope".into(), ms(t));
    log::info!(
        "scoped in {} iterations: {} relevant, {} causally linked, {} irrelevant fluents; {} of {} actions kept",
        result.iterations,
        result.j_rel.len(),
        result.j_cl.len(),
        result.j_irrel.len(),
        result.retained_actions.len(),
        loaded.problem().actions.len()
    );
    Ok(result)
}

pub fn report(loaded: &Loaded, result: &ScopeResult) -> ScopeReport {
    let mut r = stats(loaded.problem(), Some(result));
    r.timings_ms = loaded.timings.clone();
    r
}

/// Writes the pruned task into `out` and returns the written paths.
pub fn write_scoped(
    loaded: &mut Loaded,
    result: &ScopeResult,
    out: &Path,
    name: &str,
    ground: &GroundOptions,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let t = Instant::now();
    let files = match &loaded.source {
        Source::Pddl { domain, problem, task } => {
            let e = emit_pddl(domain, problem, task, result, ground)?;
            log::debug!("removed objects {:?}, removed schemas {:?}", e.removed_objects, e.removed_schemas);
            vec![(out.join("domain.pddl"), e.domain), (out.join("problem.pddl"), e.problem)]
        }
        Source::Sas { task, .. } => vec![(out.join(name), emit_sas(task, result))],
    };
    let mut paths = vec![];
    for (path, text) in files {
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        paths.push(path);
    }
    loaded.timings.insert("emit".into(), ms(t));
    Ok(paths)
}
