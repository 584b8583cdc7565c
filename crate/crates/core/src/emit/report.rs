use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{FluentSet, PlanningProblem};
use crate::scoping::ScopeResult;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluentClasses {
    pub rel: Vec<String>,
    pub cl: Vec<String>,
    pub irrel: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCounts {
    pub kept: usize,
    pub deleted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSize {
    pub original: f64,
    pub scoped: Option<f64>,
}

/// Machine-readable summary of one scoping run. Field order is the
/// serialization order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScopeReport {
    pub fluents: Option<FluentClasses>,
    pub actions: ActionCounts,
    pub log10_state_size: StateSize,
    pub unbounded_fluents: Vec<String>,
    pub iterations: Option<usize>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ScopeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fluents read by some precondition and written by some effect, over the
/// given rules.
fn counted<'a>(rules: impl Iterator<Item = &'a crate::model::CaeTriple> + Clone) -> FluentSet {
    let read: FluentSet = rules.clone().flat_map(|t| t.precondition.vars()).collect();
    let written: FluentSet = rules.flat_map(|t| t.affected()).collect();
    read.intersection(&written).copied().collect()
}

fn log10_size(pp: &PlanningProblem, fluents: &FluentSet) -> f64 {
    fluents.iter().filter_map(|f| pp.fluent(*f).domain_size()).map(|n| (n as f64).log10()).sum()
}

/// State-space and action sizes, before and (when given) after scoping.
pub fn stats(pp: &PlanningProblem, scope: Option<&ScopeResult>) -> ScopeReport {
    let all = counted(pp.transitions.iter());
    let unbounded_fluents = all.iter().filter(|f| pp.fluent(**f).domain_size().is_none()).map(|f| pp.fluent_name(*f).to_string()).collect();
    let original = log10_size(pp, &all);
    match scope {
        None => ScopeReport {
            fluents: None,
            actions: ActionCounts { kept: pp.actions.len(), deleted: 0 },
            log10_state_size: StateSize { original, scoped: None },
            unbounded_fluents,
            iterations: None,
            timings_ms: BTreeMap::new(),
        },
        Some(s) => {
            let kept_fluents: FluentSet = s.j_rel.union(&s.j_cl).copied().collect();
            let scoped: FluentSet = counted(pp.transitions.iter().filter(|t| s.retained_actions.contains(&t.action)))
                .intersection(&kept_fluents)
                .copied()
                .collect();
            let names = |set: &FluentSet| s.names(pp, set).into_iter().map(str::to_owned).collect();
            ScopeReport {
                fluents: Some(FluentClasses { rel: names(&s.j_rel), cl: names(&s.j_cl), irrel: names(&s.j_irrel) }),
                actions: ActionCounts { kept: s.retained_actions.len(), deleted: s.deleted_actions(pp) },
                log10_state_size: StateSize { original, scoped: Some(log10_size(pp, &scoped)) },
                unbounded_fluents,
                iterations: Some(s.iterations),
                timings_ms: BTreeMap::new(),
            }
        }
    }
}
