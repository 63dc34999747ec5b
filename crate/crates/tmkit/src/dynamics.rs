//! Chronology construction, data-dependency precedence, and
//! scenario-driven simulation producing traces.
//!
//! Time is a pure ordinal: the firing index. Tie-breaking among
//! simultaneously-enabled events is by lexicographic event id, so
//! identical inputs yield identical traces.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use crate::dsl::Scenario;
use crate::dsl::{non_repeat_cycle, DynamicModel};
use crate::metamodel::{Chronology, ChronEdge, Occurrence, StaticModel, Trace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynError {
    #[error("chronology references undeclared event `{0}`")]
    UnknownEvent(String),
    #[error("non-repeat cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("guard group `{0}` is reached but has no choice in the scenario")]
    UnresolvedGuard(String),
    #[error("repeat loop `{0}` is reached but has no bound in the scenario")]
    MissingRepeatBound(String),
}

/// A flow- or trigger-witnessed precedence between two events: the
/// witness arc leaves `before`'s region and enters `after`'s region.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrecedencePair {
    pub before: String,
    pub after: String,
    pub witness: String,
}

/// Validate an edge list and store it as the chronology of `dynm`.
pub fn build_chronology(
    dynm: &mut DynamicModel,
    edges: Vec<ChronEdge>,
) -> Result<&Chronology, DynError> {
    for e in &edges {
        for id in [&e.from, &e.to] {
            if dynm.event(id).is_none() {
                return Err(DynError::UnknownEvent(id.clone()));
            }
        }
    }
    let candidate = Chronology { edges };
    if let Some(cycle) = non_repeat_cycle(&candidate) {
        return Err(DynError::Cycle(cycle));
    }
    dynm.chronology = candidate;
    Ok(&dynm.chronology)
}

/// Reconstruct event precedence from flow structure: pair (i, j) is
/// included iff some arc leaves region(i) (tail inside i, head outside)
/// and enters region(j) (head inside j, tail outside).
pub fn dependency_oracle(model: &StaticModel, dynm: &DynamicModel) -> BTreeSet<PrecedencePair> {
    let mut pairs = BTreeSet::new();
    let arcs: Vec<(crate::metamodel::ActionId, crate::metamodel::ActionId, String)> = model
        .flows()
        .iter()
        .map(|f| (f.from, f.to, format!("flow `{}`", f.thing)))
        .chain(model.triggers().iter().map(|t| (t.from, t.to, "trigger".to_string())))
        .collect();
    for before in &dynm.events {
        for after in &dynm.events {
            if before.id == after.id {
                continue;
            }
            for (from, to, what) in &arcs {
                let leaves = before.region.actions.contains(from)
                    && !before.region.actions.contains(to);
                let enters = after.region.actions.contains(to)
                    && !after.region.actions.contains(from);
                if leaves && enters {
                    pairs.insert(PrecedencePair {
                        before: before.id.clone(),
                        after: after.id.clone(),
                        witness: format!(
                            "{} {} -> {}",
                            what,
                            model.action_name(*from),
                            model.action_name(*to)
                        ),
                    });
                }
            }
        }
    }
    pairs
}

/// The bare (before, after) relation of the oracle.
pub fn oracle_pairs(model: &StaticModel, dynm: &DynamicModel) -> BTreeSet<(String, String)> {
    dependency_oracle(model, dynm)
        .into_iter()
        .map(|p| (p.before, p.after))
        .collect()
}

fn edge_selected(edge: &ChronEdge, scenario: &Scenario) -> Option<bool> {
    match &edge.guard {
        None => Some(true),
        Some((group, label)) => scenario
            .guard_choices
            .get(group)
            .map(|choice| choice == label),
    }
}

/// The events that can fire under a scenario: true sources of the
/// chronology plus everything reachable over selected non-repeat edges.
/// Errors when a reached guard group has no choice.
fn active_events(
    dynm: &DynamicModel,
    scenario: &Scenario,
) -> Result<BTreeSet<String>, DynError> {
    let chron = &dynm.chronology;
    let with_incoming: BTreeSet<&str> = chron
        .edges
        .iter()
        .filter(|e| !e.repeat)
        .map(|e| e.to.as_str())
        .collect();
    let mut active: BTreeSet<String> = BTreeSet::new();
    let mut queue: Vec<String> = dynm
        .events
        .iter()
        .filter(|e| !with_incoming.contains(e.id.as_str()))
        .map(|e| e.id.clone())
        .collect();
    while let Some(id) = queue.pop() {
        if !active.insert(id.clone()) {
            continue;
        }
        for edge in chron.edges.iter().filter(|e| !e.repeat && e.from == id) {
            match edge_selected(edge, scenario) {
                None => return Err(DynError::UnresolvedGuard(edge.guard.clone().unwrap().0)),
                Some(true) => queue.push(edge.to.clone()),
                Some(false) => {}
            }
        }
    }
    Ok(active)
}

fn reachability(
    nodes: &BTreeSet<String>,
    edges: &[(String, String)],
) -> BTreeMap<String, BTreeSet<String>> {
    // Small graphs only: plain BFS from each node.
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (u, v) in edges {
        out.entry(u).or_default().push(v);
    }
    let mut reach = BTreeMap::new();
    for n in nodes {
        let mut seen = BTreeSet::from([n.clone()]);
        let mut stack = vec![n.as_str()];
        while let Some(x) = stack.pop() {
            for &y in out.get(x).into_iter().flatten() {
                if seen.insert(y.to_string()) {
                    stack.push(y);
                }
            }
        }
        reach.insert(n.clone(), seen);
    }
    reach
}

/// Run one scenario over a dynamic model's chronology.
///
/// The trace fires events in an order that is a linear extension of the
/// chronology restricted to the scenario-selected branch; each repeat
/// loop body executes exactly its bound's number of times; events on
/// unselected branches never fire.
pub fn simulate(dynm: &DynamicModel, scenario: &Scenario) -> Result<Trace, DynError> {
    let chron = &dynm.chronology;
    let active = active_events(dynm, scenario)?;

    // Selected non-repeat edges with an active tail form the scheduling DAG.
    let dag: Vec<(String, String)> = chron
        .edges
        .iter()
        .filter(|e| !e.repeat && active.contains(&e.from) && edge_selected(e, scenario) == Some(true))
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let reach = reachability(&active, &dag);

    // Repeat loops: body = events between target and source in the DAG.
    struct ReArm {
        source: String,
        body: BTreeSet<String>,
        entry: String,
        remaining: u64,
    }
    let mut loops: Vec<ReArm> = Vec::new();
    for edge in chron.edges.iter().filter(|e| e.repeat) {
        if !active.contains(&edge.from) || edge_selected(edge, scenario) != Some(true) {
            continue;
        }
        let group = Chronology::repeat_group(edge);
        let bound = *scenario
            .repeat_bounds
            .get(&group)
            .ok_or(DynError::MissingRepeatBound(group))?;
        // Body: everything on a DAG path target ~> source. Without such a
        // path the edge closes no loop and is ignored.
        let body: BTreeSet<String> = active
            .iter()
            .filter(|x| {
                reach.get(&edge.to).is_some_and(|r| r.contains(*x))
                    && reach.get(*x).is_some_and(|r| r.contains(&edge.from))
            })
            .cloned()
            .collect();
        if body.contains(&edge.from) && body.contains(&edge.to) {
            loops.push(ReArm {
                source: edge.from.clone(),
                body,
                entry: edge.to.clone(),
                remaining: bound - 1,
            });
        }
    }

    let mut delivered: Vec<bool> = vec![false; dag.len()];
    let mut indeg: BTreeMap<&str, usize> = active.iter().map(|e| (e.as_str(), 0)).collect();
    for (_, v) in &dag {
        *indeg.get_mut(v.as_str()).unwrap() += 1;
    }
    let mut ready: BTreeSet<String> = active
        .iter()
        .filter(|e| indeg[e.as_str()] == 0)
        .cloned()
        .collect();

    let mut occurrences = Vec::new();
    let mut ordinal = 0u64;
    let budget = {
        let max_bound = loops.iter().map(|l| l.remaining + 1).max().unwrap_or(1);
        (active.len() as u64) * max_bound + 1
    };

    while let Some(event) = ready.iter().next().cloned() {
        ready.remove(&event);
        ordinal += 1;
        assert!(ordinal <= budget, "simulation exceeded its firing budget");
        occurrences.push(Occurrence { event: event.clone(), ordinal });

        // Loops still due for more passes and containing this event: the
        // firing is mid-loop; edges leaving such a loop's body must wait
        // for the final pass.
        let looping: Vec<usize> = loops
            .iter()
            .enumerate()
            .filter(|(_, l)| l.remaining > 0 && l.body.contains(&event))
            .map(|(i, _)| i)
            .collect();

        for (i, (u, v)) in dag.iter().enumerate() {
            if u != &event || delivered[i] {
                continue;
            }
            let suppressed = looping
                .iter()
                .any(|&li| !loops[li].body.contains(v.as_str()));
            if suppressed {
                continue;
            }
            delivered[i] = true;
            let d = indeg.get_mut(v.as_str()).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(v.clone());
            }
        }

        // Re-arm loops whose source just fired.
        for li in 0..loops.len() {
            if loops[li].source != event || loops[li].remaining == 0 {
                continue;
            }
            loops[li].remaining -= 1;
            for (i, (u, v)) in dag.iter().enumerate() {
                if loops[li].body.contains(u.as_str()) && loops[li].body.contains(v.as_str()) {
                    delivered[i] = false;
                }
            }
            for x in loops[li].body.clone() {
                let n = dag
                    .iter()
                    .enumerate()
                    .filter(|(i, (_, v))| v == &x && !delivered[*i])
                    .count();
                indeg.insert(
                    active.iter().find(|a| **a == x).unwrap().as_str(),
                    n,
                );
                if n == 0 {
                    ready.insert(x.clone());
                }
            }
            let _ = &loops[li].entry;
        }
    }

    Ok(Trace { scenario: scenario.name.clone(), occurrences })
}

/// A single ordering or bound violation found in a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `from` must precede `to` but the trace orders them otherwise.
    EdgeOrder { from: String, to: String },
    /// Ordinals are not strictly increasing.
    Ordinals,
    /// A loop body fired `actual` times instead of its bound.
    RepeatCount { event: String, expected: u64, actual: u64 },
    /// A loop pass started before the previous pass finished.
    RepeatInterleave { source: String, target: String },
    /// A reached repeat edge has no bound in the scenario.
    MissingBound { group: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EdgeOrder { from, to } => {
                write!(f, "edge ({from}, {to}) ordering violated")
            }
            Violation::Ordinals => write!(f, "ordinals are not strictly increasing"),
            Violation::RepeatCount { event, expected, actual } => {
                write!(f, "event {event} fired {actual} times, bound is {expected}")
            }
            Violation::RepeatInterleave { source, target } => {
                write!(f, "loop {source} -> {target} passes interleave incorrectly")
            }
            Violation::MissingBound { group } => {
                write!(f, "repeat loop {group} reached without a bound")
            }
        }
    }
}

/// Check that a trace respects every selected chronology edge's ordering
/// and every repeat bound. Empty result means the trace is consistent.
pub fn check_trace(trace: &Trace, chron: &Chronology, scenario: &Scenario) -> Vec<Violation> {
    let mut violations = Vec::new();
    if !trace.ordinals_strictly_increase() {
        violations.push(Violation::Ordinals);
    }

    let mut positions: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, occ) in trace.occurrences.iter().enumerate() {
        positions.entry(occ.event.as_str()).or_default().push(i);
    }
    let first = |id: &str| positions.get(id).map(|v| v[0]);

    // Ordering along selected non-repeat edges, by first occurrence.
    for edge in chron.edges.iter().filter(|e| !e.repeat) {
        if edge_selected(edge, scenario) != Some(true) {
            continue;
        }
        if let (Some(fu), Some(fv)) = (first(&edge.from), first(&edge.to)) {
            if fu >= fv {
                violations.push(Violation::EdgeOrder {
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                });
            }
        }
    }

    // Repeat bounds: a closed loop whose source fired must run its body
    // exactly bound times, with passes in sequence.
    let nodes: BTreeSet<String> = positions.keys().map(|s| s.to_string()).collect();
    let dag: Vec<(String, String)> = chron
        .edges
        .iter()
        .filter(|e| !e.repeat && edge_selected(e, scenario) == Some(true))
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let reach = reachability(&nodes, &dag);
    for edge in chron.edges.iter().filter(|e| e.repeat) {
        if edge_selected(edge, scenario) != Some(true) || first(&edge.from).is_none() {
            continue;
        }
        let closes_loop = reach
            .get(&edge.to)
            .is_some_and(|r| r.contains(&edge.from));
        if !closes_loop {
            continue;
        }
        let group = Chronology::repeat_group(edge);
        let Some(&bound) = scenario.repeat_bounds.get(&group) else {
            violations.push(Violation::MissingBound { group });
            continue;
        };
        for id in [&edge.from, &edge.to] {
            let actual = positions.get(id.as_str()).map(|v| v.len()).unwrap_or(0) as u64;
            if actual != bound {
                violations.push(Violation::RepeatCount {
                    event: id.clone(),
                    expected: bound,
                    actual,
                });
            }
        }
        // The k-th entry into the loop happens after the (k-1)-th exit.
        let sources = positions.get(edge.from.as_str()).cloned().unwrap_or_default();
        let targets = positions.get(edge.to.as_str()).cloned().unwrap_or_default();
        for k in 1..targets.len() {
            if k - 1 < sources.len() && targets[k] < sources[k - 1] {
                violations.push(Violation::RepeatInterleave {
                    source: edge.from.clone(),
                    target: edge.to.clone(),
                });
            }
        }
    }

    violations
}
