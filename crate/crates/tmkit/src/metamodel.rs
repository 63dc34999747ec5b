//! In-memory representation of TM static models and the primitive
//! construction/query operations over them.
//!
//! A static model is a graph of thimacs, action nodes, flow arcs, and
//! trigger arcs. Construction is single-owner and mutable; once a model
//! is frozen it is immutable and safe for concurrent reads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five generic actions. No other kind is representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Create,
    Process,
    Release,
    Transfer,
    Receive,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Create,
        ActionKind::Process,
        ActionKind::Release,
        ActionKind::Transfer,
        ActionKind::Receive,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ActionKind::Create => "create",
            ActionKind::Process => "process",
            ActionKind::Release => "release",
            ActionKind::Transfer => "transfer",
            ActionKind::Receive => "receive",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ActionKind> {
        ActionKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThimacId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriggerId(pub u32);

/// A thimac: a named machine, possibly nested inside a parent thimac.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thimac {
    pub id: ThimacId,
    pub name: String,
    pub parent: Option<ThimacId>,
    pub actions: Vec<ActionId>,
}

/// One generic-action node owned by a thimac. `instance` disambiguates
/// several same-kind actions in one thimac; `label` carries the optional
/// step-number annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionNode {
    pub id: ActionId,
    pub owner: ThimacId,
    pub kind: ActionKind,
    pub instance: Option<String>,
    pub label: Option<String>,
}

/// A flow arc: a thing moving from one action to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowArc {
    pub id: FlowId,
    pub from: ActionId,
    pub to: ActionId,
    pub thing: String,
}

/// A trigger arc: a dashed dependency crossing flows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerArc {
    pub id: TriggerId,
    pub from: ActionId,
    pub to: ActionId,
    pub note: Option<String>,
}

/// Legal kind-pairs for flow arcs. The default set is strict; extra
/// pairs may be admitted through a rule configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencySet {
    pairs: BTreeSet<(ActionKind, ActionKind)>,
}

impl Default for AdjacencySet {
    fn default() -> Self {
        use ActionKind::*;
        let pairs = [
            (Create, Process),
            (Create, Release),
            (Process, Release),
            (Release, Transfer),
            (Transfer, Transfer),
            (Transfer, Receive),
            (Receive, Process),
        ]
        .into_iter()
        .collect();
        AdjacencySet { pairs }
    }
}

impl AdjacencySet {
    pub fn allows(&self, from: ActionKind, to: ActionKind) -> bool {
        self.pairs.contains(&(from, to))
    }

    pub fn allow(&mut self, from: ActionKind, to: ActionKind) {
        self.pairs.insert((from, to));
    }
}

/// Reference to one (thimac, kind, instance) action slot, with an
/// optional step label to attach on first creation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub thimac: ThimacId,
    pub kind: ActionKind,
    pub instance: Option<String>,
    pub step: Option<String>,
}

impl Endpoint {
    pub fn new(thimac: ThimacId, kind: ActionKind) -> Self {
        Endpoint { thimac, kind, instance: None, step: None }
    }

    pub fn instance(mut self, name: impl Into<String>) -> Self {
        self.instance = Some(name.into());
        self
    }

    pub fn step(mut self, label: impl Into<String>) -> Self {
        self.step = Some(label.into());
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("model is frozen; no further mutation is allowed")]
    Frozen,
    #[error("unknown thimac id {0:?}")]
    UnknownThimac(ThimacId),
    #[error("duplicate sibling thimac name `{0}`")]
    DuplicateSiblingName(String),
    #[error("thimac name must be non-empty")]
    EmptyThimacName,
    #[error("illegal flow adjacency {from} -> {to}")]
    IllegalAdjacency { from: ActionKind, to: ActionKind },
    #[error("transfer -> transfer flow must cross thimac boundaries")]
    SameThimacTransfer,
    #[error("{from} -> {to} flow must stay inside one thimac")]
    CrossThimacFlow { from: ActionKind, to: ActionKind },
    #[error("a flow needs at least two endpoints")]
    TooFewEndpoints,
    #[error("conflicting step label for {action}: `{existing}` vs `{new}`")]
    StepLabelConflict { action: String, existing: String, new: String },
    #[error("trigger duplicates an existing flow arc between the same actions")]
    TriggerDuplicatesFlow,
    #[error("region action set is empty")]
    EmptyRegion,
    #[error("unknown action id {0:?}")]
    UnknownAction(ActionId),
    #[error("region is not connected")]
    DisconnectedRegion,
}

/// A TM static model: the maximal region.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StaticModel {
    pub name: String,
    thimacs: Vec<Thimac>,
    actions: Vec<ActionNode>,
    flows: Vec<FlowArc>,
    triggers: Vec<TriggerArc>,
    adjacency: AdjacencySet,
    frozen: bool,
}

impl StaticModel {
    pub fn new(name: impl Into<String>) -> Self {
        StaticModel { name: name.into(), ..Default::default() }
    }

    pub fn with_adjacency(name: impl Into<String>, adjacency: AdjacencySet) -> Self {
        StaticModel { name: name.into(), adjacency, ..Default::default() }
    }

    pub fn adjacency(&self) -> &AdjacencySet {
        &self.adjacency
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Seal the model. Every mutating operation fails afterwards.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn thimacs(&self) -> &[Thimac] {
        &self.thimacs
    }

    pub fn actions(&self) -> &[ActionNode] {
        &self.actions
    }

    pub fn flows(&self) -> &[FlowArc] {
        &self.flows
    }

    pub fn triggers(&self) -> &[TriggerArc] {
        &self.triggers
    }

    pub fn thimac(&self, id: ThimacId) -> Option<&Thimac> {
        self.thimacs.get(id.0 as usize)
    }

    pub fn action(&self, id: ActionId) -> Option<&ActionNode> {
        self.actions.get(id.0 as usize)
    }

    pub fn thimac_by_name(&self, name: &str) -> Option<&Thimac> {
        // top-level first, then nested; names are unique among siblings so a
        // bare name may be ambiguous across levels -- first match wins in
        // declaration order.
        self.thimacs.iter().find(|t| t.name == name)
    }

    /// Slash-separated path from the root of the nesting forest.
    pub fn thimac_path(&self, id: ThimacId) -> String {
        let mut parts = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            let t = &self.thimacs[c.0 as usize];
            parts.push(t.name.clone());
            cur = t.parent;
        }
        parts.reverse();
        parts.join("/")
    }

    /// Human-readable name of an action, e.g. `Heart.receive@deoxy`.
    pub fn action_name(&self, id: ActionId) -> String {
        let a = &self.actions[id.0 as usize];
        let owner = &self.thimacs[a.owner.0 as usize];
        match &a.instance {
            Some(inst) => format!("{}.{}@{}", owner.name, a.kind, inst),
            None => format!("{}.{}", owner.name, a.kind),
        }
    }

    pub fn find_action(
        &self,
        thimac: ThimacId,
        kind: ActionKind,
        instance: Option<&str>,
    ) -> Option<ActionId> {
        self.actions
            .iter()
            .find(|a| a.owner == thimac && a.kind == kind && a.instance.as_deref() == instance)
            .map(|a| a.id)
    }

    /// Look up an action by its display name (`Thimac.kind[@instance]`).
    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.actions
            .iter()
            .find(|a| self.action_name(a.id) == name)
            .map(|a| a.id)
    }

    /// All step labels carried by actions and trigger notes.
    pub fn step_labels(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> =
            self.actions.iter().filter_map(|a| a.label.clone()).collect();
        out.extend(self.triggers.iter().filter_map(|t| t.note.clone()));
        out
    }

    pub fn add_thimac(
        &mut self,
        name: impl Into<String>,
        parent: Option<ThimacId>,
    ) -> Result<ThimacId, ModelError> {
        if self.frozen {
            return Err(ModelError::Frozen);
        }
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::EmptyThimacName);
        }
        if let Some(p) = parent {
            if self.thimac(p).is_none() {
                return Err(ModelError::UnknownThimac(p));
            }
        }
        if self
            .thimacs
            .iter()
            .any(|t| t.parent == parent && t.name == name)
        {
            return Err(ModelError::DuplicateSiblingName(name));
        }
        let id = ThimacId(self.thimacs.len() as u32);
        self.thimacs.push(Thimac { id, name, parent, actions: Vec::new() });
        debug_assert!(self.parent_forest_is_acyclic());
        Ok(id)
    }

    /// Resolve an endpoint to its action node, creating the node on first
    /// reference.
    pub fn resolve_endpoint(&mut self, ep: &Endpoint) -> Result<ActionId, ModelError> {
        if self.frozen {
            return Err(ModelError::Frozen);
        }
        if self.thimac(ep.thimac).is_none() {
            return Err(ModelError::UnknownThimac(ep.thimac));
        }
        let id = match self.find_action(ep.thimac, ep.kind, ep.instance.as_deref()) {
            Some(id) => id,
            None => {
                let id = ActionId(self.actions.len() as u32);
                self.actions.push(ActionNode {
                    id,
                    owner: ep.thimac,
                    kind: ep.kind,
                    instance: ep.instance.clone(),
                    label: None,
                });
                self.thimacs[ep.thimac.0 as usize].actions.push(id);
                id
            }
        };
        if let Some(step) = &ep.step {
            let node = &mut self.actions[id.0 as usize];
            match &node.label {
                None => node.label = Some(step.clone()),
                Some(existing) if existing == step => {}
                Some(existing) => {
                    let existing = existing.clone();
                    return Err(ModelError::StepLabelConflict {
                        action: self.action_name(id),
                        existing,
                        new: step.clone(),
                    });
                }
            }
        }
        Ok(id)
    }

    /// Add a chain of flow arcs: consecutive endpoint pairs become arcs
    /// sharing the `thing` label.
    pub fn add_flow(
        &mut self,
        thing: impl Into<String>,
        endpoints: &[Endpoint],
    ) -> Result<Vec<FlowId>, ModelError> {
        if self.frozen {
            return Err(ModelError::Frozen);
        }
        if endpoints.len() < 2 {
            return Err(ModelError::TooFewEndpoints);
        }
        // Check legality of every consecutive pair before mutating.
        for pair in endpoints.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if !self.adjacency.allows(a.kind, b.kind) {
                return Err(ModelError::IllegalAdjacency { from: a.kind, to: b.kind });
            }
            let cross = a.thimac != b.thimac;
            let transfer_pair = a.kind == ActionKind::Transfer && b.kind == ActionKind::Transfer;
            if transfer_pair && !cross {
                return Err(ModelError::SameThimacTransfer);
            }
            if !transfer_pair && cross {
                return Err(ModelError::CrossThimacFlow { from: a.kind, to: b.kind });
            }
        }
        let thing = thing.into();
        let mut ids = Vec::with_capacity(endpoints.len());
        for ep in endpoints {
            ids.push(self.resolve_endpoint(ep)?);
        }
        let mut arcs = Vec::new();
        for pair in ids.windows(2) {
            let id = FlowId(self.flows.len() as u32);
            self.flows.push(FlowArc { id, from: pair[0], to: pair[1], thing: thing.clone() });
            arcs.push(id);
        }
        Ok(arcs)
    }

    /// Escape hatch for tests and tooling: insert a flow arc without the
    /// adjacency and boundary checks, so the validator scan can be
    /// exercised on ill-formed input.
    pub fn add_flow_unchecked(
        &mut self,
        thing: impl Into<String>,
        from: &Endpoint,
        to: &Endpoint,
    ) -> Result<FlowId, ModelError> {
        if self.frozen {
            return Err(ModelError::Frozen);
        }
        let from = self.resolve_endpoint(from)?;
        let to = self.resolve_endpoint(to)?;
        let id = FlowId(self.flows.len() as u32);
        self.flows.push(FlowArc { id, from, to, thing: thing.into() });
        Ok(id)
    }

    /// Returns the new trigger id plus `true` when the trigger is a
    /// self-trigger (accepted; the validator reports it as a warning).
    pub fn add_trigger(
        &mut self,
        from: &Endpoint,
        to: &Endpoint,
        note: Option<String>,
    ) -> Result<(TriggerId, bool), ModelError> {
        if self.frozen {
            return Err(ModelError::Frozen);
        }
        let from = self.resolve_endpoint(from)?;
        let to = self.resolve_endpoint(to)?;
        if self.flows.iter().any(|f| f.from == from && f.to == to) {
            return Err(ModelError::TriggerDuplicatesFlow);
        }
        let id = TriggerId(self.triggers.len() as u32);
        self.triggers.push(TriggerArc { id, from, to, note });
        Ok((id, from == to))
    }

    /// Undirected adjacency over flow and trigger arcs.
    fn neighbors(&self) -> BTreeMap<ActionId, Vec<ActionId>> {
        let mut adj: BTreeMap<ActionId, Vec<ActionId>> = BTreeMap::new();
        for a in &self.actions {
            adj.entry(a.id).or_default();
        }
        let link = |x: ActionId, y: ActionId, adj: &mut BTreeMap<ActionId, Vec<ActionId>>| {
            adj.entry(x).or_default().push(y);
            adj.entry(y).or_default().push(x);
        };
        for f in &self.flows {
            link(f.from, f.to, &mut adj);
        }
        for t in &self.triggers {
            link(t.from, t.to, &mut adj);
        }
        adj
    }

    /// True when `actions` induce a connected sub-diagram (arcs read as
    /// undirected edges).
    pub fn is_connected_subset(&self, actions: &BTreeSet<ActionId>) -> bool {
        if actions.is_empty() {
            return false;
        }
        let adj = self.neighbors();
        let start = *actions.iter().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in adj.get(&x).into_iter().flatten() {
                if actions.contains(&y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == actions.len()
    }

    /// Carve out the region induced by `action_ids`.
    pub fn subregion(&self, action_ids: &BTreeSet<ActionId>) -> Result<Region, ModelError> {
        if action_ids.is_empty() {
            return Err(ModelError::EmptyRegion);
        }
        for &id in action_ids {
            if self.action(id).is_none() {
                return Err(ModelError::UnknownAction(id));
            }
        }
        if !self.is_connected_subset(action_ids) {
            return Err(ModelError::DisconnectedRegion);
        }
        Ok(Region { actions: action_ids.clone() })
    }

    /// Full scan: every arc endpoint resolves to an action of the model.
    pub fn endpoints_resolve(&self) -> bool {
        let ok = |id: ActionId| (id.0 as usize) < self.actions.len();
        self.flows.iter().all(|f| ok(f.from) && ok(f.to))
            && self.triggers.iter().all(|t| ok(t.from) && ok(t.to))
    }

    /// DFS over the parent-of relation; the nesting must form a forest.
    pub fn parent_forest_is_acyclic(&self) -> bool {
        for t in &self.thimacs {
            let mut seen = BTreeSet::new();
            let mut cur = Some(t.id);
            while let Some(c) = cur {
                if !seen.insert(c) {
                    return false;
                }
                cur = self.thimacs[c.0 as usize].parent;
            }
        }
        true
    }
}

/// A connected sub-diagram of a static model, given by its action subset.
/// Induced arcs are recomputed from the base model on demand.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Region {
    pub actions: BTreeSet<ActionId>,
}

impl Region {
    pub fn induced_flows<'m>(&self, model: &'m StaticModel) -> Vec<&'m FlowArc> {
        model
            .flows()
            .iter()
            .filter(|f| self.actions.contains(&f.from) && self.actions.contains(&f.to))
            .collect()
    }

    pub fn induced_triggers<'m>(&self, model: &'m StaticModel) -> Vec<&'m TriggerArc> {
        model
            .triggers()
            .iter()
            .filter(|t| self.actions.contains(&t.from) && self.actions.contains(&t.to))
            .collect()
    }
}

/// An identified region plus its (opaque, simulation-assigned) time slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub description: String,
    pub region: Region,
    pub time: Option<u64>,
}

/// Directed graph over events with guard labels and repeat-marked edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Chronology {
    pub edges: Vec<ChronEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChronEdge {
    pub from: String,
    pub to: String,
    /// Guard as (group, label); edges in one group are exclusive branches.
    pub guard: Option<(String, String)>,
    pub repeat: bool,
}

impl Chronology {
    /// Loop-group name used by scenarios to bound a repeat edge.
    pub fn repeat_group(edge: &ChronEdge) -> String {
        format!("{}->{}", edge.from, edge.to)
    }
}

/// Ordered record of event occurrences produced by one simulation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub scenario: String,
    pub occurrences: Vec<Occurrence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub event: String,
    pub ordinal: u64,
}

impl Trace {
    pub fn ordinals_strictly_increase(&self) -> bool {
        self.occurrences.windows(2).all(|w| w[0].ordinal < w[1].ordinal)
    }

    /// Plain line format: `ordinal event-id` per line.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for occ in &self.occurrences {
            out.push_str(&format!("{} {}\n", occ.ordinal, occ.event));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ep(m: &StaticModel, name: &str, kind: ActionKind) -> Endpoint {
        Endpoint::new(m.thimac_by_name(name).unwrap().id, kind)
    }

    #[test]
    fn add_thimac_to_empty_model() {
        let mut m = StaticModel::new("t");
        m.add_thimac("Heart", None).unwrap();
        assert_eq!(m.thimacs().len(), 1);
    }

    #[test]
    fn nested_subthimac() {
        let mut m = StaticModel::new("t");
        let heart = m.add_thimac("Heart", None).unwrap();
        let blood = m.add_thimac("Blood", Some(heart)).unwrap();
        assert_eq!(m.thimac(blood).unwrap().parent, Some(heart));
        assert_eq!(m.thimac_path(blood), "Heart/Blood");
        assert!(m.parent_forest_is_acyclic());
    }

    #[test]
    fn duplicate_sibling_name_rejected() {
        let mut m = StaticModel::new("t");
        m.add_thimac("Heart", None).unwrap();
        assert_eq!(
            m.add_thimac("Heart", None),
            Err(ModelError::DuplicateSiblingName("Heart".into()))
        );
    }

    #[test]
    fn same_name_under_different_parents_ok() {
        let mut m = StaticModel::new("t");
        let a = m.add_thimac("A", None).unwrap();
        let b = m.add_thimac("B", None).unwrap();
        m.add_thimac("X", Some(a)).unwrap();
        m.add_thimac("X", Some(b)).unwrap();
    }

    #[test]
    fn flow_chain_release_transfer_transfer_receive() {
        let mut m = StaticModel::new("t");
        m.add_thimac("Diagnosis", None).unwrap();
        m.add_thimac("Has", None).unwrap();
        let arcs = m
            .add_flow(
                "diagnosis",
                &[
                    ep(&m, "Diagnosis", ActionKind::Release),
                    ep(&m, "Diagnosis", ActionKind::Transfer),
                    ep(&m, "Has", ActionKind::Transfer),
                    ep(&m, "Has", ActionKind::Receive),
                ],
            )
            .unwrap();
        assert_eq!(arcs.len(), 3);
        assert_eq!(m.actions().len(), 4);
    }

    #[test]
    fn illegal_adjacency_rejected() {
        let mut m = StaticModel::new("t");
        m.add_thimac("A", None).unwrap();
        let err = m
            .add_flow(
                "x",
                &[ep(&m, "A", ActionKind::Release), ep(&m, "A", ActionKind::Receive)],
            )
            .unwrap_err();
        assert_eq!(
            err,
            ModelError::IllegalAdjacency { from: ActionKind::Release, to: ActionKind::Receive }
        );
    }

    #[test]
    fn same_thimac_transfer_pair_rejected() {
        let mut m = StaticModel::new("t");
        m.add_thimac("Heart", None).unwrap();
        let err = m
            .add_flow(
                "x",
                &[ep(&m, "Heart", ActionKind::Transfer), ep(&m, "Heart", ActionKind::Transfer)],
            )
            .unwrap_err();
        assert_eq!(err, ModelError::SameThimacTransfer);
    }

    #[test]
    fn cross_thimac_non_transfer_rejected() {
        let mut m = StaticModel::new("t");
        m.add_thimac("A", None).unwrap();
        m.add_thimac("B", None).unwrap();
        let err = m
            .add_flow(
                "x",
                &[ep(&m, "A", ActionKind::Release), ep(&m, "B", ActionKind::Transfer)],
            )
            .unwrap_err();
        assert!(matches!(err, ModelError::CrossThimacFlow { .. }));
    }

    #[test]
    fn self_trigger_accepted_with_flag() {
        let mut m = StaticModel::new("t");
        m.add_thimac("A", None).unwrap();
        let (_, selfy) = m
            .add_trigger(
                &ep(&m, "A", ActionKind::Process),
                &ep(&m, "A", ActionKind::Process),
                None,
            )
            .unwrap();
        assert!(selfy);
    }

    #[test]
    fn trigger_may_not_duplicate_flow() {
        let mut m = StaticModel::new("t");
        m.add_thimac("A", None).unwrap();
        m.add_flow(
            "x",
            &[ep(&m, "A", ActionKind::Create), ep(&m, "A", ActionKind::Process)],
        )
        .unwrap();
        let err = m
            .add_trigger(
                &ep(&m, "A", ActionKind::Create),
                &ep(&m, "A", ActionKind::Process),
                None,
            )
            .unwrap_err();
        assert_eq!(err, ModelError::TriggerDuplicatesFlow);
    }

    #[test]
    fn frozen_model_rejects_mutation() {
        let mut m = StaticModel::new("t");
        m.add_thimac("A", None).unwrap();
        m.freeze();
        assert_eq!(m.add_thimac("B", None), Err(ModelError::Frozen));
        assert!(m
            .add_flow(
                "x",
                &[ep(&m, "A", ActionKind::Create), ep(&m, "A", ActionKind::Release)],
            )
            .is_err());
    }

    #[test]
    fn subregion_whole_model_and_disconnected() {
        let mut m = StaticModel::new("t");
        m.add_thimac("Lungs", None).unwrap();
        m.add_thimac("Gut", None).unwrap();
        m.add_flow(
            "air",
            &[
                ep(&m, "Lungs", ActionKind::Transfer).instance("in"),
                ep(&m, "Lungs", ActionKind::Receive),
            ],
        )
        .unwrap();
        let gut_p = m.resolve_endpoint(&ep(&m, "Gut", ActionKind::Process)).unwrap();
        let transfer_in =
            m.find_action(m.thimac_by_name("Lungs").unwrap().id, ActionKind::Transfer, Some("in"))
                .unwrap();
        let receive =
            m.find_action(m.thimac_by_name("Lungs").unwrap().id, ActionKind::Receive, None)
                .unwrap();

        let r = m.subregion(&BTreeSet::from([transfer_in, receive])).unwrap();
        assert_eq!(r.induced_flows(&m).len(), 1);

        assert_eq!(
            m.subregion(&BTreeSet::from([receive, gut_p])),
            Err(ModelError::DisconnectedRegion)
        );
        assert_eq!(m.subregion(&BTreeSet::new()), Err(ModelError::EmptyRegion));
    }

    #[test]
    fn step_labels_collected_and_conflicts_rejected() {
        let mut m = StaticModel::new("t");
        m.add_thimac("A", None).unwrap();
        m.add_flow(
            "x",
            &[
                ep(&m, "A", ActionKind::Create).step("1"),
                ep(&m, "A", ActionKind::Release).step("2"),
            ],
        )
        .unwrap();
        assert_eq!(m.step_labels(), BTreeSet::from(["1".to_string(), "2".to_string()]));
        let err = m
            .resolve_endpoint(&ep(&m, "A", ActionKind::Create).step("9"))
            .unwrap_err();
        assert!(matches!(err, ModelError::StepLabelConflict { .. }));
    }
}
