//! Event carvings of a static model: baseline generation, coarsening by
//! merge, coverage audits, and process classification.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::dsl::DynamicModel;
use crate::metamodel::{ActionId, ActionKind, Chronology, Event, Region, StaticModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CarvingError {
    #[error("unknown event id `{0}`")]
    UnknownEvent(String),
    #[error("no event ids given")]
    EmptyMerge,
    #[error("event id `{0}` already exists")]
    IdCollision(String),
    #[error("union of the merged regions is not connected")]
    DisconnectedUnion,
    #[error("dynamic model is based on `{dyn_base}`, not `{model}`")]
    BaseMismatch { dyn_base: String, model: String },
}

/// Coverage audit of a carving: which base actions are uncovered, and
/// which are claimed by more than one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub uncovered: BTreeSet<String>,
    pub overlaps: BTreeMap<String, Vec<String>>,
    pub event_count: usize,
    pub action_count: usize,
}

/// Process category of an event region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EventClass {
    /// Moves things between thimacs.
    Transport,
    /// Moves things across the model boundary.
    Export,
    /// Processes or creates things without inter-thimac movement.
    Transformation,
    /// Creation-only appearance.
    Structural,
    Mixed,
}

impl EventClass {
    pub fn name(self) -> &'static str {
        match self {
            EventClass::Transport => "Transport",
            EventClass::Export => "Export",
            EventClass::Transformation => "Transformation",
            EventClass::Structural => "Structural",
            EventClass::Mixed => "Mixed",
        }
    }
}

/// The degenerate baseline carving: one event per generic action, each
/// region a singleton, empty chronology.
pub fn finest_carving(model: &StaticModel) -> DynamicModel {
    let events = model
        .actions()
        .iter()
        .enumerate()
        .map(|(i, a)| Event {
            id: format!("F{}", i + 1),
            description: model.action_name(a.id),
            region: Region { actions: BTreeSet::from([a.id]) },
            time: None,
        })
        .collect();
    DynamicModel {
        base_name: model.name.clone(),
        events,
        chronology: Chronology::default(),
    }
}

/// Replace the named events by one event holding the union region.
/// Chronology edges are re-attached to the merged event; duplicates and
/// self-edges collapse.
pub fn merge_events(
    model: &StaticModel,
    dynm: &DynamicModel,
    ids: &BTreeSet<String>,
    new_id: &str,
) -> Result<DynamicModel, CarvingError> {
    if ids.is_empty() {
        return Err(CarvingError::EmptyMerge);
    }
    for id in ids {
        if dynm.event(id).is_none() {
            return Err(CarvingError::UnknownEvent(id.clone()));
        }
    }
    if !ids.contains(new_id) && dynm.event(new_id).is_some() {
        return Err(CarvingError::IdCollision(new_id.to_string()));
    }

    let mut union: BTreeSet<ActionId> = BTreeSet::new();
    let mut descriptions = Vec::new();
    for id in ids {
        let e = dynm.event(id).unwrap();
        union.extend(e.region.actions.iter().copied());
        if !e.description.is_empty() {
            descriptions.push(e.description.clone());
        }
    }
    if !model.is_connected_subset(&union) {
        return Err(CarvingError::DisconnectedUnion);
    }

    let mut events = Vec::new();
    let mut inserted = false;
    for e in &dynm.events {
        if ids.contains(&e.id) {
            if !inserted {
                events.push(Event {
                    id: new_id.to_string(),
                    description: descriptions.join(" + "),
                    region: Region { actions: union.clone() },
                    time: None,
                });
                inserted = true;
            }
        } else {
            events.push(e.clone());
        }
    }

    let rename = |id: &str| -> String {
        if ids.contains(id) {
            new_id.to_string()
        } else {
            id.to_string()
        }
    };
    let mut edges = Vec::new();
    for e in &dynm.chronology.edges {
        let from = rename(&e.from);
        let to = rename(&e.to);
        if from == to {
            continue;
        }
        let edge = crate::metamodel::ChronEdge {
            from,
            to,
            guard: e.guard.clone(),
            repeat: e.repeat,
        };
        if !edges.contains(&edge) {
            edges.push(edge);
        }
    }

    Ok(DynamicModel {
        base_name: dynm.base_name.clone(),
        events,
        chronology: Chronology { edges },
    })
}

/// Exact uncovered and overlap sets of a carving over its base model.
pub fn coverage(model: &StaticModel, dynm: &DynamicModel) -> Result<CoverageReport, CarvingError> {
    if dynm.base_name != model.name {
        return Err(CarvingError::BaseMismatch {
            dyn_base: dynm.base_name.clone(),
            model: model.name.clone(),
        });
    }
    let mut claims: BTreeMap<ActionId, Vec<String>> = BTreeMap::new();
    for e in &dynm.events {
        for &a in &e.region.actions {
            claims.entry(a).or_default().push(e.id.clone());
        }
    }
    let uncovered = model
        .actions()
        .iter()
        .filter(|a| !claims.contains_key(&a.id))
        .map(|a| model.action_name(a.id))
        .collect();
    let overlaps = claims
        .iter()
        .filter(|(_, events)| events.len() > 1)
        .map(|(a, events)| (model.action_name(*a), events.clone()))
        .collect();
    Ok(CoverageReport {
        uncovered,
        overlaps,
        event_count: dynm.events.len(),
        action_count: model.actions().len(),
    })
}

/// Total, deterministic classification of one event region, evaluated
/// in priority order Transport > Export > Transformation > Structural.
pub fn classify_event(event: &Event, model: &StaticModel) -> EventClass {
    let region = &event.region;
    let kind = |id: ActionId| model.action(id).unwrap().kind;
    let owner = |id: ActionId| model.action(id).unwrap().owner;

    // Transport: the region contains an inter-thimac transfer pair.
    let has_cross_transfer = region.induced_flows(model).iter().any(|f| {
        kind(f.from) == ActionKind::Transfer
            && kind(f.to) == ActionKind::Transfer
            && owner(f.from) != owner(f.to)
    });
    if has_cross_transfer {
        return EventClass::Transport;
    }

    // Export: a transfer in the region with no inter-thimac peer
    // anywhere in the model, i.e. traffic across the model boundary.
    let boundary_transfer = region.actions.iter().any(|&a| {
        kind(a) == ActionKind::Transfer
            && !model.flows().iter().any(|f| {
                kind(f.from) == ActionKind::Transfer
                    && kind(f.to) == ActionKind::Transfer
                    && (f.from == a || f.to == a)
            })
    });
    if boundary_transfer {
        return EventClass::Export;
    }

    // Transformation: processing, or a triggered create.
    let triggered = |a: ActionId| model.triggers().iter().any(|t| t.to == a);
    let transforms = region.actions.iter().any(|&a| {
        kind(a) == ActionKind::Process || (kind(a) == ActionKind::Create && triggered(a))
    });
    if transforms {
        return EventClass::Transformation;
    }

    // Structural: creation-only appearance.
    if region.actions.iter().all(|&a| kind(a) == ActionKind::Create) {
        return EventClass::Structural;
    }

    EventClass::Mixed
}

/// Structural vs processual event counts of a carving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CarvingKind {
    pub structural: usize,
    pub processual: usize,
}

pub fn carving_kind(model: &StaticModel, dynm: &DynamicModel) -> CarvingKind {
    let mut structural = 0;
    let mut processual = 0;
    for e in &dynm.events {
        if classify_event(e, model) == EventClass::Structural {
            structural += 1;
        } else {
            processual += 1;
        }
    }
    CarvingKind { structural, processual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_static_named;

    const LUNGS: &str = "\
thimac Lungs { }
thimac Heart { }
thimac Gut { }
flow air: Lungs.transfer@in -> Lungs.receive -> Lungs.process
trigger Lungs.process -> Lungs.create
flow oxygen: Lungs.create -> Lungs.release -> Lungs.transfer@out -> Heart.transfer -> Heart.receive
flow bile: Gut.create -> Gut.process
";

    fn base() -> StaticModel {
        parse_static_named(LUNGS, "lungs").unwrap()
    }

    #[test]
    fn finest_carving_is_a_partition() {
        let m = base();
        let d = finest_carving(&m);
        assert_eq!(d.events.len(), m.actions().len());
        let report = coverage(&m, &d).unwrap();
        assert!(report.uncovered.is_empty());
        assert!(report.overlaps.is_empty());
    }

    #[test]
    fn finest_carving_of_empty_model() {
        let mut m = StaticModel::new("empty");
        m.freeze();
        let d = finest_carving(&m);
        assert!(d.events.is_empty());
        assert!(d.chronology.edges.is_empty());
    }

    #[test]
    fn merge_adjacent_singletons_gives_paper_style_event() {
        let m = base();
        let d = finest_carving(&m);
        let t_in = m.action_by_name("Lungs.transfer@in").unwrap();
        let rcv = m.action_by_name("Lungs.receive").unwrap();
        let find = |aid| {
            d.events
                .iter()
                .find(|e| e.region.actions.contains(&aid))
                .unwrap()
                .id
                .clone()
        };
        let ids = BTreeSet::from([find(t_in), find(rcv)]);
        let merged = merge_events(&m, &d, &ids, "E1").unwrap();
        assert_eq!(merged.events.len(), d.events.len() - 1);
        let e1 = merged.event("E1").unwrap();
        assert_eq!(e1.region.actions, BTreeSet::from([t_in, rcv]));
        // Covered-action set is invariant under merge.
        let before = coverage(&m, &d).unwrap();
        let after = coverage(&m, &merged).unwrap();
        assert_eq!(before.uncovered, after.uncovered);
    }

    #[test]
    fn merge_with_itself_is_identity() {
        let m = base();
        let d = finest_carving(&m);
        let first = d.events[0].clone();
        let merged =
            merge_events(&m, &d, &BTreeSet::from([first.id.clone()]), &first.id).unwrap();
        assert_eq!(merged.event(&first.id).unwrap().region, first.region);
        assert_eq!(merged.events.len(), d.events.len());
    }

    #[test]
    fn disconnected_merge_rejected() {
        let m = base();
        let d = finest_carving(&m);
        let rcv = m.action_by_name("Lungs.receive").unwrap();
        let gut = m.action_by_name("Gut.process").unwrap();
        let find = |aid| {
            d.events
                .iter()
                .find(|e| e.region.actions.contains(&aid))
                .unwrap()
                .id
                .clone()
        };
        let err = merge_events(&m, &d, &BTreeSet::from([find(rcv), find(gut)]), "X").unwrap_err();
        assert_eq!(err, CarvingError::DisconnectedUnion);
    }

    #[test]
    fn coverage_of_empty_dyn_is_everything() {
        let m = base();
        let d = DynamicModel { base_name: m.name.clone(), ..Default::default() };
        let report = coverage(&m, &d).unwrap();
        assert_eq!(report.uncovered.len(), m.actions().len());
        assert_eq!(report.event_count, 0);
    }

    #[test]
    fn base_mismatch_detected() {
        let m = base();
        let d = DynamicModel { base_name: "other".into(), ..Default::default() };
        assert!(matches!(coverage(&m, &d), Err(CarvingError::BaseMismatch { .. })));
    }

    #[test]
    fn classification_rules() {
        let m = base();
        let region = |names: &[&str]| Region {
            actions: names.iter().map(|n| m.action_by_name(n).unwrap()).collect(),
        };
        let ev = |names: &[&str]| Event {
            id: "e".into(),
            description: String::new(),
            region: region(names),
            time: None,
        };
        // Oxygen flows to the heart: inter-thimac transfer pair.
        assert_eq!(
            classify_event(
                &ev(&["Lungs.release", "Lungs.transfer@out", "Heart.transfer", "Heart.receive"]),
                &m
            ),
            EventClass::Transport
        );
        // Air is processed to produce oxygen.
        assert_eq!(
            classify_event(&ev(&["Lungs.process", "Lungs.create"]), &m),
            EventClass::Transformation
        );
        // Air enters the lungs from outside the model.
        assert_eq!(
            classify_event(&ev(&["Lungs.transfer@in", "Lungs.receive"]), &m),
            EventClass::Export
        );
        // Untriggered creation-only region.
        assert_eq!(classify_event(&ev(&["Gut.create"]), &m), EventClass::Structural);
    }

    #[test]
    fn carving_kind_counts() {
        let m = base();
        let d = DynamicModel { base_name: m.name.clone(), ..Default::default() };
        assert_eq!(carving_kind(&m, &d), CarvingKind { structural: 0, processual: 0 });
    }
}
