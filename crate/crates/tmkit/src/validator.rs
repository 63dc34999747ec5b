//! Structural rules over static models (R1-R5) and well-formedness
//! rules over dynamic models (R6-R9), emitting coded diagnostics.

use std::collections::{BTreeMap, BTreeSet};

use crate::dsl::{non_repeat_cycle, DynamicModel};
use crate::metamodel::{ActionId, ActionKind, AdjacencySet, StaticModel};
use crate::report::{sort_diagnostics, RuleDiagnostic, Severity};

/// Rule configuration. The default adjacency set is strict; extra legal
/// kind-pairs may be admitted here.
#[derive(Debug, Clone, Default)]
pub struct RuleConfig {
    pub extra_adjacency: Vec<(ActionKind, ActionKind)>,
}

/// The default rule-config document, commented. Kept in sync with
/// `AdjacencySet::default`.
pub const DEFAULT_RULE_CONFIG: &str = "\
# Flow adjacency rules. The built-in legal pairs are:
#   create -> process
#   create -> release
#   process -> release
#   release -> transfer
#   transfer -> transfer   (must cross thimac boundaries)
#   transfer -> receive
#   receive -> process
# Additional pairs can be admitted with lines of the form:
#   allow KIND -> KIND
# Notably, receive -> release (pass-through without processing) is NOT
# in the default set; uncomment to admit it:
#   allow receive -> release
";

impl RuleConfig {
    /// Parse `allow KIND -> KIND` lines; `#` lines are comments.
    pub fn parse(text: &str) -> Result<RuleConfig, String> {
        let mut cfg = RuleConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rest = line
                .strip_prefix("allow")
                .ok_or_else(|| format!("line {}: expected `allow KIND -> KIND`", i + 1))?;
            let (a, b) = rest
                .split_once("->")
                .ok_or_else(|| format!("line {}: expected `allow KIND -> KIND`", i + 1))?;
            let parse = |s: &str| {
                ActionKind::from_keyword(s.trim())
                    .ok_or_else(|| format!("line {}: unknown action kind `{}`", i + 1, s.trim()))
            };
            cfg.extra_adjacency.push((parse(a)?, parse(b)?));
        }
        Ok(cfg)
    }

    pub fn adjacency(&self) -> AdjacencySet {
        let mut adj = AdjacencySet::default();
        for &(a, b) in &self.extra_adjacency {
            adj.allow(a, b);
        }
        adj
    }
}

fn diag(
    severity: Severity,
    code: &str,
    subjects: Vec<String>,
    message: String,
) -> RuleDiagnostic {
    RuleDiagnostic::new(severity, code, subjects, message)
}

/// Check R1-R5 on a frozen static model. The diagnostic list is
/// deterministic: stable sort by (code, subject).
pub fn validate_static(model: &StaticModel) -> Vec<RuleDiagnostic> {
    validate_static_with(model, &RuleConfig::default())
}

pub fn validate_static_with(model: &StaticModel, config: &RuleConfig) -> Vec<RuleDiagnostic> {
    assert!(model.is_frozen(), "validate_static requires a frozen model");
    let adjacency = config.adjacency();
    let mut diags = Vec::new();

    let kind = |id: ActionId| model.action(id).unwrap().kind;
    let owner = |id: ActionId| model.action(id).unwrap().owner;

    // R1: legal kind adjacency on every flow arc.
    for f in model.flows() {
        let (fk, tk) = (kind(f.from), kind(f.to));
        if !adjacency.allows(fk, tk) {
            diags.push(diag(
                Severity::Error,
                "E-ADJ",
                vec![model.action_name(f.from), model.action_name(f.to)],
                format!("illegal flow adjacency {fk} -> {tk}"),
            ));
        }
    }

    // R2: transfer->transfer crosses thimacs; everything else stays inside.
    for f in model.flows() {
        let transfer_pair =
            kind(f.from) == ActionKind::Transfer && kind(f.to) == ActionKind::Transfer;
        let cross = owner(f.from) != owner(f.to);
        if transfer_pair && !cross {
            diags.push(diag(
                Severity::Error,
                "E-SAME-THIMAC",
                vec![model.action_name(f.from), model.action_name(f.to)],
                "transfer -> transfer flow must cross thimac boundaries".into(),
            ));
        } else if !transfer_pair && cross {
            diags.push(diag(
                Severity::Error,
                "E-SAME-THIMAC",
                vec![model.action_name(f.from), model.action_name(f.to)],
                format!("{} -> {} flow must stay inside one thimac", kind(f.from), kind(f.to)),
            ));
        }
    }

    // R3: a transfer with an incoming inter-thimac arc but no outgoing
    // arc to a receive: the thing is input but never received.
    for a in model.actions().iter().filter(|a| a.kind == ActionKind::Transfer) {
        let has_incoming_cross = model
            .flows()
            .iter()
            .any(|f| f.to == a.id && owner(f.from) != a.owner);
        let feeds_receive = model
            .flows()
            .iter()
            .any(|f| f.from == a.id && kind(f.to) == ActionKind::Receive);
        if has_incoming_cross && !feeds_receive {
            diags.push(diag(
                Severity::Warning,
                "W-DANGLING-INPUT",
                vec![model.action_name(a.id)],
                "thing is input but never received".into(),
            ));
        }
    }

    // R4: a release with no outgoing arc to a transfer: the thing is
    // released but never flows outside the machine.
    for a in model.actions().iter().filter(|a| a.kind == ActionKind::Release) {
        let feeds_transfer = model
            .flows()
            .iter()
            .any(|f| f.from == a.id && kind(f.to) == ActionKind::Transfer);
        if !feeds_transfer {
            diags.push(diag(
                Severity::Warning,
                "W-DANGLING-OUTPUT",
                vec![model.action_name(a.id)],
                "thing is released but never transferred".into(),
            ));
        }
    }

    // R5: self-triggers.
    for t in model.triggers() {
        if t.from == t.to {
            diags.push(diag(
                Severity::Warning,
                "W-SELF-TRIGGER",
                vec![model.action_name(t.from)],
                "trigger arc with identical endpoints".into(),
            ));
        }
    }

    sort_diagnostics(&mut diags);
    diags
}

/// Check R6-R9 on a dynamic model over its validated base.
pub fn validate_dynamic(dynm: &DynamicModel, base: &StaticModel) -> Vec<RuleDiagnostic> {
    let mut diags = Vec::new();

    // R6: every event region is a connected sub-diagram of the base.
    for e in &dynm.events {
        let ok = e.region.actions.iter().all(|&a| base.action(a).is_some())
            && base.is_connected_subset(&e.region.actions);
        if !ok {
            diags.push(diag(
                Severity::Error,
                "E-REGION",
                vec![e.id.clone()],
                "event region is not a connected sub-diagram of the base model".into(),
            ));
        }
    }

    // R7: chronology restricted to non-repeat edges is acyclic.
    if let Some(cycle) = non_repeat_cycle(&dynm.chronology) {
        diags.push(diag(
            Severity::Error,
            "E-CYCLE",
            cycle.clone(),
            format!("non-repeat cycle through {}", cycle.join(" -> ")),
        ));
    }

    // R8: overlapping event regions (allowed; reported per shared action).
    let mut sharing: BTreeMap<ActionId, Vec<&str>> = BTreeMap::new();
    for e in &dynm.events {
        for &a in &e.region.actions {
            sharing.entry(a).or_default().push(&e.id);
        }
    }
    for (a, events) in &sharing {
        if events.len() > 1 {
            diags.push(diag(
                Severity::Warning,
                "W-OVERLAP",
                vec![base.action_name(*a)],
                format!("action shared by events {}", events.join(", ")),
            ));
        }
    }

    // R9: base actions covered by no event region.
    let covered: BTreeSet<ActionId> = sharing.keys().copied().collect();
    for a in base.actions() {
        if !covered.contains(&a.id) {
            diags.push(diag(
                Severity::Warning,
                "W-UNCOVERED",
                vec![base.action_name(a.id)],
                "action belongs to no event region".into(),
            ));
        }
    }

    sort_diagnostics(&mut diags);
    diags
}

pub fn has_errors(diags: &[RuleDiagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
