//! Textual TM model format: static `.tm`, dynamic `.tmd`, scenario `.scn`.
//!
//! The grammar is line-oriented; a line whose first non-blank character
//! is `#` is a comment. Static documents:
//!
//! ```text
//! thimac NAME [in PARENT] { }
//! flow THING: EP (-> EP)+          EP = THIMAC.ACTION[@INSTANCE][#STEP]
//! trigger EP -> EP [#NOTE]
//! ```
//!
//! Dynamic documents:
//!
//! ```text
//! event ID ["DESCRIPTION"] { EP (, EP)* }
//! chron FROM -> TO [guard GROUP=LABEL] [repeat]
//! ```
//!
//! Scenario documents:
//!
//! ```text
//! scenario NAME
//! choose GROUP = LABEL
//! repeat FROM->TO = N
//! ```
//!
//! `@INSTANCE` disambiguates several same-kind actions in one thimac;
//! `#STEP` attaches a step-number annotation to the action (`#NOTE` on a
//! trigger line annotates the arc). Endpoint references use bare thimac
//! names, so names must be unique across the whole document, not just
//! among siblings.

use std::collections::{BTreeMap, BTreeSet};

use crate::metamodel::{
    ActionId, ActionKind, Chronology, ChronEdge, Endpoint, Event, ModelError, StaticModel,
};
use crate::report::SourceDiagnostic;

/// Events and chronology superimposed on a base static model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicModel {
    pub base_name: String,
    pub events: Vec<Event>,
    pub chronology: Chronology,
}

impl DynamicModel {
    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn event_ids(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.id.as_str()).collect()
    }
}

/// Guard choices and loop bounds resolving one run of a chronology.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub guard_choices: BTreeMap<String, String>,
    pub repeat_bounds: BTreeMap<String, u64>,
}

type ParseResult<T> = Result<T, Vec<SourceDiagnostic>>;

fn err(code: &str, msg: impl Into<String>, line: usize, col: usize) -> SourceDiagnostic {
    SourceDiagnostic::error(code, msg, line, col)
}

/// Raw endpoint reference as written in the source.
#[derive(Debug, Clone)]
struct EndpointRef {
    thimac: String,
    kind: ActionKind,
    instance: Option<String>,
    step: Option<String>,
}

fn parse_endpoint(text: &str, line: usize) -> Result<EndpointRef, SourceDiagnostic> {
    let text = text.trim();
    let (thimac, action) = text
        .split_once('.')
        .ok_or_else(|| err("E-SYNTAX", format!("expected THIMAC.ACTION, got `{text}`"), line, 1))?;
    if thimac.is_empty() {
        return Err(err("E-SYNTAX", "empty thimac name in endpoint", line, 1));
    }
    let (action, step) = match action.split_once('#') {
        Some((a, s)) => (a, Some(s.to_string())),
        None => (action, None),
    };
    let (kind_str, instance) = match action.split_once('@') {
        Some((k, i)) => (k, Some(i.to_string())),
        None => (action, None),
    };
    let kind = ActionKind::from_keyword(kind_str).ok_or_else(|| {
        err("E-SYNTAX", format!("unknown action kind `{kind_str}`"), line, 1)
    })?;
    Ok(EndpointRef { thimac: thimac.to_string(), kind, instance, step })
}

fn resolve_thimac(
    model: &StaticModel,
    name: &str,
    line: usize,
) -> Result<crate::metamodel::ThimacId, SourceDiagnostic> {
    let matches: Vec<_> = model.thimacs().iter().filter(|t| t.name == name).collect();
    match matches.len() {
        0 => Err(err("E-UNDECLARED", format!("undeclared thimac `{name}`"), line, 1)),
        1 => Ok(matches[0].id),
        _ => Err(err("E-AMBIGUOUS", format!("thimac name `{name}` is not unique"), line, 1)),
    }
}

fn to_endpoint(
    model: &StaticModel,
    r: &EndpointRef,
    line: usize,
) -> Result<Endpoint, SourceDiagnostic> {
    let id = resolve_thimac(model, &r.thimac, line)?;
    let mut ep = Endpoint::new(id, r.kind);
    ep.instance = r.instance.clone();
    ep.step = r.step.clone();
    Ok(ep)
}

fn model_error_code(e: &ModelError) -> &'static str {
    match e {
        ModelError::IllegalAdjacency { .. } => "E-ADJ",
        ModelError::SameThimacTransfer | ModelError::CrossThimacFlow { .. } => "E-SAME-THIMAC",
        ModelError::DuplicateSiblingName(_) => "E-DUP-NAME",
        ModelError::UnknownThimac(_) => "E-UNDECLARED",
        ModelError::StepLabelConflict { .. } => "E-LABEL",
        ModelError::TriggerDuplicatesFlow => "E-TRIGGER-DUP",
        ModelError::TooFewEndpoints => "E-SYNTAX",
        _ => "E-MODEL",
    }
}

/// Lines of the document with comments and blanks removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_static(text: &str) -> ParseResult<StaticModel> {
    parse_static_named(text, "")
}

/// Parse a static document. On success the returned model is frozen.
pub fn parse_static_named(text: &str, name: &str) -> ParseResult<StaticModel> {
    let mut model = StaticModel::new(name);
    let mut diags: Vec<SourceDiagnostic> = Vec::new();

    for (line_no, line) in content_lines(text) {
        if let Err(d) = parse_static_line(&mut model, line, line_no) {
            diags.push(d);
        }
    }

    if diags.is_empty() {
        model.freeze();
        Ok(model)
    } else {
        Err(diags)
    }
}

fn parse_static_line(
    model: &mut StaticModel,
    line: &str,
    line_no: usize,
) -> Result<(), SourceDiagnostic> {
    let keyword = line.split_whitespace().next().unwrap_or("");
    match keyword {
        "thimac" => {
            let rest = line["thimac".len()..].trim();
            let rest = rest.trim_end_matches("{ }").trim_end_matches("{}").trim();
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            let (name, parent) = match tokens.as_slice() {
                [name] => (*name, None),
                [name, "in", parent] => (*name, Some(*parent)),
                _ => {
                    return Err(err(
                        "E-SYNTAX",
                        "expected `thimac NAME [in PARENT] { }`",
                        line_no,
                        1,
                    ))
                }
            };
            let parent_id = match parent {
                Some(p) => Some(resolve_thimac(model, p, line_no)?),
                None => None,
            };
            model
                .add_thimac(name, parent_id)
                .map(|_| ())
                .map_err(|e| err(model_error_code(&e), e.to_string(), line_no, 1))
        }
        "flow" => {
            let rest = line["flow".len()..].trim();
            let (thing, chain) = rest.split_once(':').ok_or_else(|| {
                err("E-SYNTAX", "expected `flow THING: EP -> EP ...`", line_no, 1)
            })?;
            let thing = thing.trim();
            if thing.is_empty() {
                return Err(err("E-SYNTAX", "flow needs a thing label", line_no, 1));
            }
            let mut eps = Vec::new();
            for part in chain.split("->") {
                let r = parse_endpoint(part, line_no)?;
                eps.push(to_endpoint(model, &r, line_no)?);
            }
            model
                .add_flow(thing, &eps)
                .map(|_| ())
                .map_err(|e| err(model_error_code(&e), e.to_string(), line_no, 1))
        }
        "trigger" => {
            let rest = line["trigger".len()..].trim();
            let (lhs, rhs) = rest.split_once("->").ok_or_else(|| {
                err("E-SYNTAX", "expected `trigger EP -> EP [#NOTE]`", line_no, 1)
            })?;
            let from = parse_endpoint(lhs, line_no)?;
            let mut tokens: Vec<&str> = rhs.split_whitespace().collect();
            let note = match tokens.last() {
                Some(t) if t.starts_with('#') => {
                    let n = t[1..].to_string();
                    tokens.pop();
                    Some(n)
                }
                _ => None,
            };
            let to = parse_endpoint(&tokens.join(" "), line_no)?;
            let from = to_endpoint(model, &from, line_no)?;
            let to = to_endpoint(model, &to, line_no)?;
            model
                .add_trigger(&from, &to, note)
                .map(|_| ())
                .map_err(|e| err(model_error_code(&e), e.to_string(), line_no, 1))
        }
        "event" | "chron" => Err(err(
            "E-SYNTAX",
            format!("`{keyword}` lines belong in a dynamic (.tmd) document"),
            line_no,
            1,
        )),
        other => Err(err("E-SYNTAX", format!("unknown directive `{other}`"), line_no, 1)),
    }
}

/// Parse a dynamic document against a frozen base model.
pub fn parse_dynamics(text: &str, base: &StaticModel) -> ParseResult<DynamicModel> {
    assert!(base.is_frozen(), "base model must be frozen");
    let mut dynm = DynamicModel {
        base_name: base.name.clone(),
        events: Vec::new(),
        chronology: Chronology::default(),
    };
    let mut diags = Vec::new();

    for (line_no, line) in content_lines(text) {
        if let Err(d) = parse_dynamic_line(&mut dynm, base, line, line_no) {
            diags.push(d);
        }
    }

    // Non-repeat edges must form a DAG.
    if let Some(cycle) = non_repeat_cycle(&dynm.chronology) {
        diags.push(err(
            "E-CYCLE",
            format!("chronology has a non-repeat cycle through {}", cycle.join(" -> ")),
            text.lines().count().max(1),
            1,
        ));
    }

    if diags.is_empty() {
        Ok(dynm)
    } else {
        Err(diags)
    }
}

fn parse_dynamic_line(
    dynm: &mut DynamicModel,
    base: &StaticModel,
    line: &str,
    line_no: usize,
) -> Result<(), SourceDiagnostic> {
    let keyword = line.split_whitespace().next().unwrap_or("");
    match keyword {
        "event" => {
            let rest = line["event".len()..].trim();
            let open = rest.find('{').ok_or_else(|| {
                err("E-SYNTAX", "expected `event ID [\"DESC\"] { EP, ... }`", line_no, 1)
            })?;
            let close = rest.rfind('}').ok_or_else(|| {
                err("E-SYNTAX", "unterminated `{` in event line", line_no, 1)
            })?;
            let head = rest[..open].trim();
            let body = &rest[open + 1..close];
            let (id, description) = match head.split_once(' ') {
                Some((id, desc)) => {
                    let desc = desc.trim();
                    let desc = desc.strip_prefix('"').and_then(|d| d.strip_suffix('"')).ok_or_else(
                        || err("E-SYNTAX", "event description must be quoted", line_no, 1),
                    )?;
                    (id.trim(), desc.to_string())
                }
                None => (head, String::new()),
            };
            if id.is_empty() {
                return Err(err("E-SYNTAX", "event needs an id", line_no, 1));
            }
            if dynm.event(id).is_some() {
                return Err(err("E-DUP-EVENT", format!("duplicate event id `{id}`"), line_no, 1));
            }
            let mut actions: BTreeSet<ActionId> = BTreeSet::new();
            for part in body.split(',') {
                let r = parse_endpoint(part, line_no)?;
                let tid = resolve_thimac(base, &r.thimac, line_no)?;
                let aid = base
                    .find_action(tid, r.kind, r.instance.as_deref())
                    .ok_or_else(|| {
                        err(
                            "E-REGION",
                            format!("action `{}` is not part of the base model", part.trim()),
                            line_no,
                            1,
                        )
                    })?;
                actions.insert(aid);
            }
            let region = base.subregion(&actions).map_err(|e| {
                err("E-REGION", format!("invalid region for event `{id}`: {e}"), line_no, 1)
            })?;
            dynm.events.push(Event {
                id: id.to_string(),
                description,
                region,
                time: None,
            });
            Ok(())
        }
        "chron" => {
            let rest = line["chron".len()..].trim();
            let (lhs, rhs) = rest
                .split_once("->")
                .ok_or_else(|| err("E-SYNTAX", "expected `chron FROM -> TO ...`", line_no, 1))?;
            let from = lhs.trim().to_string();
            let mut tokens = rhs.split_whitespace();
            let to = tokens
                .next()
                .ok_or_else(|| err("E-SYNTAX", "chron edge needs a target", line_no, 1))?
                .to_string();
            let mut guard = None;
            let mut repeat = false;
            while let Some(tok) = tokens.next() {
                match tok {
                    "guard" => {
                        let spec = tokens.next().ok_or_else(|| {
                            err("E-SYNTAX", "expected `guard GROUP=LABEL`", line_no, 1)
                        })?;
                        let (g, l) = spec.split_once('=').ok_or_else(|| {
                            err("E-SYNTAX", "expected `guard GROUP=LABEL`", line_no, 1)
                        })?;
                        guard = Some((g.to_string(), l.to_string()));
                    }
                    "repeat" => repeat = true,
                    other => {
                        return Err(err(
                            "E-SYNTAX",
                            format!("unexpected token `{other}` on chron line"),
                            line_no,
                            1,
                        ))
                    }
                }
            }
            for id in [&from, &to] {
                if dynm.event(id).is_none() {
                    return Err(err(
                        "E-EVENT",
                        format!("chronology references undeclared event `{id}`"),
                        line_no,
                        1,
                    ));
                }
            }
            dynm.chronology.edges.push(ChronEdge { from, to, guard, repeat });
            Ok(())
        }
        "thimac" | "flow" | "trigger" => Err(err(
            "E-SYNTAX",
            format!("`{keyword}` lines belong in a static (.tm) document"),
            line_no,
            1,
        )),
        other => Err(err("E-SYNTAX", format!("unknown directive `{other}`"), line_no, 1)),
    }
}

/// Find a cycle among non-repeat edges, if any (ids on the cycle).
pub fn non_repeat_cycle(chron: &Chronology) -> Option<Vec<String>> {
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut nodes: BTreeSet<&str> = BTreeSet::new();
    for e in chron.edges.iter().filter(|e| !e.repeat) {
        out.entry(&e.from).or_default().push(&e.to);
        nodes.insert(&e.from);
        nodes.insert(&e.to);
    }
    // Iterative DFS with colors.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color: BTreeMap<&str, Color> = nodes.iter().map(|&n| (n, Color::White)).collect();
    for &root in &nodes {
        if color[root] != Color::White {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        let mut path = vec![root];
        color.insert(root, Color::Gray);
        while let Some(&mut (node, ref mut idx)) = stack.last_mut() {
            let succs = out.get(node).map(|v| v.as_slice()).unwrap_or(&[]);
            if *idx < succs.len() {
                let next = succs[*idx];
                *idx += 1;
                match color[next] {
                    Color::Gray => {
                        let pos = path.iter().position(|&p| p == next).unwrap();
                        let mut cycle: Vec<String> =
                            path[pos..].iter().map(|s| s.to_string()).collect();
                        cycle.push(next.to_string());
                        return Some(cycle);
                    }
                    Color::White => {
                        color.insert(next, Color::Gray);
                        stack.push((next, 0));
                        path.push(next);
                    }
                    Color::Black => {}
                }
            } else {
                color.insert(node, Color::Black);
                stack.pop();
                path.pop();
            }
        }
    }
    None
}

/// Parse a scenario document.
pub fn parse_scenario(text: &str, fallback_name: &str) -> ParseResult<Scenario> {
    let mut s = Scenario { name: fallback_name.to_string(), ..Default::default() };
    let mut diags = Vec::new();
    for (line_no, line) in content_lines(text) {
        let keyword = line.split_whitespace().next().unwrap_or("");
        let result: Result<(), SourceDiagnostic> = (|| {
            match keyword {
                "scenario" => {
                    s.name = line["scenario".len()..].trim().to_string();
                    Ok(())
                }
                "choose" => {
                    let rest = line["choose".len()..].trim();
                    let (g, l) = rest.split_once('=').ok_or_else(|| {
                        err("E-SYNTAX", "expected `choose GROUP = LABEL`", line_no, 1)
                    })?;
                    s.guard_choices.insert(g.trim().to_string(), l.trim().to_string());
                    Ok(())
                }
                "repeat" => {
                    let rest = line["repeat".len()..].trim();
                    let (g, n) = rest.split_once('=').ok_or_else(|| {
                        err("E-SYNTAX", "expected `repeat GROUP = N`", line_no, 1)
                    })?;
                    let n: u64 = n.trim().parse().map_err(|_| {
                        err("E-SYNTAX", "repeat bound must be a positive integer", line_no, 1)
                    })?;
                    if n == 0 {
                        return Err(err(
                            "E-SYNTAX",
                            "repeat bound must be positive",
                            line_no,
                            1,
                        ));
                    }
                    s.repeat_bounds.insert(g.trim().to_string(), n);
                    Ok(())
                }
                other => Err(err("E-SYNTAX", format!("unknown directive `{other}`"), line_no, 1)),
            }
        })();
        if let Err(d) = result {
            diags.push(d);
        }
    }
    if diags.is_empty() {
        Ok(s)
    } else {
        Err(diags)
    }
}

fn endpoint_text(model: &StaticModel, id: ActionId, with_step: bool) -> String {
    let a = model.action(id).unwrap();
    let mut s = model.action_name(id);
    if with_step {
        if let Some(step) = &a.label {
            s.push('#');
            s.push_str(step);
        }
    }
    s
}

/// Serialize a static model. Reparsing the output yields an isomorphic
/// model.
pub fn serialize_static(model: &StaticModel) -> String {
    let mut out = String::new();
    for t in model.thimacs() {
        match t.parent {
            Some(p) => out.push_str(&format!(
                "thimac {} in {} {{ }}\n",
                t.name,
                model.thimac(p).unwrap().name
            )),
            None => out.push_str(&format!("thimac {} {{ }}\n", t.name)),
        }
    }
    // Step labels are emitted on the first textual occurrence of each
    // action so they are attached exactly once on reparse.
    let mut labeled: BTreeSet<ActionId> = BTreeSet::new();
    let ep = |id: ActionId, labeled: &mut BTreeSet<ActionId>| {
        let first = labeled.insert(id);
        endpoint_text(model, id, first)
    };
    for f in model.flows() {
        let from = ep(f.from, &mut labeled);
        let to = ep(f.to, &mut labeled);
        out.push_str(&format!("flow {}: {} -> {}\n", f.thing, from, to));
    }
    for t in model.triggers() {
        let from = ep(t.from, &mut labeled);
        let to = ep(t.to, &mut labeled);
        match &t.note {
            Some(n) => out.push_str(&format!("trigger {} -> {} #{}\n", from, to, n)),
            None => out.push_str(&format!("trigger {} -> {}\n", from, to)),
        }
    }
    out
}

/// Serialize a dynamic model.
pub fn serialize_dynamics(dynm: &DynamicModel, base: &StaticModel) -> String {
    let mut out = String::new();
    for e in &dynm.events {
        let eps: Vec<String> = e
            .region
            .actions
            .iter()
            .map(|&a| endpoint_text(base, a, false))
            .collect();
        if e.description.is_empty() {
            out.push_str(&format!("event {} {{ {} }}\n", e.id, eps.join(", ")));
        } else {
            out.push_str(&format!(
                "event {} \"{}\" {{ {} }}\n",
                e.id,
                e.description,
                eps.join(", ")
            ));
        }
    }
    for e in &dynm.chronology.edges {
        let mut line = format!("chron {} -> {}", e.from, e.to);
        if let Some((g, l)) = &e.guard {
            line.push_str(&format!(" guard {}={}", g, l));
        }
        if e.repeat {
            line.push_str(" repeat");
        }
        line.push('\n');
        out.push_str(&line);
    }
    out
}

/// Serialize a scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = format!("scenario {}\n", s.name);
    for (g, l) in &s.guard_choices {
        out.push_str(&format!("choose {} = {}\n", g, l));
    }
    for (g, n) in &s.repeat_bounds {
        out.push_str(&format!("repeat {} = {}\n", g, n));
    }
    out
}

/// Canonical structural form: equality on it is model isomorphism
/// (bijection on thimacs/actions/arcs preserving names, kinds, labels,
/// and arc structure).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalStatic {
    pub thimacs: BTreeSet<String>,
    pub actions: BTreeSet<(String, Option<String>)>,
    pub flows: BTreeMap<(String, String, String), usize>,
    pub triggers: BTreeMap<(String, String, Option<String>), usize>,
}

fn action_key(model: &StaticModel, id: ActionId) -> String {
    let a = model.action(id).unwrap();
    let path = model.thimac_path(a.owner);
    match &a.instance {
        Some(i) => format!("{path}.{}@{i}", a.kind),
        None => format!("{path}.{}", a.kind),
    }
}

pub fn canonical_static(model: &StaticModel) -> CanonicalStatic {
    let thimacs = model.thimacs().iter().map(|t| model.thimac_path(t.id)).collect();
    let actions = model
        .actions()
        .iter()
        .map(|a| (action_key(model, a.id), a.label.clone()))
        .collect();
    let mut flows: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    for f in model.flows() {
        *flows
            .entry((action_key(model, f.from), action_key(model, f.to), f.thing.clone()))
            .or_default() += 1;
    }
    let mut triggers: BTreeMap<(String, String, Option<String>), usize> = BTreeMap::new();
    for t in model.triggers() {
        *triggers
            .entry((action_key(model, t.from), action_key(model, t.to), t.note.clone()))
            .or_default() += 1;
    }
    CanonicalStatic { thimacs, actions, flows, triggers }
}

pub fn isomorphic(a: &StaticModel, b: &StaticModel) -> bool {
    canonical_static(a) == canonical_static(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# a small model
thimac Lungs { }
thimac Heart { }
flow air: Lungs.transfer@in#1 -> Lungs.receive#2 -> Lungs.process#3
trigger Lungs.process -> Lungs.create #4
flow oxygen: Lungs.create -> Lungs.release -> Lungs.transfer@out -> Heart.transfer -> Heart.receive
";

    #[test]
    fn empty_document_yields_empty_model() {
        let m = parse_static("").unwrap();
        assert!(m.is_frozen());
        assert!(m.thimacs().is_empty());
        assert!(m.actions().is_empty());
    }

    #[test]
    fn small_model_parses() {
        let m = parse_static(SMALL).unwrap();
        assert_eq!(m.thimacs().len(), 2);
        assert_eq!(m.flows().len(), 6);
        assert_eq!(m.triggers().len(), 1);
        assert_eq!(m.step_labels().len(), 4);
    }

    #[test]
    fn adjacency_violation_reports_line() {
        let doc = "thimac A { }\nflow x: A.release -> A.receive\n";
        let diags = parse_static(doc).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "E-ADJ");
        assert_eq!(diags[0].line, 2);
    }

    #[test]
    fn undeclared_thimac_is_an_error() {
        let doc = "flow x: A.create -> A.release\n";
        let diags = parse_static(doc).unwrap_err();
        assert_eq!(diags[0].code, "E-UNDECLARED");
    }

    #[test]
    fn roundtrip_small_model() {
        let m1 = parse_static(SMALL).unwrap();
        let text = serialize_static(&m1);
        let m2 = parse_static(&text).unwrap();
        assert!(isomorphic(&m1, &m2));
    }

    #[test]
    fn parse_is_deterministic() {
        let a = parse_static(SMALL).unwrap();
        let b = parse_static(SMALL).unwrap();
        assert_eq!(canonical_static(&a), canonical_static(&b));
    }

    #[test]
    fn dynamics_parse_and_cycle_detection() {
        let base = parse_static(SMALL).unwrap();
        let dyn_ok = "\
event E1 \"Air enters the lungs\" { Lungs.transfer@in, Lungs.receive }
event E2 { Lungs.process, Lungs.create }
chron E1 -> E2
chron E2 -> E1 repeat
";
        let d = parse_dynamics(dyn_ok, &base).unwrap();
        assert_eq!(d.events.len(), 2);
        assert_eq!(d.events[0].description, "Air enters the lungs");
        assert_eq!(d.chronology.edges.len(), 2);

        let dyn_cycle = "\
event E1 { Lungs.transfer@in, Lungs.receive }
event E2 { Lungs.process, Lungs.create }
chron E1 -> E2
chron E2 -> E1
";
        let diags = parse_dynamics(dyn_cycle, &base).unwrap_err();
        assert!(diags.iter().any(|d| d.code == "E-CYCLE"));
    }

    #[test]
    fn event_region_must_be_in_base() {
        let base = parse_static(SMALL).unwrap();
        let doc = "event E1 { Lungs.transfer@in, Gut.receive }\n";
        let diags = parse_dynamics(doc, &base).unwrap_err();
        assert_eq!(diags[0].code, "E-UNDECLARED");
        let doc = "event E1 { Lungs.transfer@nope }\n";
        let diags = parse_dynamics(doc, &base).unwrap_err();
        assert_eq!(diags[0].code, "E-REGION");
    }

    #[test]
    fn disconnected_event_region_rejected() {
        let base = parse_static(SMALL).unwrap();
        let doc = "event E1 { Lungs.transfer@in, Heart.receive }\n";
        let diags = parse_dynamics(doc, &base).unwrap_err();
        assert_eq!(diags[0].code, "E-REGION");
    }

    #[test]
    fn scenario_parses() {
        let s = parse_scenario(
            "scenario duplicate-ssn\nchoose found = yes\nrepeat E3->E2 = 3\n",
            "fallback",
        )
        .unwrap();
        assert_eq!(s.name, "duplicate-ssn");
        assert_eq!(s.guard_choices["found"], "yes");
        assert_eq!(s.repeat_bounds["E3->E2"], 3);
    }

    #[test]
    fn dynamics_roundtrip() {
        let base = parse_static(SMALL).unwrap();
        let doc = "\
event E1 \"Air enters the lungs\" { Lungs.transfer@in, Lungs.receive }
event E2 { Lungs.process, Lungs.create }
chron E1 -> E2 guard g=yes
";
        let d1 = parse_dynamics(doc, &base).unwrap();
        let text = serialize_dynamics(&d1, &base);
        let d2 = parse_dynamics(&text, &base).unwrap();
        assert_eq!(d1.events, d2.events);
        assert_eq!(d1.chronology, d2.chronology);
    }
}
