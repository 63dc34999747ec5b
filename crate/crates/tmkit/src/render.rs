//! DOT emission for static models, event overlays, and chronologies.
//!
//! Thimacs become nested clusters, actions nodes, flows solid edges
//! labeled with thing names, triggers dashed edges. Output ordering is
//! stable, so renders are byte-reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::dsl::DynamicModel;
use crate::metamodel::{ActionId, StaticModel, ThimacId};

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    pub show_step_labels: bool,
    pub highlight_events: Option<Vec<String>>,
    pub rankdir: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("highlighted event `{0}` does not exist in the dynamic model")]
    UnknownHighlight(String),
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_id(a: ActionId) -> String {
    format!("a{}", a.0)
}

fn node_label(model: &StaticModel, a: ActionId, opts: &RenderOptions) -> String {
    let action = model.action(a).unwrap();
    let mut label = match &action.instance {
        Some(i) => format!("{}@{}", action.kind, i),
        None => action.kind.to_string(),
    };
    if opts.show_step_labels {
        if let Some(step) = &action.label {
            label.push_str(&format!(" ({step})"));
        }
    }
    label
}

struct Emitter<'m> {
    model: &'m StaticModel,
    opts: &'m RenderOptions,
    /// Event clusters per thimac: (event id, actions), non-overlapping.
    event_clusters: BTreeMap<ThimacId, Vec<(String, BTreeSet<ActionId>)>>,
    highlighted: BTreeSet<ActionId>,
    out: String,
}

impl<'m> Emitter<'m> {
    fn node_line(&mut self, indent: &str, a: ActionId) {
        let extra = if self.highlighted.contains(&a) {
            ", style=filled, fillcolor=lightblue"
        } else {
            ""
        };
        let _ = writeln!(
            self.out,
            "{indent}{} [label=\"{}\"{extra}];",
            node_id(a),
            escape(&node_label(self.model, a, self.opts))
        );
    }

    fn emit_thimac(&mut self, t: ThimacId, depth: usize) {
        let indent = "  ".repeat(depth);
        let thimac = self.model.thimac(t).unwrap();
        let _ = writeln!(self.out, "{indent}subgraph cluster_t{} {{", t.0);
        let _ = writeln!(self.out, "{indent}  label=\"{}\";", escape(&thimac.name));

        let clusters = self.event_clusters.get(&t).cloned().unwrap_or_default();
        let clustered: BTreeSet<ActionId> =
            clusters.iter().flat_map(|(_, acts)| acts.iter().copied()).collect();
        for (event_id, actions) in &clusters {
            let _ = writeln!(self.out, "{indent}  // boundary {event_id}");
            let _ = writeln!(
                self.out,
                "{indent}  subgraph \"cluster_event_{}\" {{",
                escape(event_id)
            );
            let _ = writeln!(
                self.out,
                "{indent}    label=\"{}\"; style=dashed;",
                escape(event_id)
            );
            for &a in actions {
                self.node_line(&format!("{indent}    "), a);
            }
            let _ = writeln!(self.out, "{indent}  }}");
        }
        let own: Vec<ActionId> = thimac.actions.clone();
        for a in own {
            if !clustered.contains(&a) {
                self.node_line(&format!("{indent}  "), a);
            }
        }
        let children: Vec<ThimacId> = self
            .model
            .thimacs()
            .iter()
            .filter(|c| c.parent == Some(t))
            .map(|c| c.id)
            .collect();
        for c in children {
            self.emit_thimac(c, depth + 1);
        }
        let _ = writeln!(self.out, "{indent}}}");
    }

    fn emit_edges(&mut self) {
        for f in self.model.flows() {
            let mut label = f.thing.clone();
            if self.opts.show_step_labels {
                if let Some(step) = &self.model.action(f.to).unwrap().label {
                    label.push_str(&format!(" ({step})"));
                }
            }
            let _ = writeln!(
                self.out,
                "  {} -> {} [label=\"{}\"];",
                node_id(f.from),
                node_id(f.to),
                escape(&label)
            );
        }
        for t in self.model.triggers() {
            let label = match (&t.note, self.opts.show_step_labels) {
                (Some(n), true) => format!(" [style=dashed, label=\"({})\"]", escape(n)),
                _ => " [style=dashed]".to_string(),
            };
            let _ = writeln!(
                self.out,
                "  {} -> {}{};",
                node_id(t.from),
                node_id(t.to),
                label
            );
        }
    }
}

fn render(
    model: &StaticModel,
    dynm: Option<&DynamicModel>,
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    let mut highlighted = BTreeSet::new();
    if let (Some(ids), Some(d)) = (&opts.highlight_events, dynm) {
        for id in ids {
            let event = d
                .event(id)
                .ok_or_else(|| RenderError::UnknownHighlight(id.clone()))?;
            highlighted.extend(event.region.actions.iter().copied());
        }
    }

    // Events whose region sits inside a single thimac and does not touch
    // an already-claimed action become nested clusters; the rest degrade
    // to a node-group annotation, since DOT cannot draw arbitrary
    // overlapping boundaries.
    let mut event_clusters: BTreeMap<ThimacId, Vec<(String, BTreeSet<ActionId>)>> =
        BTreeMap::new();
    let mut annotations: Vec<(String, BTreeSet<ActionId>)> = Vec::new();
    let mut claimed: BTreeSet<ActionId> = BTreeSet::new();
    if let Some(d) = dynm {
        for e in &d.events {
            let owners: BTreeSet<ThimacId> = e
                .region
                .actions
                .iter()
                .map(|&a| model.action(a).unwrap().owner)
                .collect();
            let disjoint = e.region.actions.iter().all(|a| !claimed.contains(a));
            if owners.len() == 1 && disjoint {
                claimed.extend(e.region.actions.iter().copied());
                event_clusters
                    .entry(*owners.iter().next().unwrap())
                    .or_default()
                    .push((e.id.clone(), e.region.actions.clone()));
            } else {
                annotations.push((e.id.clone(), e.region.actions.clone()));
            }
        }
    }

    let mut em = Emitter { model, opts, event_clusters, highlighted, out: String::new() };
    let _ = writeln!(em.out, "digraph \"{}\" {{", escape(&model.name));
    if let Some(dir) = &opts.rankdir {
        let _ = writeln!(em.out, "  rankdir={dir};");
    }
    let roots: Vec<ThimacId> = model
        .thimacs()
        .iter()
        .filter(|t| t.parent.is_none())
        .map(|t| t.id)
        .collect();
    for r in roots {
        em.emit_thimac(r, 1);
    }
    for (event_id, actions) in &annotations {
        let members: Vec<String> = actions.iter().map(|&a| model.action_name(a)).collect();
        let _ = writeln!(em.out, "  // boundary {event_id}");
        let _ = writeln!(
            em.out,
            "  \"ev_{}\" [shape=note, color=orange, label=\"{}\", tooltip=\"{}\"];",
            escape(event_id),
            escape(event_id),
            escape(&members.join(", "))
        );
    }
    em.emit_edges();
    let _ = writeln!(em.out, "}}");
    Ok(em.out)
}

/// Render the static model alone.
pub fn to_dot_static(model: &StaticModel, opts: &RenderOptions) -> String {
    render(model, None, opts).expect("static rendering cannot fail")
}

/// Render the static model with one labeled boundary per event region.
pub fn to_dot_dynamic(
    model: &StaticModel,
    dynm: &DynamicModel,
    opts: &RenderOptions,
) -> Result<String, RenderError> {
    render(model, Some(dynm), opts)
}

/// Render the chronology: events as nodes, repeat edges dashed, guards
/// as edge labels.
pub fn to_dot_chronology(dynm: &DynamicModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph chronology {{");
    for e in &dynm.events {
        let _ = writeln!(out, "  \"{}\";", escape(&e.id));
    }
    for e in &dynm.chronology.edges {
        let mut attrs = Vec::new();
        if let Some((g, l)) = &e.guard {
            attrs.push(format!("label=\"{}\"", escape(&format!("{g}={l}"))));
        }
        if e.repeat {
            attrs.push("style=dashed".to_string());
            attrs.push("label=\"repeat\"".to_string());
        }
        let attrs = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        let _ = writeln!(out, "  \"{}\" -> \"{}\"{};", escape(&e.from), escape(&e.to), attrs);
    }
    let _ = writeln!(out, "}}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_dynamics, parse_static_named};

    const BASE: &str = "\
thimac Lungs { }
thimac Heart { }
flow air: Lungs.transfer@in#1 -> Lungs.receive#2 -> Lungs.process#3
trigger Lungs.process -> Lungs.create #4
flow oxygen: Lungs.create -> Lungs.release -> Lungs.transfer@out -> Heart.transfer -> Heart.receive
";

    #[test]
    fn empty_model_renders_minimal_digraph() {
        let mut m = StaticModel::new("empty");
        m.freeze();
        let dot = to_dot_static(&m, &RenderOptions::default());
        assert_eq!(dot, "digraph \"empty\" {\n}\n");
    }

    #[test]
    fn node_and_edge_counts_match_model() {
        let m = parse_static_named(BASE, "base").unwrap();
        let dot = to_dot_static(&m, &RenderOptions::default());
        let nodes = dot
            .lines()
            .filter(|l| l.contains("[label=") && !l.contains(" -> "))
            .count();
        assert_eq!(nodes, m.actions().len());
        assert_eq!(dot.matches(" -> ").count(), m.flows().len() + m.triggers().len());
        assert_eq!(dot.matches("subgraph cluster_t").count(), m.thimacs().len());
    }

    #[test]
    fn step_labels_appear_on_edges_when_enabled() {
        let m = parse_static_named(BASE, "base").unwrap();
        let opts = RenderOptions { show_step_labels: true, ..Default::default() };
        let dot = to_dot_static(&m, &opts);
        assert!(dot.contains("air (2)"));
        assert!(dot.contains("(4)"));
        let plain = to_dot_static(&m, &RenderOptions::default());
        assert!(!plain.contains("air (2)"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let m = parse_static_named(BASE, "base").unwrap();
        let opts = RenderOptions::default();
        assert_eq!(to_dot_static(&m, &opts), to_dot_static(&m, &opts));
    }

    #[test]
    fn event_boundaries_one_per_event() {
        let m = parse_static_named(BASE, "base").unwrap();
        let d = parse_dynamics(
            "event E1 { Lungs.transfer@in, Lungs.receive }\n\
             event E2 { Lungs.process, Lungs.create }\n\
             event E3 { Lungs.release, Lungs.transfer@out, Heart.transfer, Heart.receive }\n",
            &m,
        )
        .unwrap();
        let dot = to_dot_dynamic(&m, &d, &RenderOptions::default()).unwrap();
        assert_eq!(dot.matches("// boundary ").count(), 3);
        // E1/E2 are one-thimac and disjoint: clusters. E3 spans two: note.
        assert!(dot.contains("cluster_event_E1"));
        assert!(dot.contains("\"ev_E3\""));
    }

    #[test]
    fn zero_event_dyn_equals_static_render() {
        let m = parse_static_named(BASE, "base").unwrap();
        let d = DynamicModel { base_name: m.name.clone(), ..Default::default() };
        let opts = RenderOptions::default();
        assert_eq!(to_dot_dynamic(&m, &d, &opts).unwrap(), to_dot_static(&m, &opts));
    }

    #[test]
    fn unknown_highlight_rejected() {
        let m = parse_static_named(BASE, "base").unwrap();
        let d = DynamicModel { base_name: m.name.clone(), ..Default::default() };
        let opts = RenderOptions {
            highlight_events: Some(vec!["E9".into()]),
            ..Default::default()
        };
        assert_eq!(
            to_dot_dynamic(&m, &d, &opts),
            Err(RenderError::UnknownHighlight("E9".into()))
        );
    }

    #[test]
    fn chronology_render_marks_repeat_and_guard() {
        let m = parse_static_named(BASE, "base").unwrap();
        let d = parse_dynamics(
            "event E1 { Lungs.transfer@in, Lungs.receive }\n\
             event E2 { Lungs.process, Lungs.create }\n\
             chron E1 -> E2 guard g=yes\n\
             chron E2 -> E1 repeat\n",
            &m,
        )
        .unwrap();
        let dot = to_dot_chronology(&d);
        assert!(dot.contains("label=\"g=yes\""));
        assert!(dot.contains("style=dashed, label=\"repeat\""));
        assert!(dot.contains("\"E1\";"));
        // Empty chronology: empty digraph.
        let empty = DynamicModel::default();
        assert_eq!(to_dot_chronology(&empty), "digraph chronology {\n}\n");
    }
}
