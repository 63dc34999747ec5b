//! Built-in example models, embedded at compile time and addressable
//! as `corpus:NAME` from the command line.

use crate::dsl::{parse_dynamics, parse_scenario, parse_static_named, DynamicModel, Scenario};
use crate::metamodel::StaticModel;
use crate::report::SourceDiagnostic;

pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub statics: &'static str,
    pub dynamics: Option<&'static str>,
    /// (scenario name, document) pairs.
    pub scenarios: &'static [(&'static str, &'static str)],
}

pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "circulation",
        description: "blood circulation and oxygen exchange",
        statics: include_str!("../corpus/circulation.tm"),
        dynamics: Some(include_str!("../corpus/circulation.tmd")),
        scenarios: &[("inhalation", include_str!("../corpus/inhalation.scn"))],
    },
    CorpusEntry {
        name: "coffee",
        description: "a coffee vending machine",
        statics: include_str!("../corpus/coffee.tm"),
        dynamics: None,
        scenarios: &[],
    },
    CorpusEntry {
        name: "hospital",
        description: "hospital records: patients, diagnoses, and Has",
        statics: include_str!("../corpus/hospital.tm"),
        dynamics: Some(include_str!("../corpus/hospital.tmd")),
        scenarios: &[
            ("duplicate-ssn", include_str!("../corpus/duplicate-ssn.scn")),
            ("new-patient", include_str!("../corpus/new-patient.scn")),
            (
                "new-diagnosis-existing-code",
                include_str!("../corpus/new-diagnosis-existing-code.scn"),
            ),
        ],
    },
];

pub fn corpus_names() -> Vec<&'static str> {
    CORPUS.iter().map(|e| e.name).collect()
}

pub fn corpus_entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

/// Parse one built-in model with its dynamics and scenarios. The
/// embedded documents are covered by tests, so parse failures indicate
/// a build problem, not user input; they still surface as diagnostics.
pub fn corpus_load(
    name: &str,
) -> Result<(StaticModel, Option<DynamicModel>, Vec<Scenario>), Vec<SourceDiagnostic>> {
    let entry = corpus_entry(name).ok_or_else(|| {
        vec![SourceDiagnostic::error(
            "E-CORPUS",
            format!(
                "unknown corpus model `{name}` (available: {})",
                corpus_names().join(", ")
            ),
            1,
            1,
        )]
    })?;
    let model = parse_static_named(entry.statics, entry.name)?;
    let dynm = match entry.dynamics {
        Some(text) => Some(parse_dynamics(text, &model)?),
        None => None,
    };
    let mut scenarios = Vec::new();
    for (sname, text) in entry.scenarios {
        scenarios.push(parse_scenario(text, sname)?);
    }
    Ok((model, dynm, scenarios))
}
