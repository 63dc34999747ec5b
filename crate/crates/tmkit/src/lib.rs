//! Conceptual-modeling toolkit built on a single construct, the
//! thimac ("thing/machine"), and five generic actions: create,
//! process, release, transfer, receive.
//!
//! A *static model* is a diagram of thimacs, actions, flow arcs, and
//! trigger arcs. A *dynamic model* superimposes events (connected
//! regions of the diagram) and a chronology (a precedence graph with
//! guards and bounded loops). Scenarios resolve the guards and bounds
//! so a chronology can be executed into a trace.

pub mod carving;
pub mod corpus;
pub mod dsl;
pub mod dynamics;
pub mod metamodel;
pub mod render;
pub mod report;
pub mod validator;

pub use dsl::{DynamicModel, Scenario};
pub use metamodel::{ActionKind, Chronology, Event, Region, StaticModel, Trace};
pub use report::{RuleDiagnostic, Severity, SourceDiagnostic};
