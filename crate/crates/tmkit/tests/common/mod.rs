//! Random generators shared by the property-based acceptance tests.
//!
//! Models are assembled from small legal flow-chain templates, so every
//! generated model is error-free by construction (warnings are allowed).

use proptest::prelude::*;

use tmkit::carving::finest_carving;
use tmkit::dsl::{DynamicModel, Scenario};
use tmkit::dynamics::oracle_pairs;
use tmkit::metamodel::{ActionKind, ChronEdge, Chronology, Endpoint, StaticModel};

type ChainSpec = (prop::sample::Index, prop::sample::Index, bool, bool);

pub fn arb_static() -> impl Strategy<Value = StaticModel> {
    (2usize..=5, prop::collection::vec(chain_spec(), 1..6))
        .prop_map(|(n, chains)| build_model(n, &chains))
}

fn chain_spec() -> impl Strategy<Value = ChainSpec> {
    (
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
        any::<bool>(),
        any::<bool>(),
    )
}

fn build_model(thimac_count: usize, chains: &[ChainSpec]) -> StaticModel {
    let mut m = StaticModel::new("gen");
    let ids: Vec<_> = (0..thimac_count)
        .map(|i| m.add_thimac(&format!("T{}", i + 1), None).unwrap())
        .collect();
    for (ci, (ia, ib, cross, trig)) in chains.iter().enumerate() {
        let a = ids[ia.index(thimac_count)];
        let b = ids[ib.index(thimac_count)];
        let inst = format!("c{}", ci + 1);
        let ep = |t, k: ActionKind| Endpoint::new(t, k).instance(inst.as_str());
        let thing = format!("thing{}", ci + 1);
        if *cross && a != b {
            // A full inter-thimac flow: the thing leaves a and arrives in b.
            m.add_flow(
                &thing,
                &[
                    ep(a, ActionKind::Create),
                    ep(a, ActionKind::Release),
                    ep(a, ActionKind::Transfer),
                    ep(b, ActionKind::Transfer),
                    ep(b, ActionKind::Receive),
                    ep(b, ActionKind::Process),
                ],
            )
            .unwrap();
            if *trig {
                m.add_trigger(
                    &ep(b, ActionKind::Process),
                    &Endpoint::new(b, ActionKind::Create).instance(format!("t{}", ci + 1)),
                    None,
                )
                .unwrap();
            }
        } else {
            // A local chain inside a.
            m.add_flow(
                &thing,
                &[
                    ep(a, ActionKind::Create),
                    ep(a, ActionKind::Process),
                    ep(a, ActionKind::Release),
                ],
            )
            .unwrap();
            if *trig {
                m.add_trigger(
                    &ep(a, ActionKind::Process),
                    &Endpoint::new(a, ActionKind::Create).instance(format!("t{}", ci + 1)),
                    None,
                )
                .unwrap();
            }
        }
    }
    m.freeze();
    m
}

fn event_index(id: &str) -> usize {
    id[1..].parse().unwrap()
}

/// A finest carving equipped with a chronology drawn from the flow
/// dependencies (kept acyclic by ordering event indices), plus a
/// scenario that resolves one guarded branch and one repeat loop.
pub fn arb_dyn_scenario() -> impl Strategy<Value = (StaticModel, DynamicModel, Scenario)> {
    (
        arb_static(),
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
        any::<bool>(),
        1u64..=3,
    )
        .prop_map(|(m, gi, ri, take_branch, bound)| build_dyn_scenario(m, gi, ri, take_branch, bound))
}

fn build_dyn_scenario(
    model: StaticModel,
    gi: prop::sample::Index,
    ri: prop::sample::Index,
    take_branch: bool,
    bound: u64,
) -> (StaticModel, DynamicModel, Scenario) {
    let mut dynm = finest_carving(&model);
    let mut edges: Vec<ChronEdge> = oracle_pairs(&model, &dynm)
        .into_iter()
        .filter(|(from, to)| event_index(from) < event_index(to))
        .map(|(from, to)| ChronEdge { from, to, guard: None, repeat: false })
        .collect();
    let mut scenario = Scenario { name: "generated".into(), ..Default::default() };
    if !edges.is_empty() {
        let g = gi.index(edges.len());
        edges[g].guard = Some(("g".into(), "yes".into()));
        scenario
            .guard_choices
            .insert("g".into(), if take_branch { "yes" } else { "no" }.into());

        let r = ri.index(edges.len());
        let back = ChronEdge {
            from: edges[r].to.clone(),
            to: edges[r].from.clone(),
            guard: None,
            repeat: true,
        };
        scenario.repeat_bounds.insert(Chronology::repeat_group(&back), bound);
        edges.push(back);
    }
    dynm.chronology = Chronology { edges };
    (model, dynm, scenario)
}
