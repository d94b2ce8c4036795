#![allow(dead_code)]

use influence_core::random::{random_influence_diagram, DiagramShape};
use influence_core::{Factor, InfluenceDiagram, Name, Node, NodeKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SUITE_SIZE: u64 = 240;

/// The seeded diagrams shared by the randomized tests.
pub fn suite(shape: &DiagramShape) -> impl Iterator<Item = (u64, InfluenceDiagram)> + '_ {
    (0..SUITE_SIZE).map(move |seed| (seed, random_influence_diagram(&mut ChaCha8Rng::seed_from_u64(seed), shape)))
}

/// Denser diagrams, where parents of decisions often have downstream parents.
pub fn dense() -> DiagramShape {
    DiagramShape { edge_probability: 0.7, ..DiagramShape::default() }
}

/// Rebuilds a diagram with every utility table passed through `f`.
pub fn map_utilities(id: &InfluenceDiagram, mut f: impl FnMut(&Name, &Factor) -> Factor) -> InfluenceDiagram {
    let nodes = id
        .nodes()
        .iter()
        .map(|n| match n.kind() {
            NodeKind::Value { utility } => {
                Node::value_with_utility(n.name().clone(), n.parents().to_vec(), f(n.name(), utility)).unwrap()
            }
            _ => n.clone(),
        })
        .collect();
    InfluenceDiagram::new(nodes).unwrap()
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
}
