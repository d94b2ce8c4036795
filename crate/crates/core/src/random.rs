//! Seeded generators for Bayesian networks and influence diagrams.
//!
//! Every generated diagram is valid: decisions form a chain, each decision
//! inherits its predecessor's parents, and CPT columns are normalized.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use crate::factors::Variable;
use crate::model::{InfluenceDiagram, Name, Node};

#[derive(Clone, Debug, PartialEq)]
pub struct BayesNetShape {
    pub nodes: usize,
    pub max_parents: usize,
    pub max_cardinality: usize,
    /// Chance that an earlier node becomes a parent.
    pub edge_probability: f64,
    /// Chance that a CPT entry is forced to zero.
    pub zero_probability: f64,
}

impl Default for BayesNetShape {
    fn default() -> Self {
        BayesNetShape { nodes: 8, max_parents: 3, max_cardinality: 3, edge_probability: 0.35, zero_probability: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramShape {
    pub max_decisions: usize,
    pub max_chance: usize,
    pub max_values: usize,
    pub max_cardinality: usize,
    pub max_parents: usize,
    pub edge_probability: f64,
    pub zero_probability: f64,
    /// Utilities are drawn uniformly from this range.
    pub utility_range: (f64, f64),
}

impl Default for DiagramShape {
    fn default() -> Self {
        DiagramShape {
            max_decisions: 4,
            max_chance: 8,
            max_values: 3,
            max_cardinality: 3,
            max_parents: 3,
            edge_probability: 0.35,
            zero_probability: 0.1,
            utility_range: (-5.0, 10.0),
        }
    }
}

fn cardinality<R: Rng + ?Sized>(rng: &mut R, max: usize) -> usize {
    rng.random_range(2..=max.max(2))
}

/// Row-major CPT columns over `parents` then the child.
fn random_cpt<R: Rng + ?Sized>(rng: &mut R, parents: &[Variable], child: usize, zero: f64) -> Vec<f64> {
    let rows: usize = parents.iter().map(Variable::cardinality).product();
    let mut table = Vec::with_capacity(rows * child);
    for _ in 0..rows {
        let mut column: Vec<f64> =
            (0..child).map(|_| if rng.random_bool(zero) { 0.0 } else { rng.random_range(0.05..1.0) }).collect();
        if column.iter().all(|&p| p == 0.0) {
            column[rng.random_range(0..child)] = 1.0;
        }
        let z: f64 = column.iter().sum();
        table.extend(column.into_iter().map(|p| p / z));
    }
    table
}

fn pick_parents<R: Rng + ?Sized>(rng: &mut R, pool: &[Variable], p: f64, max: usize) -> Vec<Variable> {
    let mut chosen: Vec<Variable> = pool.iter().filter(|_| rng.random_bool(p)).cloned().collect();
    while chosen.len() > max {
        chosen.remove(rng.random_range(0..chosen.len()));
    }
    chosen
}

/// A random Bayesian network over nodes `b0, b1, ...`, each drawing its
/// parents from the nodes before it.
pub fn random_bayes_net<R: Rng + ?Sized>(rng: &mut R, shape: &BayesNetShape) -> InfluenceDiagram {
    let mut vars: Vec<Variable> = Vec::with_capacity(shape.nodes);
    let mut nodes = Vec::with_capacity(shape.nodes);
    for i in 0..shape.nodes {
        let var = Variable::new(format!("b{i}"), cardinality(rng, shape.max_cardinality)).expect("cardinality >= 2");
        let parents = pick_parents(rng, &vars, shape.edge_probability, shape.max_parents);
        let table = random_cpt(rng, &parents, var.cardinality(), shape.zero_probability);
        nodes.push(Node::random(var.clone(), &parents, table).expect("generated table fits its scope"));
        vars.push(var);
    }
    InfluenceDiagram::new(nodes).expect("generated nodes are consistent")
}

/// A random valid influence diagram.
///
/// Chance nodes are spread over the `k + 1` stages around the decisions
/// `d0 .. d{k-1}`; decision `dj` sees `d{j-1}`, everything `d{j-1}` saw, and a
/// random subset of the chance nodes of stage `j`. Value nodes `v*` take one
/// to three parents among all chance and decision nodes.
pub fn random_influence_diagram<R: Rng + ?Sized>(rng: &mut R, shape: &DiagramShape) -> InfluenceDiagram {
    let k = rng.random_range(0..=shape.max_decisions);
    let chance = rng.random_range(0..=shape.max_chance);
    let mut stage_of: Vec<usize> = (0..chance).map(|_| rng.random_range(0..=k)).collect();
    stage_of.sort_unstable();

    let mut framed: Vec<Variable> = Vec::new();
    let mut nodes = Vec::new();
    let mut last_parents: Vec<Name> = Vec::new();
    let mut next_chance = 0;
    for stage in 0..=k {
        let mut observed_now = Vec::new();
        while next_chance < chance && stage_of[next_chance] == stage {
            let var = Variable::new(format!("c{next_chance}"), cardinality(rng, shape.max_cardinality))
                .expect("cardinality >= 2");
            let parents = pick_parents(rng, &framed, shape.edge_probability, shape.max_parents);
            let table = random_cpt(rng, &parents, var.cardinality(), shape.zero_probability);
            nodes.push(Node::random(var.clone(), &parents, table).expect("generated table fits its scope"));
            if rng.random_bool(0.6) {
                observed_now.push(var.name().clone());
            }
            framed.push(var);
            next_chance += 1;
        }
        if stage == k {
            break;
        }
        let var =
            Variable::new(format!("d{stage}"), cardinality(rng, shape.max_cardinality)).expect("cardinality >= 2");
        let mut parents = last_parents.clone();
        if stage > 0 {
            parents.push(format!("d{}", stage - 1).into());
        }
        parents.extend(observed_now);
        nodes.push(Node::decision(var.clone(), parents.clone()).expect("parents are distinct"));
        last_parents = parents;
        framed.push(var);
    }

    let values = rng.random_range(1..=shape.max_values.max(1));
    for i in 0..values {
        let want = rng.random_range(1..=3.min(framed.len()).max(1));
        let parents: Vec<Variable> = if framed.is_empty() {
            Vec::new()
        } else {
            let mut idx = sample(rng, framed.len(), want.min(framed.len())).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|j| framed[j].clone()).collect()
        };
        let rows: usize = parents.iter().map(Variable::cardinality).product();
        let (lo, hi) = shape.utility_range;
        let table = (0..rows).map(|_| rng.random_range(lo..=hi)).collect();
        nodes.push(Node::value(format!("v{i}"), &parents, table).expect("generated table fits its scope"));
    }
    InfluenceDiagram::new(nodes).expect("generated nodes are consistent")
}
