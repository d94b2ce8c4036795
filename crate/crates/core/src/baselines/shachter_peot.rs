//! The single-value-node reduction to posterior queries given `v = 1`.
//!
//! The value node is Cooper-transformed and every decision becomes a
//! uniformly distributed chance node. Working from the last decision back,
//! each rule is the argmax of `P(d, π_d, v = 1)`, after which the decision's
//! CPT is replaced by that deterministic rule.

use alloc::format;
use alloc::vec::Vec;

use crate::decomposition::cooper_transform;
use crate::error::{Error, Result};
use crate::evaluator::{DecisionRule, EvaluationResult, QueryRecord, StageTrace};
use crate::factors::{Factor, Variable};
use crate::inference::{relevance_prune, Evidence, InferenceEngine, InferenceStats};
use crate::model::{InfluenceDiagram, NameSet, Node};

fn deterministic_cpt(rule: &DecisionRule) -> Result<Factor> {
    let d = &rule.decision;
    let mut scope = rule.scope().to_vec();
    scope.push(d.clone());
    let mut table = Vec::with_capacity(rule.table.choices().len() * d.cardinality());
    for &a in rule.table.choices() {
        table.extend((0..d.cardinality()).map(|k| if k == a { 1.0 } else { 0.0 }));
    }
    Factor::new(scope, table)
}

/// Evaluates a diagram with exactly one value node.
pub fn shachter_peot<E: InferenceEngine + ?Sized>(diagram: &InfluenceDiagram, engine: &E) -> Result<EvaluationResult> {
    let report = diagram.validate();
    if !report.is_valid() {
        return Err(Error::InvalidDiagram(format!("{report}")));
    }
    let found = diagram.value_nodes().count();
    if found != 1 {
        return Err(Error::RequiresSingleValueNode { found });
    }
    let pruned = diagram.prune_barren();
    let order = pruned.decision_order();
    let mut info = None;
    let mut nodes = Vec::with_capacity(pruned.len());
    for node in pruned.nodes() {
        if node.is_value() {
            let (random, cooper) = cooper_transform(node)?;
            nodes.push(random);
            info = Some(cooper);
        } else if node.is_decision() {
            let var = node.variable().expect("decisions have frames").clone();
            nodes.push(uniform_decision(&pruned, node, var)?);
        } else {
            nodes.push(node.clone());
        }
    }
    let info = info.expect("one value node");
    let mut bn = InfluenceDiagram::new(nodes)?;
    let evidence = Evidence::from([(info.name.clone(), 1)]);

    let mut policy = Vec::with_capacity(order.len());
    let mut stages = Vec::with_capacity(order.len());
    for d in order.iter().rev() {
        let node = bn.node(d)?.clone();
        let var = node.variable().expect("framed").clone();
        let mut family: NameSet = node.parents().iter().cloned().collect();
        family.insert(d.clone());
        let mut targets = family.clone();
        targets.insert(info.name.clone());
        let network = relevance_prune(&bn, &targets)?;
        let (joint, stats) = if info.is_degenerate() {
            // No information in v = 1: every action ties.
            let scope = family
                .iter()
                .map(|n| bn.node(n).map(|x| x.variable().expect("framed").clone()))
                .collect::<Result<Vec<Variable>>>()?;
            (Factor::constant(scope, 0.0)?, InferenceStats::default())
        } else {
            engine.infer(&network, &family, &evidence)?
        };
        let (_, table) = joint.max_out(d)?;
        let rule = DecisionRule { decision: var.clone(), table };
        let cpt = deterministic_cpt(&rule)?;
        let replaced = Node::random_with_cpt(var, node.parents().to_vec(), cpt)?;
        let mut nodes: Vec<Node> = bn.into_nodes().into_iter().filter(|n| n.name() != d).collect();
        nodes.push(replaced);
        bn = InfluenceDiagram::new(nodes)?;
        let queries = if info.is_degenerate() {
            Vec::new()
        } else {
            Vec::from([QueryRecord {
                label: format!("P({d}, parents | {} = 1)", info.name),
                nodes: network.len(),
                stats,
            }])
        };
        stages.push(StageTrace { decision: d.clone(), decomposition: None, queries, stats, detail: None });
        policy.push(rule);
    }
    policy.reverse();

    let target = NameSet::from([info.name.clone()]);
    let network = relevance_prune(&bn, &target)?;
    let (p, final_stats) = if info.is_degenerate() {
        (
            Factor::new(Vec::from([Variable::binary(info.name.clone())]), Vec::from([1.0, 0.0]))?,
            InferenceStats::default(),
        )
    } else {
        engine.infer(&network, &target, &Evidence::new())?
    };
    let final_queries =
        Vec::from([QueryRecord { label: format!("P({})", info.name), nodes: network.len(), stats: final_stats }]);
    Ok(EvaluationResult {
        policy,
        expected_value: info.expected_utility(p.values()[1]),
        stages,
        final_queries,
        final_stats,
    })
}

fn uniform_decision(diagram: &InfluenceDiagram, node: &Node, var: Variable) -> Result<Node> {
    let mut scope: Vec<Variable> = node
        .parents()
        .iter()
        .map(|p| diagram.node(p).map(|x| x.variable().expect("decision parents have frames").clone()))
        .collect::<Result<_>>()?;
    scope.push(var.clone());
    let cpt = Factor::constant(scope, 1.0 / var.cardinality() as f64)?;
    Node::random_with_cpt(var, node.parents().to_vec(), cpt)
}
