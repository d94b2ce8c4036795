//! Carving an influence diagram around its tail decision node.
//!
//! The downstream part of the diagram (the tail) becomes a Bayesian network
//! in which the tail decision's rule can be computed; the rest (the body)
//! stays an influence diagram and receives one new value node standing in
//! for the tail.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::factors::{Factor, Variable};
use crate::model::{InfluenceDiagram, Name, NameSet, Node};

/// The partition of a diagram's nodes induced by its tail decision `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailDecomposition {
    pub decision: Name,
    /// Nodes outside `π_d` that `π_d` m-separates from `d`.
    pub upstream: NameSet,
    /// Nodes outside `π_d` that are not m-separated from `d`; contains `d`.
    pub downstream: NameSet,
    pub parents: NameSet,
    /// Parents of `d` with no parent in the downstream set.
    pub pi1: NameSet,
    /// Parents of `d` with at least one parent in the downstream set.
    pub pi2: NameSet,
    /// Members of `pi1` that are not parents of any downstream node other
    /// than `d` nor of any member of `pi2`.
    pub irrelevant: NameSet,
    pub relevant: NameSet,
    /// Value nodes in the downstream set.
    pub tail_values: NameSet,
}

/// Partitions `diagram` around `d`, which must be its tail decision node.
pub fn partition(diagram: &InfluenceDiagram, d: &str) -> Result<TailDecomposition> {
    let node = diagram.node(d)?;
    if !node.is_decision() || diagram.descendants(d)?.iter().any(|x| diagram.node(x).is_ok_and(Node::is_decision)) {
        return Err(Error::NotTailDecision(node.name().clone()));
    }
    let decision = node.name().clone();
    let parents: NameSet = node.parents().iter().cloned().collect();
    let moral = diagram.moral_graph();
    let downstream: NameSet =
        diagram.moral_component(&moral, d, &parents)?.into_iter().filter(|x| !parents.contains(x)).collect();
    let upstream: NameSet =
        diagram.names().into_iter().filter(|x| !parents.contains(x) && !downstream.contains(x)).collect();

    let mut pi1 = NameSet::new();
    let mut pi2 = NameSet::new();
    for p in &parents {
        if diagram.node(p)?.parents().iter().any(|q| downstream.contains(q)) {
            pi2.insert(p.clone());
        } else {
            pi1.insert(p.clone());
        }
    }
    let mut fed = NameSet::new();
    for x in pi2.iter().chain(downstream.iter().filter(|x| **x != decision)) {
        fed.extend(diagram.node(x)?.parents().iter().cloned());
    }
    let irrelevant: NameSet = pi1.iter().filter(|p| !fed.contains(*p)).cloned().collect();
    let relevant: NameSet = parents.iter().filter(|p| !irrelevant.contains(*p)).cloned().collect();
    let tail_values: NameSet =
        downstream.iter().filter(|x| diagram.node(x).is_ok_and(Node::is_value)).cloned().collect();
    Ok(TailDecomposition { decision, upstream, downstream, parents, pi1, pi2, irrelevant, relevant, tail_values })
}

/// Partitions a valid diagram around its tail decision node.
pub fn decompose(diagram: &InfluenceDiagram) -> Result<TailDecomposition> {
    let d = diagram.tail_decision_node()?;
    partition(diagram, &d)
}

/// Bookkeeping for a value node turned into a binary random node.
#[derive(Clone, Debug, PartialEq)]
pub struct CooperValue {
    pub name: Name,
    /// The utility table before shifting.
    pub utility: Factor,
    /// Largest entry of the shifted table.
    pub scale: f64,
    /// Constant added to make the table non-negative.
    pub offset: f64,
}

impl CooperValue {
    /// A constant-zero table after shifting; `P(v = 1)` carries no information.
    pub fn is_degenerate(&self) -> bool {
        self.scale == 0.0
    }

    /// Expected utility from `P(v = 1)`.
    pub fn expected_utility(&self, p_one: f64) -> f64 {
        p_one * self.scale - self.offset
    }
}

/// Converts a value node into a binary random node with
/// `P(v = 1 | π_v) = (f_v + K_v) / M_v`.
pub fn cooper_transform(node: &Node) -> Result<(Node, CooperValue)> {
    let utility = node
        .utility()
        .ok_or_else(|| Error::MalformedNode { node: node.name().clone(), reason: String::from("not a value node") })?;
    let min = utility.min();
    let offset = if min < 0.0 { -min } else { 0.0 };
    let shifted = utility.map(|x| x + offset);
    let scale = shifted.max().max(0.0);
    let var = Variable::binary(node.name().clone());
    let mut scope = utility.scope().to_vec();
    scope.push(var.clone());
    let mut table = Vec::with_capacity(2 * utility.len());
    for &x in shifted.values() {
        let p = if scale > 0.0 { x / scale } else { 0.0 };
        table.extend([1.0 - p, p]);
    }
    let cpt = Factor::new(scope, table)?;
    let random = Node::random_with_cpt(var, node.parents().to_vec(), cpt)?;
    let info = CooperValue { name: node.name().clone(), utility: utility.clone(), scale, offset };
    Ok((random, info))
}

/// The tail (or reduced tail) of a diagram as a Bayesian network.
#[derive(Clone, Debug, PartialEq)]
pub struct Tail {
    pub decomposition: TailDecomposition,
    pub decision: Variable,
    pub network: InfluenceDiagram,
    /// The Cooper-transformed value nodes, in name order.
    pub values: Vec<CooperValue>,
}

impl Tail {
    /// Frames of the relevant parents, in name order.
    pub fn relevant_variables(&self) -> Result<Vec<Variable>> {
        self.decomposition
            .relevant
            .iter()
            .map(|p| Ok(self.network.node(p)?.variable().expect("tail nodes are random").clone()))
            .collect()
    }
}

fn uniform_root(diagram: &InfluenceDiagram, name: &str) -> Result<Node> {
    let var = diagram.node(name)?.variable().cloned().ok_or_else(|| Error::MalformedNode {
        node: name.into(),
        reason: String::from("value node cannot be a parent of a decision"),
    })?;
    Node::random_with_cpt(var.clone(), Vec::new(), Factor::uniform(var))
}

fn build_tail(diagram: &InfluenceDiagram, dec: &TailDecomposition, keep_irrelevant: bool) -> Result<Tail> {
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    let decision = diagram.node(&dec.decision)?.variable().expect("decisions have frames").clone();
    nodes.push(uniform_root(diagram, &dec.decision)?);
    for p in &dec.pi1 {
        if keep_irrelevant || !dec.irrelevant.contains(p) {
            nodes.push(uniform_root(diagram, p)?);
        }
    }
    for x in dec.pi2.iter().chain(dec.downstream.iter().filter(|x| **x != dec.decision)) {
        let node = diagram.node(x)?;
        if node.is_value() {
            let (random, info) = cooper_transform(node)?;
            nodes.push(random);
            values.push(info);
        } else if node.is_random() {
            nodes.push(node.clone());
        } else {
            return Err(Error::InvalidDiagram(format!("decision `{x}` lies downstream of the tail decision")));
        }
    }
    let network = InfluenceDiagram::new(nodes)?;
    Ok(Tail { decomposition: dec.clone(), decision, network, values })
}

/// The tail: upstream nodes pruned, `d` and `π_{d,1}` given uniform priors,
/// downstream value nodes Cooper-transformed.
pub fn tail(diagram: &InfluenceDiagram, dec: &TailDecomposition) -> Result<Tail> {
    build_tail(diagram, dec, true)
}

/// The tail without the isolated irrelevant parents.
pub fn red_tail(diagram: &InfluenceDiagram, dec: &TailDecomposition) -> Result<Tail> {
    build_tail(diagram, dec, false)
}

/// The diagram minus the downstream nodes that are not ancestors of `π_{d,2}`.
pub fn body(diagram: &InfluenceDiagram, dec: &TailDecomposition) -> Result<InfluenceDiagram> {
    let feeding = diagram.ancestral_set(&dec.pi2)?;
    let keep: NameSet =
        diagram.names().into_iter().filter(|x| !dec.downstream.contains(x) || feeding.contains(x)).collect();
    diagram.restrict_to(&keep)
}

/// A node name based on `base` that `diagram` does not use yet.
fn fresh_name(diagram: &InfluenceDiagram, base: &str) -> Name {
    if !diagram.contains(base) {
        return base.into();
    }
    (1..).map(|i| format!("{base}_{i}")).find(|n| !diagram.contains(n)).expect("some suffix is free").into()
}

/// Name of the value node that replaces the tail of `d`.
pub fn summary_node_name(diagram: &InfluenceDiagram, d: &str) -> Name {
    fresh_name(diagram, &format!("u_{d}"))
}

/// The body plus a value node `u` over `π_{d,r}` with `f_u = max_d e`.
pub fn aug_body(diagram: &InfluenceDiagram, dec: &TailDecomposition, e: &Factor) -> Result<InfluenceDiagram> {
    let mut expected: NameSet = dec.relevant.clone();
    expected.insert(dec.decision.clone());
    let scope: NameSet = e.scope().iter().map(|v| v.name().clone()).collect();
    if scope != expected {
        return Err(Error::ScopeMismatch(format!(
            "evaluation functional must range over the relevant parents and `{}`",
            dec.decision
        )));
    }
    let (best, _) = e.max_out(&dec.decision)?;
    let b = body(diagram, dec)?;
    let u = Node::value_with_utility(
        summary_node_name(diagram, &dec.decision),
        dec.relevant.iter().cloned().collect(),
        best,
    )?;
    let mut nodes = b.into_nodes();
    nodes.push(u);
    InfluenceDiagram::new(nodes)
}

/// The enumeration `c_1 … c_k` of `π_{d,2}` and the contexts `Z_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionPlan {
    pub order: Vec<Name>,
    /// Relevant parents of `d` that are in `π_{d,1}`.
    pub z: NameSet,
    /// `contexts[i]`: members of `z` that are tail ancestors of `c_1 … c_{i+1}`.
    pub contexts: Vec<NameSet>,
}

/// Orders `π_{d,2}` topologically (name order among incomparable nodes) and
/// computes the contexts in the reduced tail.
pub fn reduction_plan(diagram: &InfluenceDiagram, dec: &TailDecomposition, tail: &Tail) -> Result<ReductionPlan> {
    let topo = diagram
        .topological_order()
        .ok_or_else(|| Error::InvalidDiagram(String::from("diagram has a directed cycle")))?;
    let order: Vec<Name> = topo.into_iter().filter(|x| dec.pi2.contains(x)).collect();
    let z: NameSet = dec.relevant.intersection(&dec.pi1).cloned().collect();
    let mut prefix = NameSet::new();
    let mut contexts = Vec::with_capacity(order.len());
    for c in &order {
        prefix.insert(c.clone());
        let ancestors = tail.network.ancestral_set(&prefix)?;
        contexts.push(z.intersection(&ancestors).cloned().collect());
    }
    Ok(ReductionPlan { order, z, contexts })
}

fn check_marginal(marginal: &Factor, dec: &TailDecomposition) -> Result<()> {
    let scope: NameSet = marginal.scope().iter().map(|v| v.name().clone()).collect();
    if scope != dec.relevant {
        return Err(Error::ScopeMismatch(String::from("marginal must range over the relevant parents")));
    }
    Ok(())
}

fn sum_out_all<'a>(f: &Factor, names: impl IntoIterator<Item = &'a Name>) -> Result<Factor> {
    names.into_iter().try_fold(f.clone(), |acc, n| acc.sum_out(n))
}

/// Numerator and denominator of the ratio for `c_i` (0-based `i`), keeping
/// every coordinate of `Z`.
fn ratio_parts(marginal: &Factor, plan: &ReductionPlan, i: usize) -> Result<(Factor, Factor)> {
    let numerator = sum_out_all(marginal, &plan.order[i + 1..])?;
    let denominator = numerator.sum_out(&plan.order[i])?;
    Ok((numerator, denominator))
}

/// `P(c_i | c_1 … c_{i-1}, Z_i)` from the marginal over the relevant parents.
///
/// `Z \ Z_i` is summed out of both terms. Columns whose denominator is zero
/// are filled uniformly so the result is a proper CPT.
pub fn conditional(marginal: &Factor, plan: &ReductionPlan, i: usize) -> Result<Factor> {
    let (numerator, denominator) = ratio_parts(marginal, plan, i)?;
    let outside: Vec<Name> = plan.z.difference(&plan.contexts[i]).cloned().collect();
    let numerator = sum_out_all(&numerator, &outside)?;
    let denominator = sum_out_all(&denominator, &outside)?;
    let card = numerator.variable(&plan.order[i]).expect("c_i is in the marginal").cardinality() as f64;
    numerator.combine(&denominator, |n, d| if d > 0.0 { n / d } else { 1.0 / card })
}

/// Largest spread of the unmarginalized ratio across the coordinates of
/// `Z \ Z_i`, over configurations with positive denominator.
pub fn ratio_spread(marginal: &Factor, plan: &ReductionPlan, i: usize) -> Result<f64> {
    let (numerator, denominator) = ratio_parts(marginal, plan, i)?;
    let high = numerator.combine(&denominator, |n, d| if d > 0.0 { n / d } else { f64::NEG_INFINITY })?;
    let low = numerator.combine(&denominator, |n, d| if d > 0.0 { -(n / d) } else { f64::NEG_INFINITY })?;
    let outside: Vec<Name> = plan.z.difference(&plan.contexts[i]).cloned().collect();
    let mut high = high;
    let mut low = low;
    for n in &outside {
        high = high.max_out(n)?.0;
        low = low.max_out(n)?.0;
    }
    Ok(high.values().iter().zip(low.values()).filter(|(h, _)| h.is_finite()).map(|(h, l)| h + l).fold(0.0, f64::max))
}

/// Drops `an(π_{d,2}) ∩ X_2` from the augmented body and gives each `c_i`
/// the parents `c_1 … c_{i-1}, Z_i` with the CPT from [`conditional`].
pub fn red_body(
    aug: &InfluenceDiagram,
    dec: &TailDecomposition,
    marginal: &Factor,
    tail: &Tail,
) -> Result<InfluenceDiagram> {
    check_marginal(marginal, dec)?;
    let plan = reduction_plan(aug, dec, tail)?;
    let ancestors = aug.ancestral_set(&dec.pi2)?;
    let mut nodes = Vec::with_capacity(aug.len());
    for node in aug.nodes() {
        let x = node.name();
        if ancestors.contains(x) && dec.downstream.contains(x) {
            continue;
        }
        if let Some(i) = plan.order.iter().position(|c| c == x) {
            let cpt = conditional(marginal, &plan, i)?;
            let parents: Vec<Name> = plan.order[..i].iter().chain(plan.contexts[i].iter()).cloned().collect();
            let var = node.variable().expect("π_{d,2} nodes are random").clone();
            nodes.push(Node::random_with_cpt(var, parents, cpt)?);
        } else {
            nodes.push(node.clone());
        }
    }
    InfluenceDiagram::new(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bin(name: &str) -> Variable {
        Variable::binary(name)
    }

    fn set(names: &[&str]) -> NameSet {
        names.iter().map(|&n| Name::from(n)).collect()
    }

    fn lone_decision(table: Vec<f64>) -> InfluenceDiagram {
        let d = Variable::new("d", table.len()).unwrap();
        InfluenceDiagram::new(vec![Node::decision(d.clone(), vec![]).unwrap(), Node::value("v", &[d], table).unwrap()])
            .unwrap()
    }

    #[test]
    fn cooper_examples() {
        let a = Variable::new("a", 3).unwrap();
        let (node, info) =
            cooper_transform(&Node::value("v", core::slice::from_ref(&a), vec![2.0, 6.0, 4.0]).unwrap()).unwrap();
        assert_eq!((info.scale, info.offset), (6.0, 0.0));
        let p1 = node.cpt().unwrap().restrict("v", 1).unwrap();
        for (got, want) in p1.values().iter().zip([1.0 / 3.0, 1.0, 2.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let b = bin("b");
        let (node, info) =
            cooper_transform(&Node::value("v", core::slice::from_ref(&b), vec![-1.0, 3.0]).unwrap()).unwrap();
        assert_eq!((info.scale, info.offset), (4.0, 1.0));
        assert_eq!(node.cpt().unwrap().restrict("v", 1).unwrap().values(), &[0.0, 1.0]);
        let (node, info) = cooper_transform(&Node::value("v", &[b], vec![5.0, 5.0]).unwrap()).unwrap();
        assert_eq!((info.scale, info.offset), (5.0, 0.0));
        assert_eq!(node.cpt().unwrap().restrict("v", 1).unwrap().values(), &[1.0, 1.0]);
        assert_eq!(info.expected_utility(1.0), 5.0);
    }

    #[test]
    fn lone_decision_partition() {
        let id = lone_decision(vec![1.0, 5.0, 2.0]);
        let dec = partition(&id, "d").unwrap();
        assert!(dec.upstream.is_empty() && dec.parents.is_empty());
        assert_eq!(dec.downstream, set(&["d", "v"]));
        let t = red_tail(&id, &dec).unwrap();
        assert_eq!(t.network.names(), set(&["d", "v"]));
        assert!(t.network.is_bayes_net() && t.network.validate().is_valid());
        assert!(body(&id, &dec).unwrap().is_empty());
    }

    #[test]
    fn partition_rejects_non_tail() {
        let id = InfluenceDiagram::new(vec![
            Node::decision(bin("d1"), vec![]).unwrap(),
            Node::decision(bin("d2"), vec!["d1".into()]).unwrap(),
        ])
        .unwrap();
        assert_eq!(partition(&id, "d1"), Err(Error::NotTailDecision("d1".into())));
    }

    #[test]
    fn irrelevant_parent_is_dropped_from_red_tail() {
        // p -> d, d -> v; p feeds nothing downstream.
        let (p, d) = (bin("p"), bin("d"));
        let id = InfluenceDiagram::new(vec![
            Node::random(p.clone(), &[], vec![0.3, 0.7]).unwrap(),
            Node::decision(d.clone(), vec!["p".into()]).unwrap(),
            Node::value("v", &[d], vec![0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let dec = partition(&id, "d").unwrap();
        assert_eq!(dec.irrelevant, set(&["p"]));
        assert!(!red_tail(&id, &dec).unwrap().network.contains("p"));
        let full = tail(&id, &dec).unwrap();
        assert!(full.network.contains("p"));
        assert!(full.network.children_of("p").unwrap().is_empty());
    }

    #[test]
    fn aug_body_checks_scope() {
        let id = lone_decision(vec![1.0, 5.0, 2.0]);
        let dec = partition(&id, "d").unwrap();
        let d = Variable::new("d", 3).unwrap();
        let e = Factor::new(vec![d], vec![1.0, 5.0, 2.0]).unwrap();
        let aug = aug_body(&id, &dec, &e).unwrap();
        assert_eq!(aug.names(), set(&["u_d"]));
        assert_eq!(aug.node("u_d").unwrap().utility().unwrap().scalar_value(), Some(5.0));
        let wrong = Factor::new(vec![bin("x")], vec![0.0, 1.0]).unwrap();
        assert!(matches!(aug_body(&id, &dec, &wrong), Err(Error::ScopeMismatch(_))));
    }

    #[test]
    fn single_context_conditional() {
        // k = 1 with Z_1 = Z: the CPT is the conditional of the marginal.
        let (c, z) = (bin("c"), bin("z"));
        let marginal = Factor::new(vec![c.clone(), z.clone()], vec![0.1, 0.3, 0.4, 0.2]).unwrap();
        let plan = ReductionPlan { order: vec!["c".into()], z: set(&["z"]), contexts: vec![set(&["z"])] };
        let cpt = conditional(&marginal, &plan, 0).unwrap();
        let expect = marginal.divide(&marginal.sum_out("c").unwrap()).unwrap();
        assert!(cpt.max_abs_diff(&expect).unwrap() < 1e-15);
        assert_eq!(ratio_spread(&marginal, &plan, 0).unwrap(), 0.0);

        // Z_1 = ∅ with a uniform marginal gives a uniform CPT.
        let uniform = Factor::constant(vec![c, z], 0.25).unwrap();
        let plan = ReductionPlan { order: vec!["c".into()], z: set(&["z"]), contexts: vec![NameSet::new()] };
        assert_eq!(conditional(&uniform, &plan, 0).unwrap().values(), &[0.5, 0.5]);
    }

    #[test]
    fn zero_denominator_columns_are_uniform() {
        let (c, z) = (bin("c"), bin("z"));
        let marginal = Factor::new(vec![c, z], vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        let plan = ReductionPlan { order: vec!["c".into()], z: set(&["z"]), contexts: vec![set(&["z"])] };
        let cpt = conditional(&marginal, &plan, 0).unwrap();
        // Layout (c, z): column z=0 is unreachable.
        assert_eq!(cpt.values(), &[0.5, 0.5, 0.5, 0.5]);
    }
}
