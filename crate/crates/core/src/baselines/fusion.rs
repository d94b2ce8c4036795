//! The fusion variant of the reduction evaluator.
//!
//! Instead of asking an inference engine for marginals, the tail and the
//! final value network are solved by eliminating variables directly from a
//! list of probability factors `P` and a list of utility factors `F`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::decomposition::Tail;
use crate::error::Result;
use crate::evaluator::{run_stages, value_network_as_bn, EvaluationResult, FunctionalOutput, StageMethod, ValueOutput};
use crate::factors::Factor;
use crate::inference::{global_order, EliminationOrder, InferenceStats};
use crate::model::{InfluenceDiagram, Name, NameSet};

/// Probability factors `P` and utility factors `F`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactorLists {
    pub probabilities: Vec<Factor>,
    pub utilities: Vec<Factor>,
}

fn take_involving(list: &mut Vec<Factor>, x: &str) -> Vec<Factor> {
    let (hit, keep): (Vec<Factor>, Vec<Factor>) = core::mem::take(list).into_iter().partition(|f| f.contains(x));
    *list = keep;
    hit
}

/// Eliminates `x` from both lists.
///
/// The probability factors involving `x` are replaced by `p = Σ_x ∏ p_i`;
/// the utility factors involving `x` by `Σ_x [Σ f_i][∏ p_i] / p`. With no
/// probability factor on `x` the product is taken to be 1, so `p = |Ω_x|`.
pub fn fuse(lists: &mut FactorLists, x: &str, stats: &mut InferenceStats) -> Result<()> {
    let ps = take_involving(&mut lists.probabilities, x);
    let joint = if ps.is_empty() { None } else { Some(stats.product_all(&ps, true)?) };
    let marginal = match &joint {
        Some(j) => {
            let p = stats.sum_out(j, x)?;
            lists.probabilities.push(p.clone());
            Some(p)
        }
        None => None,
    };
    let fs = take_involving(&mut lists.utilities, x);
    if fs.is_empty() {
        return Ok(());
    }
    let mut sum = fs[0].clone();
    for f in &fs[1..] {
        sum = stats.add(&sum, f)?;
    }
    let fused = match (&joint, &marginal) {
        (Some(j), Some(p)) => {
            let weighted = stats.product(&sum, j, true)?;
            let summed = stats.sum_out(&weighted, x)?;
            stats.divide(&summed, p)?
        }
        _ => {
            let card = sum.variable(x).expect("x is in every fused utility").cardinality();
            let summed = stats.sum_out(&sum, x)?;
            stats.divide(&summed, &Factor::scalar(card as f64))?
        }
    };
    lists.utilities.push(fused);
    Ok(())
}

/// Evaluation functional of a reduced tail by fusion.
///
/// `P` holds the CPTs of every chance node of the tail (including the uniform
/// priors of `d` and of the relevant parents), `F` the original utility
/// tables; `order` must list exactly the downstream chance nodes.
pub fn eval_fun1(tail: &Tail, order: &EliminationOrder) -> Result<FunctionalOutput> {
    let dec = &tail.decomposition;
    let value_names: NameSet = tail.values.iter().map(|v| v.name.clone()).collect();
    let mut keep = dec.relevant.clone();
    keep.insert(dec.decision.clone());
    let eliminate: NameSet =
        tail.network.names().into_iter().filter(|n| !value_names.contains(n) && !keep.contains(n)).collect();
    order.check_covers(&eliminate)?;

    let mut stats = InferenceStats { calls: 1, ..InferenceStats::default() };
    let mut lists = FactorLists::default();
    for node in tail.network.nodes() {
        if !value_names.contains(node.name()) {
            let cpt = node.cpt().expect("tail nodes are random").clone();
            stats.observe(&cpt);
            lists.probabilities.push(cpt);
        }
    }
    for v in &tail.values {
        stats.observe(&v.utility);
        lists.utilities.push(v.utility.clone());
    }
    for x in order.as_slice() {
        fuse(&mut lists, x, &mut stats)?;
    }
    let mut scope = tail.relevant_variables()?;
    scope.push(tail.decision.clone());
    let joint = stats.product_all(&lists.probabilities, false)?.expand(&scope)?;
    let mut functional = Factor::constant(scope, 0.0)?;
    for f in &lists.utilities {
        functional = stats.add(&functional, f)?;
    }
    let marginal = stats.sum_out(&joint, &dec.decision)?;
    Ok(FunctionalOutput { functional, marginal, queries: Vec::new(), stats })
}

/// Expected value of a value network by fusing every chance node in `order`.
pub fn exp_val1(network: &InfluenceDiagram, order: &EliminationOrder) -> Result<ValueOutput> {
    let (_, values) = value_network_as_bn(network)?;
    let chance: NameSet = network.random_nodes().map(|n| n.name().clone()).collect();
    order.check_covers(&chance)?;
    let mut stats = InferenceStats { calls: 1, ..InferenceStats::default() };
    let mut lists = FactorLists::default();
    for node in network.random_nodes() {
        lists.probabilities.push(node.cpt().expect("random").clone());
    }
    for v in &values {
        lists.utilities.push(v.utility.clone());
    }
    for x in order.as_slice() {
        fuse(&mut lists, x, &mut stats)?;
    }
    let mut value = 0.0;
    for f in &lists.utilities {
        stats.additions += 1;
        value += f.scalar_value().expect("every chance variable has been fused");
    }
    Ok(ValueOutput { value, queries: Vec::new(), stats })
}

struct Fusion {
    global: Arc<[Name]>,
}

impl StageMethod for Fusion {
    fn functional(&self, tail: &Tail) -> Result<FunctionalOutput> {
        let dec = &tail.decomposition;
        let values: NameSet = tail.values.iter().map(|v| v.name.clone()).collect();
        let eliminate: NameSet = tail
            .network
            .names()
            .into_iter()
            .filter(|n| !values.contains(n) && !dec.relevant.contains(n) && *n != dec.decision)
            .collect();
        eval_fun1(tail, &EliminationOrder::conforming(&self.global, &eliminate)?)
    }

    fn value(&self, network: &InfluenceDiagram) -> Result<ValueOutput> {
        let chance: NameSet = network.random_nodes().map(|n| n.name().clone()).collect();
        exp_val1(network, &EliminationOrder::conforming(&self.global, &chance)?)
    }
}

/// The reduction loop with every stage solved by fusion, all orders
/// conforming to one global min-fill order of the input diagram.
pub fn eval_id1(diagram: &InfluenceDiagram) -> Result<EvaluationResult> {
    eval_id1_with(diagram, global_order(diagram), false)
}

/// Like [`eval_id1`] with an explicit global order.
pub fn eval_id1_with(diagram: &InfluenceDiagram, global: Vec<Name>, record: bool) -> Result<EvaluationResult> {
    run_stages(diagram, &Fusion { global: global.into() }, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{partition, red_tail};
    use crate::factors::Variable;
    use crate::model::Node;
    use crate::random::{random_bayes_net, BayesNetShape};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin(name: &str) -> Variable {
        Variable::binary(name)
    }

    #[test]
    fn fusing_a_lone_prior_leaves_one() {
        let x = bin("x");
        let mut lists =
            FactorLists { probabilities: vec![Factor::new(vec![x], vec![0.5, 0.5]).unwrap()], utilities: vec![] };
        fuse(&mut lists, "x", &mut InferenceStats::default()).unwrap();
        assert_eq!(lists.probabilities.len(), 1);
        assert_eq!(lists.probabilities[0].scalar_value(), Some(1.0));
    }

    #[test]
    fn utility_without_probability_is_averaged() {
        let x = bin("x");
        let mut lists =
            FactorLists { probabilities: vec![], utilities: vec![Factor::new(vec![x], vec![2.0, 4.0]).unwrap()] };
        fuse(&mut lists, "x", &mut InferenceStats::default()).unwrap();
        assert!(lists.probabilities.is_empty());
        assert_eq!(lists.utilities[0].scalar_value(), Some(3.0));
    }

    #[test]
    fn fusing_an_absent_variable_changes_nothing() {
        let x = bin("x");
        let mut lists = FactorLists {
            probabilities: vec![Factor::new(vec![x.clone()], vec![0.3, 0.7]).unwrap()],
            utilities: vec![Factor::new(vec![x], vec![1.0, 2.0]).unwrap()],
        };
        let before = lists.clone();
        fuse(&mut lists, "y", &mut InferenceStats::default()).unwrap();
        assert_eq!(lists, before);
    }

    #[test]
    fn exp_val1_examples() {
        let a = bin("a");
        let net = InfluenceDiagram::new(vec![
            Node::random(a.clone(), &[], vec![0.4, 0.6]).unwrap(),
            Node::value("v", core::slice::from_ref(&a), vec![0.0, 10.0]).unwrap(),
        ])
        .unwrap();
        let out = exp_val1(&net, &EliminationOrder(vec![Name::from("a")])).unwrap();
        assert!((out.value - 6.0).abs() < 1e-12);
        let bare = InfluenceDiagram::new(vec![Node::random(a, &[], vec![0.4, 0.6]).unwrap()]).unwrap();
        assert_eq!(exp_val1(&bare, &EliminationOrder(vec![Name::from("a")])).unwrap().value, 0.0);
        assert!(exp_val1(&net, &EliminationOrder(vec![])).is_err());
    }

    #[test]
    fn lone_decision_functional_is_the_utility() {
        let d = Variable::new("d", 3).unwrap();
        let id = InfluenceDiagram::new(vec![
            Node::decision(d.clone(), vec![]).unwrap(),
            Node::value("v", &[d], vec![1.0, 5.0, 2.0]).unwrap(),
        ])
        .unwrap();
        let tail = red_tail(&id, &partition(&id, "d").unwrap()).unwrap();
        let out = eval_fun1(&tail, &EliminationOrder(vec![])).unwrap();
        assert_eq!(out.functional.values(), &[1.0, 5.0, 2.0]);
        let result = eval_id1(&id).unwrap();
        assert_eq!(result.policy[0].table.choices(), &[1]);
        assert!((result.expected_value - 5.0).abs() < 1e-12);
    }

    /// `Σ_x ∏P · ΣF` over every variable still in play.
    fn conserved(lists: &FactorLists) -> f64 {
        let mut p = Factor::scalar(1.0);
        for f in &lists.probabilities {
            p = p.product(f).unwrap();
        }
        let mut total = 0.0;
        for u in &lists.utilities {
            total += p.product(u).unwrap().total();
        }
        total
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fusion_conserves_expected_utility(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nodes = rng.random_range(1..=6);
            let bn = random_bayes_net(&mut rng, &BayesNetShape { nodes, ..BayesNetShape::default() });
            let vars: Vec<Variable> = bn.nodes().iter().map(|n| n.variable().unwrap().clone()).collect();
            let mut lists = FactorLists::default();
            for node in bn.nodes() {
                lists.probabilities.push(node.cpt().unwrap().clone());
            }
            for _ in 0..rng.random_range(1..=3) {
                let scope: Vec<Variable> = vars.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
                let len: usize = scope.iter().map(Variable::cardinality).product();
                let table = (0..len).map(|_| rng.random_range(-5.0..10.0)).collect();
                lists.utilities.push(Factor::new(scope, table).unwrap());
            }
            let start = conserved(&lists);
            let mut stats = InferenceStats::default();
            for v in &vars {
                fuse(&mut lists, v.name(), &mut stats).unwrap();
                let now = conserved(&lists);
                prop_assert!((now - start).abs() <= 1e-8 * start.abs().max(1.0), "{start} -> {now}");
            }
            let sum: f64 = lists.utilities.iter().map(|f| f.scalar_value().unwrap()).sum();
            prop_assert!((sum - start).abs() <= 1e-8 * start.abs().max(1.0));
        }
    }
}
