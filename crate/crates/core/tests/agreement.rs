//! Every evaluator against the exhaustive oracle on the seeded suite.

mod common;

use common::{assert_close, dense, suite};
use influence_core::baselines::{brute_force, eval_id1, policy_value, shachter_peot, OracleCaps};
use influence_core::evaluator::{eval_id, Evaluator};
use influence_core::inference::VariableElimination;
use influence_core::random::DiagramShape;
use influence_core::{Factor, Name, NameSet};

const TOL: f64 = 1e-8;

#[test]
fn reduction_matches_the_oracle() {
    let caps = OracleCaps::default();
    for (seed, id) in suite(&DiagramShape::default()) {
        let result = eval_id(&id).unwrap();
        let best = brute_force(&id, &caps).unwrap().expected_value;
        assert_close(result.expected_value, best, TOL, &format!("seed {seed} value"));
        let attained = policy_value(&id, &result.policy, &caps).unwrap();
        assert_close(attained, best, TOL, &format!("seed {seed} policy"));
        assert_eq!(result.policy.len(), id.decisions().count());
        assert_eq!(result.stages.len(), id.decisions().count());
    }
}

#[test]
fn fusion_and_single_value_method_agree() {
    let engine = VariableElimination::min_fill();
    let mut single = 0;
    for (seed, id) in suite(&DiagramShape::default()) {
        let value = eval_id(&id).unwrap().expected_value;
        assert_close(eval_id1(&id).unwrap().expected_value, value, TOL, &format!("seed {seed} fusion"));
        if id.value_nodes().count() == 1 {
            single += 1;
            let sp = shachter_peot(&id, &engine).unwrap();
            assert_close(sp.expected_value, value, TOL, &format!("seed {seed} shachter-peot"));
        }
    }
    assert!(single >= 50, "only {single} single-value diagrams");
}

/// `Σ f_v · P` and `P` over the relevant parents and `d`, from the full joint of the tail.
fn conditional_utility(tail: &influence_core::decomposition::Tail) -> (Factor, Factor) {
    let values: NameSet = tail.values.iter().map(|v| v.name.clone()).collect();
    let mut joint = Factor::scalar(1.0);
    for node in tail.network.nodes().iter().filter(|n| !values.contains(n.name())) {
        joint = joint.product(node.cpt().unwrap()).unwrap();
    }
    let mut keep = tail.decomposition.relevant.clone();
    keep.insert(tail.decomposition.decision.clone());
    let outside: Vec<Name> = joint.scope().iter().map(|v| v.name().clone()).filter(|n| !keep.contains(n)).collect();
    let mut weighted = Factor::scalar(0.0);
    for v in &tail.values {
        weighted = weighted.add(&joint.product(&v.utility).unwrap()).unwrap();
    }
    let mut mass = joint;
    for n in &outside {
        mass = mass.sum_out(n).unwrap();
        if weighted.contains(n) {
            weighted = weighted.sum_out(n).unwrap();
        }
    }
    (weighted, mass)
}

#[test]
fn functionals_are_conditional_expected_utilities() {
    let mut checked = 0;
    for (seed, id) in suite(&DiagramShape::default()).take(120) {
        let result = Evaluator::new(VariableElimination::min_fill()).recording().evaluate(&id).unwrap();
        for stage in &result.stages {
            let detail = stage.detail.as_ref().unwrap();
            let (weighted, mass) = conditional_utility(&detail.reduced_tail);
            // e·P − Σ f·P, relative to P, wherever P > 0.
            let scaled = detail.functional.combine(&mass, |e, p| e * p).unwrap();
            let diff = scaled.combine(&weighted, |a, b| (a - b).abs()).unwrap();
            let masked = diff.combine(&mass, |x, p| if p > 0.0 { x / p } else { 0.0 }).unwrap();
            assert!(masked.max() <= TOL, "seed {seed} stage {}: {}", stage.decision, masked.max());
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn every_stage_preserves_the_optimum() {
    let caps = OracleCaps::default();
    let mut reduced = 0;
    for shape in [DiagramShape::default(), dense()] {
        for (seed, id) in suite(&shape) {
            let best = brute_force(&id, &caps).unwrap().expected_value;
            let result = Evaluator::new(VariableElimination::min_fill()).recording().evaluate(&id).unwrap();
            for stage in &result.stages {
                let detail = stage.detail.as_ref().unwrap();
                let aug = brute_force(&detail.aug_body, &caps).unwrap().expected_value;
                assert_close(aug, best, TOL, &format!("seed {seed} stage {} augmented body", stage.decision));
                if let Some(body) = &detail.reduced_body {
                    reduced += 1;
                    let red = brute_force(body, &caps).unwrap().expected_value;
                    assert_close(red, aug, TOL, &format!("seed {seed} stage {} reduced body", stage.decision));
                }
                assert_eq!(detail.aug_body.decisions().count() + 1, detail.diagram.decisions().count());
            }
        }
    }
    assert!(reduced >= 40, "only {reduced} reduced bodies");
}

#[test]
fn single_value_queries_are_larger_than_tail_queries() {
    let engine = VariableElimination::min_fill();
    let mut strict = 0;
    for (seed, id) in suite(&DiagramShape::default()) {
        if id.value_nodes().count() != 1 || id.decisions().count() == 0 {
            continue;
        }
        let pruned = id.prune_barren();
        let dec = influence_core::decomposition::decompose(&pruned).unwrap();
        let sp = shachter_peot(&id, &engine).unwrap();
        let ours = eval_id(&id).unwrap();
        let Some(tv) = ours.stages[0].queries.iter().find(|q| q.label.starts_with("T_v")) else {
            continue;
        };
        let Some(sq) = sp.stages[0].queries.first() else {
            continue;
        };
        assert!(sq.nodes >= tv.nodes, "seed {seed}");
        if !dec.irrelevant.is_empty() || !dec.upstream.is_empty() {
            assert!(sq.nodes > tv.nodes, "seed {seed}: {} vs {}", sq.nodes, tv.nodes);
            strict += 1;
        }
    }
    assert!(strict >= 10, "only {strict} strict cases");
}
