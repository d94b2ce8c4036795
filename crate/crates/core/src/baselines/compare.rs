//! Side-by-side runs of every evaluator on one diagram, with operation
//! counts and a per-tail comparison of the reduction and fusion functionals.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::fusion::{eval_fun1, eval_id1_with};
use super::oracle::{brute_force, OracleCaps};
use super::shachter_peot::shachter_peot;
use crate::error::{Error, Result};
use crate::evaluator::{EvaluationResult, Evaluator};
use crate::factors::Factor;
use crate::inference::{global_order, EliminationOrder, InferenceStats, VariableElimination};
use crate::model::{InfluenceDiagram, Name, NameSet};

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Value(f64),
    Skipped(String),
}

impl Outcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Outcome::Value(v) => Some(*v),
            Outcome::Skipped(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodRow {
    pub method: &'static str,
    pub outcome: Outcome,
    /// Absent for the exhaustive oracle, which does no factor arithmetic worth counting.
    pub stats: Option<InferenceStats>,
}

/// The reduction and fusion functionals of one tail.
#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub decision: Name,
    /// Value nodes in the tail.
    pub m: usize,
    pub reduction: InferenceStats,
    pub fusion: InferenceStats,
    /// Largest functional difference over configurations of positive probability.
    pub max_difference: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    match (num, den) {
        (0, _) => 0.0,
        (_, 0) => f64::INFINITY,
        _ => num as f64 / den as f64,
    }
}

impl TailRow {
    /// Elimination-phase multiplications, reduction over fusion.
    pub fn elimination_ratio(&self) -> f64 {
        ratio(self.reduction.elimination_multiplications, self.fusion.elimination_multiplications)
    }

    /// All multiplications, reduction over fusion.
    pub fn full_ratio(&self) -> f64 {
        ratio(self.reduction.multiplications, self.fusion.multiplications)
    }

    pub fn bound(&self) -> u64 {
        1 + self.m as u64
    }

    pub fn bound_holds(&self) -> bool {
        self.reduction.elimination_multiplications <= self.bound() * self.fusion.elimination_multiplications
    }

    pub fn full_bound_holds(&self) -> bool {
        self.reduction.multiplications <= self.bound() * self.fusion.multiplications
    }

    pub fn size_dominated(&self) -> bool {
        self.reduction.max_factor_size <= self.fusion.max_factor_size
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub methods: Vec<MethodRow>,
    pub tails: Vec<TailRow>,
}

impl ComparisonReport {
    pub fn max_elimination_ratio(&self) -> f64 {
        self.tails.iter().map(TailRow::elimination_ratio).fold(0.0, f64::max)
    }

    pub fn max_full_ratio(&self) -> f64 {
        self.tails.iter().map(TailRow::full_ratio).fold(0.0, f64::max)
    }

    /// Largest `m` over the tails.
    pub fn m(&self) -> usize {
        self.tails.iter().map(|t| t.m).max().unwrap_or(0)
    }

    pub fn bound_holds(&self) -> bool {
        self.tails.iter().all(TailRow::bound_holds)
    }

    pub fn size_dominated(&self) -> bool {
        self.tails.iter().all(TailRow::size_dominated)
    }

    /// Largest pairwise gap between the values of the methods that ran.
    pub fn value_spread(&self) -> f64 {
        let values: Vec<f64> = self.methods.iter().filter_map(|r| r.outcome.value()).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    pub fn values_agree(&self, tolerance: f64) -> bool {
        self.value_spread() <= tolerance
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompareOptions {
    /// Run the exhaustive oracle under these caps.
    pub oracle: Option<OracleCaps>,
}

fn masked_difference(a: &Factor, b: &Factor, marginal: &Factor) -> Result<f64> {
    let diff = a.combine(b, |x, y| (x - y).abs())?;
    let masked = diff.combine(marginal, |x, p| if p > 0.0 { x } else { 0.0 })?;
    Ok(masked.max())
}

fn row(method: &'static str, result: Result<EvaluationResult>) -> Result<MethodRow> {
    match result {
        Ok(r) => Ok(MethodRow { method, outcome: Outcome::Value(r.expected_value), stats: Some(r.total_stats()) }),
        Err(Error::RequiresSingleValueNode { found }) => {
            Ok(MethodRow { method, outcome: Outcome::Skipped(format!("{found} value nodes")), stats: None })
        }
        Err(e) => Err(e),
    }
}

/// Runs the reduction evaluator, its fusion variant, the single-value-node
/// method, and optionally the oracle, all under orders conforming to one
/// global min-fill order.
pub fn compare(diagram: &InfluenceDiagram, options: &CompareOptions) -> Result<ComparisonReport> {
    let global = global_order(diagram);
    let engine = VariableElimination::conforming(global.clone());
    let reduction = Evaluator::new(engine.clone()).recording().evaluate(diagram)?;

    let mut tails = Vec::with_capacity(reduction.stages.len());
    for stage in &reduction.stages {
        let detail = stage.detail.as_ref().expect("recorded run");
        let dec = stage.decomposition.as_ref().expect("reduction stages decompose");
        let tail = &detail.reduced_tail;
        let values: NameSet = tail.values.iter().map(|v| v.name.clone()).collect();
        let eliminate: NameSet = tail
            .network
            .names()
            .into_iter()
            .filter(|n| !values.contains(n) && !dec.relevant.contains(n) && *n != dec.decision)
            .collect();
        let fused = eval_fun1(tail, &EliminationOrder::conforming(&global, &eliminate)?)?;
        tails.push(TailRow {
            decision: stage.decision.clone(),
            m: tail.values.len(),
            reduction: stage.stats,
            fusion: fused.stats,
            max_difference: masked_difference(&detail.functional, &fused.functional, &detail.marginal)?,
        });
    }

    let mut methods = Vec::from([
        MethodRow {
            method: "reduction",
            outcome: Outcome::Value(reduction.expected_value),
            stats: Some(reduction.total_stats()),
        },
        row("fusion", eval_id1_with(diagram, global, false))?,
        row("shachter-peot", shachter_peot(diagram, &engine))?,
    ]);
    if let Some(caps) = options.oracle {
        let outcome = match brute_force(diagram, &caps) {
            Ok(r) => Outcome::Value(r.expected_value),
            Err(Error::CapExceeded { .. }) => Outcome::Skipped(String::from("cap")),
            Err(e) => return Err(e),
        };
        methods.push(MethodRow { method: "oracle", outcome, stats: None });
    }
    Ok(ComparisonReport { methods, tails })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::Variable;
    use crate::model::Node;
    use alloc::vec;

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0, 0), 0.0);
        assert_eq!(ratio(3, 0), f64::INFINITY);
        assert_eq!(ratio(6, 4), 1.5);
    }

    #[test]
    fn two_value_nodes_skip_shachter_peot() {
        let c = Variable::binary("c");
        let d = Variable::binary("d");
        let id = InfluenceDiagram::new(vec![
            Node::random(c.clone(), &[], vec![0.5, 0.5]).unwrap(),
            Node::decision(d.clone(), vec![]).unwrap(),
            Node::value("v", &[c.clone(), d.clone()], vec![1.0, 0.0, 0.0, 2.0]).unwrap(),
            Node::value("w", &[d], vec![0.5, 0.0]).unwrap(),
        ])
        .unwrap();
        let report = compare(&id, &CompareOptions { oracle: Some(OracleCaps::default()) }).unwrap();
        let methods: Vec<&str> = report.methods.iter().map(|r| r.method).collect();
        assert_eq!(methods, ["reduction", "fusion", "shachter-peot", "oracle"]);
        assert!(matches!(report.methods[2].outcome, Outcome::Skipped(_)));
        assert!(report.values_agree(1e-12));
        assert_eq!(report.methods[0].outcome.value(), Some(1.0));
        assert_eq!(report.m(), 2);
        assert!(report.bound_holds());
        assert!(report.tails[0].max_difference < 1e-12);
    }

    #[test]
    fn oracle_cap_is_reported_not_raised() {
        let d = Variable::binary("d");
        let id = InfluenceDiagram::new(vec![
            Node::decision(d.clone(), vec![]).unwrap(),
            Node::value("v", &[d], vec![1.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let caps = OracleCaps { joint: 1, policies: 1 };
        let report = compare(&id, &CompareOptions { oracle: Some(caps) }).unwrap();
        assert!(matches!(report.methods[3].outcome, Outcome::Skipped(_)));
    }
}
