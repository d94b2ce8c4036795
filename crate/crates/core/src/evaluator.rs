//! The reduction evaluator: per-stage evaluation functionals, optimal rules,
//! and expected values of value networks, all computed through an
//! [`InferenceEngine`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::decomposition::{aug_body, cooper_transform, partition, red_body, red_tail, Tail, TailDecomposition};
use crate::error::{Error, Result};
use crate::factors::{ArgTable, Factor, Variable};
use crate::inference::{relevance_prune, Evidence, InferenceEngine, InferenceStats, VariableElimination};
use crate::model::{InfluenceDiagram, Name, NameSet};

/// An optimal action for every configuration of the rule's scope.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRule {
    pub decision: Variable,
    pub table: ArgTable,
}

impl DecisionRule {
    pub fn scope(&self) -> &[Variable] {
        self.table.scope()
    }

    /// The action for the configuration chosen by `value_of`.
    pub fn action(&self, value_of: impl FnMut(&Variable) -> usize) -> usize {
        self.table.choice_for(value_of)
    }
}

/// One inference call made while evaluating.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryRecord {
    pub label: String,
    /// Nodes in the network handed to the engine.
    pub nodes: usize,
    pub stats: InferenceStats,
}

/// Evaluation functional of a reduced tail and the marginal over its relevant parents.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalOutput {
    pub functional: Factor,
    pub marginal: Factor,
    pub queries: Vec<QueryRecord>,
    /// Everything counted, including the arithmetic that assembles the functional.
    pub stats: InferenceStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueOutput {
    pub value: f64,
    pub queries: Vec<QueryRecord>,
    pub stats: InferenceStats,
}

/// What happened at one decision's stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageTrace {
    pub decision: Name,
    /// Absent for methods that do not decompose the diagram.
    pub decomposition: Option<TailDecomposition>,
    pub queries: Vec<QueryRecord>,
    pub stats: InferenceStats,
    /// Present when the evaluator records intermediate diagrams.
    pub detail: Option<StageDetail>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageDetail {
    pub diagram: InfluenceDiagram,
    pub reduced_tail: Tail,
    pub functional: Factor,
    pub marginal: Factor,
    pub aug_body: InfluenceDiagram,
    /// Only when `π_{d,2}` is non-empty.
    pub reduced_body: Option<InfluenceDiagram>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationResult {
    /// One rule per decision, in the order the decisions are taken.
    pub policy: Vec<DecisionRule>,
    pub expected_value: f64,
    /// Stages in the order they were solved (last decision first).
    pub stages: Vec<StageTrace>,
    /// Queries of the final value-network evaluation.
    pub final_queries: Vec<QueryRecord>,
    pub final_stats: InferenceStats,
}

impl EvaluationResult {
    /// Per-stage counters, followed by the final value-network stage.
    pub fn stage_stats(&self) -> Vec<InferenceStats> {
        self.stages.iter().map(|s| s.stats).chain(core::iter::once(self.final_stats)).collect()
    }

    pub fn total_stats(&self) -> InferenceStats {
        let mut total = InferenceStats::default();
        for s in self.stage_stats() {
            total += s;
        }
        total
    }

    pub fn rule(&self, decision: &str) -> Option<&DecisionRule> {
        self.policy.iter().find(|r| &**r.decision.name() == decision)
    }
}

fn query<E: InferenceEngine + ?Sized>(
    engine: &E,
    label: String,
    bn: &InfluenceDiagram,
    query: &NameSet,
    evidence: &Evidence,
    queries: &mut Vec<QueryRecord>,
    total: &mut InferenceStats,
) -> Result<Factor> {
    let (f, stats) = engine.infer(bn, query, evidence)?;
    queries.push(QueryRecord { label, nodes: bn.len(), stats });
    *total += stats;
    Ok(f)
}

/// The evaluation functional `e(π_{d,r}, d)` of a reduced tail, in utility
/// units, and `P_{T_c}(π_{d,r})`.
///
/// Configurations with zero probability get the value 0.
pub fn eval_fun<E: InferenceEngine + ?Sized>(tail: &Tail, engine: &E) -> Result<FunctionalOutput> {
    let dec = &tail.decomposition;
    let d = &dec.decision;
    let mut queries = Vec::new();
    let mut stats = InferenceStats::default();

    let tc = relevance_prune(&tail.network, &dec.relevant)?;
    let marginal = query(engine, String::from("T_c"), &tc, &dec.relevant, &Evidence::new(), &mut queries, &mut stats)?;

    let mut scope = tail.relevant_variables()?;
    scope.push(tail.decision.clone());
    let mut keep = dec.relevant.clone();
    keep.insert(d.clone());
    let mut numerator = Factor::constant(scope, 0.0)?;
    let mut offset = 0.0;
    for v in &tail.values {
        offset += v.offset;
        if v.is_degenerate() {
            continue;
        }
        let mut targets = keep.clone();
        targets.insert(v.name.clone());
        let tv = relevance_prune(&tail.network, &targets)?;
        let evidence = Evidence::from([(v.name.clone(), 1)]);
        let p = query(engine, format!("T_{}", v.name), &tv, &keep, &evidence, &mut queries, &mut stats)?;
        let term = stats.scale(&p, v.scale);
        numerator = stats.add(&numerator, &term)?;
    }
    let omega = tail.decision.cardinality() as f64;
    stats.divisions += numerator.len() as u64;
    let functional = numerator.combine(&marginal, |n, p| if p > 0.0 { n / (p / omega) - offset } else { 0.0 })?;
    Ok(FunctionalOutput { functional, marginal, queries, stats })
}

/// `argmax_d e`, smallest action on ties.
pub fn optimal_rule(functional: &Factor, decision: &Variable) -> Result<DecisionRule> {
    let (_, table) = functional.max_out(decision.name())?;
    Ok(DecisionRule { decision: decision.clone(), table })
}

/// Cooper-transforms every value node of a decision-free diagram.
pub(crate) fn value_network_as_bn(
    network: &InfluenceDiagram,
) -> Result<(InfluenceDiagram, Vec<crate::decomposition::CooperValue>)> {
    if let Some(d) = network.decisions().next() {
        return Err(Error::DecisionPresent(d.name().clone()));
    }
    let mut nodes = Vec::with_capacity(network.len());
    let mut values = Vec::new();
    for node in network.nodes() {
        if node.is_value() {
            let (random, info) = cooper_transform(node)?;
            nodes.push(random);
            values.push(info);
        } else {
            nodes.push(node.clone());
        }
    }
    Ok((InfluenceDiagram::new(nodes)?, values))
}

/// Expected value of a value network: `Σ_v P(v = 1)·M_v − K_v`, each
/// probability computed on the ancestors of `v` alone.
pub fn exp_val<E: InferenceEngine + ?Sized>(network: &InfluenceDiagram, engine: &E) -> Result<ValueOutput> {
    let (bn, values) = value_network_as_bn(network)?;
    let mut queries = Vec::new();
    let mut stats = InferenceStats::default();
    let mut value = 0.0;
    for v in &values {
        if v.is_degenerate() {
            value -= v.offset;
            continue;
        }
        let target = NameSet::from([v.name.clone()]);
        let nv = relevance_prune(&bn, &target)?;
        let p = query(engine, format!("N_{}", v.name), &nv, &target, &Evidence::new(), &mut queries, &mut stats)?;
        stats.multiplications += 1;
        value += v.expected_utility(p.values()[1]);
    }
    Ok(ValueOutput { value, queries, stats })
}

/// The two numeric steps an evaluation loop delegates.
pub(crate) trait StageMethod {
    fn functional(&self, tail: &Tail) -> Result<FunctionalOutput>;
    fn value(&self, network: &InfluenceDiagram) -> Result<ValueOutput>;
}

struct Reduction<'a, E: ?Sized>(&'a E);

impl<E: InferenceEngine + ?Sized> StageMethod for Reduction<'_, E> {
    fn functional(&self, tail: &Tail) -> Result<FunctionalOutput> {
        eval_fun(tail, self.0)
    }

    fn value(&self, network: &InfluenceDiagram) -> Result<ValueOutput> {
        exp_val(network, self.0)
    }
}

/// Solves decisions from last to first, shrinking the diagram each time.
pub(crate) fn run_stages(
    diagram: &InfluenceDiagram,
    method: &dyn StageMethod,
    record: bool,
) -> Result<EvaluationResult> {
    let report = diagram.validate();
    if !report.is_valid() {
        return Err(Error::InvalidDiagram(format!("{report}")));
    }
    let mut current = diagram.prune_barren();
    let mut policy = Vec::new();
    let mut stages = Vec::new();
    while current.decisions().next().is_some() {
        let d = current.tail_decision_unchecked()?;
        let dec = partition(&current, &d)?;
        let tail = red_tail(&current, &dec)?;
        let out = method.functional(&tail)?;
        policy.push(optimal_rule(&out.functional, &tail.decision)?);
        let aug = aug_body(&current, &dec, &out.functional)?;
        let reduced = if dec.pi2.is_empty() { None } else { Some(red_body(&aug, &dec, &out.marginal, &tail)?) };
        let next = reduced.as_ref().unwrap_or(&aug).prune_barren();
        let detail = record.then(|| StageDetail {
            diagram: current.clone(),
            reduced_tail: tail,
            functional: out.functional.clone(),
            marginal: out.marginal.clone(),
            aug_body: aug,
            reduced_body: reduced,
        });
        stages.push(StageTrace {
            decision: d,
            decomposition: Some(dec),
            queries: out.queries,
            stats: out.stats,
            detail,
        });
        current = next;
    }
    let last = method.value(&current)?;
    policy.reverse();
    Ok(EvaluationResult {
        policy,
        expected_value: last.value,
        stages,
        final_queries: last.queries,
        final_stats: last.stats,
    })
}

/// The reduction evaluator over a chosen inference engine.
#[derive(Clone, Debug, Default)]
pub struct Evaluator<E> {
    pub engine: E,
    /// Keep each stage's tail, functional, and bodies in the result.
    pub record: bool,
}

impl<E: InferenceEngine> Evaluator<E> {
    pub fn new(engine: E) -> Self {
        Evaluator { engine, record: false }
    }

    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn evaluate(&self, diagram: &InfluenceDiagram) -> Result<EvaluationResult> {
        run_stages(diagram, &Reduction(&self.engine), self.record)
    }
}

/// Evaluates a diagram with variable elimination under min-fill orders.
pub fn eval_id(diagram: &InfluenceDiagram) -> Result<EvaluationResult> {
    Evaluator::new(VariableElimination::min_fill()).evaluate(diagram)
}
