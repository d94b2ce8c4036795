//! Exact Bayesian-network inference by variable elimination.
//!
//! Every factor operation performed during elimination is counted in
//! [`InferenceStats`], so that different evaluators can be compared by the
//! arithmetic they actually do rather than by wall-clock time.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::AddAssign;

use crate::error::{Error, Result};
use crate::factors::Factor;
use crate::model::{InfluenceDiagram, Name, NameSet};

/// Observed values, by node name.
pub type Evidence = BTreeMap<Name, usize>;

/// Operation counters for one or more inference calls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InferenceStats {
    /// Scalar multiplications in every factor product.
    pub multiplications: u64,
    /// The part of `multiplications` spent while eliminating variables, as
    /// opposed to assembling the answer from the surviving factors.
    pub elimination_multiplications: u64,
    pub additions: u64,
    pub divisions: u64,
    /// Largest number of variables in any factor touched.
    pub max_factor_size: usize,
    /// Number of inference calls merged into these counts.
    pub calls: u64,
}

impl InferenceStats {
    pub(crate) fn observe(&mut self, f: &Factor) {
        self.max_factor_size = self.max_factor_size.max(f.width());
    }

    /// `f × g`, counted.
    pub(crate) fn product(&mut self, f: &Factor, g: &Factor, eliminating: bool) -> Result<Factor> {
        let out = f.product(g)?;
        let n = out.len() as u64;
        self.multiplications += n;
        if eliminating {
            self.elimination_multiplications += n;
        }
        self.observe(&out);
        Ok(out)
    }

    /// Product of a non-empty list, left to right.
    pub(crate) fn product_all(&mut self, factors: &[Factor], eliminating: bool) -> Result<Factor> {
        let mut iter = factors.iter();
        let Some(first) = iter.next() else {
            return Ok(Factor::scalar(1.0));
        };
        let mut acc = first.clone();
        for f in iter {
            acc = self.product(&acc, f, eliminating)?;
        }
        Ok(acc)
    }

    pub(crate) fn sum_out(&mut self, f: &Factor, name: &str) -> Result<Factor> {
        let out = f.sum_out(name)?;
        self.additions += (f.len() - out.len()) as u64;
        self.observe(&out);
        Ok(out)
    }

    /// `f + g` over the union scope, counted.
    pub(crate) fn add(&mut self, f: &Factor, g: &Factor) -> Result<Factor> {
        let out = f.add(g)?;
        self.additions += out.len() as u64;
        self.observe(&out);
        Ok(out)
    }

    pub(crate) fn divide(&mut self, f: &Factor, g: &Factor) -> Result<Factor> {
        let out = f.divide(g)?;
        self.divisions += out.len() as u64;
        self.observe(&out);
        Ok(out)
    }

    /// Scales every entry by a constant, counted as multiplications.
    pub(crate) fn scale(&mut self, f: &Factor, by: f64) -> Factor {
        self.multiplications += f.len() as u64;
        f.map(|x| x * by)
    }
}

impl AddAssign for InferenceStats {
    fn add_assign(&mut self, rhs: Self) {
        self.multiplications += rhs.multiplications;
        self.elimination_multiplications += rhs.elimination_multiplications;
        self.additions += rhs.additions;
        self.divisions += rhs.divisions;
        self.max_factor_size = self.max_factor_size.max(rhs.max_factor_size);
        self.calls += rhs.calls;
    }
}

/// A sequence of variables to eliminate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EliminationOrder(pub Vec<Name>);

impl EliminationOrder {
    pub fn as_slice(&self) -> &[Name] {
        &self.0
    }

    /// The members of `eliminate` in the relative order of `global`.
    pub fn conforming(global: &[Name], eliminate: &NameSet) -> Result<Self> {
        let order: Vec<Name> = global.iter().filter(|n| eliminate.contains(*n)).cloned().collect();
        if order.len() != eliminate.len() {
            let missing = eliminate.iter().find(|n| !global.contains(n)).cloned().unwrap_or_else(|| "?".into());
            return Err(Error::InvalidOrder(format!("global order does not mention `{missing}`")));
        }
        Ok(EliminationOrder(order))
    }

    /// Checks that the order names every member of `expected` exactly once.
    pub fn check_covers(&self, expected: &NameSet) -> Result<()> {
        let mut seen = NameSet::new();
        for n in &self.0 {
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidOrder(format!("`{n}` appears twice")));
            }
            if !expected.contains(n) {
                return Err(Error::InvalidOrder(format!("`{n}` must not be eliminated")));
            }
        }
        if let Some(n) = expected.iter().find(|n| !seen.contains(*n)) {
            return Err(Error::InvalidOrder(format!("`{n}` is never eliminated")));
        }
        Ok(())
    }
}

/// Restricts a network to the ancestral set of `targets`.
pub fn relevance_prune(bn: &InfluenceDiagram, targets: &NameSet) -> Result<InfluenceDiagram> {
    bn.restrict_to(&bn.ancestral_set(targets)?)
}

/// Greedy min-fill order over the moral graph, eliminating every node
/// outside `keep`. Ties go to the lexicographically smallest name.
pub fn elimination_order(bn: &InfluenceDiagram, keep: &NameSet) -> EliminationOrder {
    min_fill(bn, keep, &NameSet::new())
}

/// Min-fill order over every chance and decision node of a diagram, on its
/// moral graph with the value nodes deleted.
pub fn global_order(diagram: &InfluenceDiagram) -> Vec<Name> {
    let values: NameSet = diagram.value_nodes().map(|n| n.name().clone()).collect();
    min_fill(diagram, &NameSet::new(), &values).0
}

/// Min-fill over the moral graph with the `removed` nodes deleted first.
fn min_fill(bn: &InfluenceDiagram, keep: &NameSet, removed: &NameSet) -> EliminationOrder {
    let moral = bn.moral_graph();
    let names = moral.nodes();
    let gone: Vec<bool> = names.iter().map(|n| removed.contains(n)).collect();
    let mut adj: Vec<BTreeSet<usize>> =
        moral.adjacency().iter().map(|a| a.iter().copied().filter(|&j| !gone[j]).collect()).collect();
    let mut pending: BTreeSet<usize> = (0..names.len()).filter(|&i| !gone[i] && !keep.contains(&names[i])).collect();
    let mut order = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let fill = |i: usize| {
            let nb: Vec<usize> = adj[i].iter().copied().collect();
            let mut missing = 0usize;
            for (k, &a) in nb.iter().enumerate() {
                missing += nb[k + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
            }
            missing
        };
        // Indices follow name order, so the first minimum is the lexicographic tie-break.
        let best = pending.iter().copied().min_by_key(|&i| fill(i)).expect("pending is non-empty");
        let nb: Vec<usize> = adj[best].iter().copied().collect();
        for &a in &nb {
            adj[a].remove(&best);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[best].clear();
        pending.remove(&best);
        order.push(names[best].clone());
    }
    EliminationOrder(order)
}

/// The inference interface the evaluators are written against.
pub trait InferenceEngine {
    /// Unnormalized `P(query, evidence)` as a factor over `query`.
    fn infer(&self, bn: &InfluenceDiagram, query: &NameSet, evidence: &Evidence) -> Result<(Factor, InferenceStats)>;
}

/// How [`VariableElimination`] picks its elimination order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum OrderPolicy {
    #[default]
    MinFill,
    /// Eliminate in the relative order of a fixed global sequence.
    Conform(Arc<[Name]>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableElimination {
    pub policy: OrderPolicy,
}

impl VariableElimination {
    pub fn min_fill() -> Self {
        VariableElimination { policy: OrderPolicy::MinFill }
    }

    pub fn conforming(global: impl Into<Arc<[Name]>>) -> Self {
        VariableElimination { policy: OrderPolicy::Conform(global.into()) }
    }

    /// The order this engine would use for a query.
    pub fn order_for(&self, bn: &InfluenceDiagram, query: &NameSet, evidence: &Evidence) -> Result<EliminationOrder> {
        let observed: NameSet = evidence.keys().cloned().collect();
        match &self.policy {
            OrderPolicy::MinFill => Ok(min_fill(bn, query, &observed)),
            OrderPolicy::Conform(global) => {
                let eliminate: NameSet =
                    bn.names().into_iter().filter(|n| !query.contains(n) && !observed.contains(n)).collect();
                EliminationOrder::conforming(global, &eliminate)
            }
        }
    }
}

impl InferenceEngine for VariableElimination {
    fn infer(&self, bn: &InfluenceDiagram, query: &NameSet, evidence: &Evidence) -> Result<(Factor, InferenceStats)> {
        let order = self.order_for(bn, query, evidence)?;
        bn_inf(bn, query, evidence, &order)
    }
}

/// Variable elimination with a given order.
///
/// Evidence is applied by restricting every CPT before elimination; the
/// order must name exactly the nodes that are neither queried nor observed.
/// The network is not pruned here; see [`relevance_prune`].
pub fn bn_inf(
    bn: &InfluenceDiagram,
    query: &NameSet,
    evidence: &Evidence,
    order: &EliminationOrder,
) -> Result<(Factor, InferenceStats)> {
    if let Some(n) = bn.nodes().iter().find(|n| !n.is_random()) {
        return Err(Error::NotBayesNet(n.name().clone()));
    }
    for q in query {
        bn.node(q)?;
        if evidence.contains_key(q) {
            return Err(Error::QueryEvidenceOverlap(q.clone()));
        }
    }
    for (name, &value) in evidence {
        let var = bn.node(name)?.variable().expect("random nodes have frames");
        if value >= var.cardinality() {
            return Err(Error::ValueOutOfRange { name: name.clone(), value, cardinality: var.cardinality() });
        }
    }
    let eliminate: NameSet =
        bn.names().into_iter().filter(|n| !query.contains(n) && !evidence.contains_key(n)).collect();
    order.check_covers(&eliminate)?;

    let mut stats = InferenceStats { calls: 1, ..InferenceStats::default() };
    let mut pool: Vec<Factor> = Vec::with_capacity(bn.len());
    for node in bn.nodes() {
        let mut f = node.cpt().expect("random nodes have CPTs").clone();
        for (name, &value) in evidence {
            if f.contains(name) {
                f = f.restrict(name, value)?;
            }
        }
        stats.observe(&f);
        pool.push(f);
    }
    for x in order.as_slice() {
        let (bucket, rest): (Vec<Factor>, Vec<Factor>) = pool.into_iter().partition(|f| f.contains(x));
        pool = rest;
        if bucket.is_empty() {
            continue;
        }
        let joint = stats.product_all(&bucket, true)?;
        pool.push(stats.sum_out(&joint, x)?);
    }
    let result = stats.product_all(&pool, false)?;
    debug_assert_eq!(result.width(), query.len());
    Ok((result, stats))
}
