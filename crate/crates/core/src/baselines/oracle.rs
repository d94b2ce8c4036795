//! Exhaustive reference evaluators.
//!
//! [`brute_force`] rolls back the full decision tree over the joint state
//! space: it sums out each block of newly observed chance variables and
//! maximizes each decision, innermost first. [`enumerate_policies`] scores
//! every policy over full parent scopes one by one and is only practical on
//! tiny diagrams; it exists to cross-check the rollback.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evaluator::{DecisionRule, EvaluationResult};
use crate::factors::{ArgTable, Factor, Variable};
use crate::inference::InferenceStats;
use crate::model::{InfluenceDiagram, Name, NameSet};

/// Size limits for the exhaustive evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    /// Largest joint state space over chance and decision nodes.
    pub joint: u128,
    /// Largest number of policies [`enumerate_policies`] may visit.
    pub policies: u128,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { joint: 1_000_000, policies: 1_000_000 }
    }
}

fn valid(diagram: &InfluenceDiagram) -> Result<()> {
    let report = diagram.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidDiagram(alloc::format!("{report}")))
    }
}

/// Chance and decision variables in temporal order
/// `I_0, d_1, I_1, …, d_k, I_k`, with the block boundaries.
struct Layout {
    vars: Vec<Variable>,
    /// Position of each `d_j` and the length of the block `I_j` after it.
    decisions: Vec<(usize, usize)>,
}

fn temporal_layout(diagram: &InfluenceDiagram) -> Result<Layout> {
    let order = diagram.decision_order();
    let mut placed = NameSet::new();
    let mut vars = Vec::new();
    let frame =
        |n: &Name| diagram.node(n).map(|x| x.variable().expect("chance and decision nodes have frames").clone());
    let block_of = |names: Vec<Name>, placed: &mut NameSet, vars: &mut Vec<Variable>| -> Result<usize> {
        let mut count = 0;
        for n in names {
            if placed.insert(n.clone()) {
                vars.push(frame(&n)?);
                count += 1;
            }
        }
        Ok(count)
    };
    let observed = |d: &Name| -> Result<Vec<Name>> {
        Ok(diagram
            .node(d)?
            .parents()
            .iter()
            .filter(|p| diagram.node(p).is_ok_and(|x| x.is_random()))
            .cloned()
            .collect())
    };
    let first = match order.first() {
        Some(d) => observed(d)?,
        None => Vec::new(),
    };
    block_of(first, &mut placed, &mut vars)?;
    let mut decisions = Vec::with_capacity(order.len());
    for (j, d) in order.iter().enumerate() {
        let pos = vars.len();
        placed.insert(d.clone());
        vars.push(frame(d)?);
        let next = match order.get(j + 1) {
            Some(n) => observed(n)?,
            None => diagram.random_nodes().map(|x| x.name().clone()).collect(),
        };
        let len = block_of(next, &mut placed, &mut vars)?;
        decisions.push((pos, len));
    }
    if order.is_empty() {
        let rest = diagram.random_nodes().map(|x| x.name().clone()).collect();
        block_of(rest, &mut placed, &mut vars)?;
    }
    Ok(Layout { vars, decisions })
}

fn joint_size(vars: &[Variable]) -> u128 {
    vars.iter().map(|v| v.cardinality() as u128).product()
}

/// Probability weight and total utility of one full configuration.
fn weight_and_utility(diagram: &InfluenceDiagram, index: &BTreeMap<Name, usize>, state: &[usize]) -> (f64, f64) {
    let lookup = |v: &Variable| state[index[v.name()]];
    let mut w = 1.0;
    let mut u = 0.0;
    for node in diagram.nodes() {
        if let Some(cpt) = node.cpt() {
            w *= cpt.value_for(lookup);
        } else if let Some(f) = node.utility() {
            u += f.value_for(lookup);
        }
    }
    (w, u)
}

fn next_state(state: &mut [usize], vars: &[Variable]) -> bool {
    for k in (0..state.len()).rev() {
        state[k] += 1;
        if state[k] < vars[k].cardinality() {
            return true;
        }
        state[k] = 0;
    }
    false
}

/// Re-lays a table given over `temporal` (row-major) onto the canonical
/// name-sorted scope, as action indices.
fn rule_from_temporal(decision: &Variable, temporal: &[Variable], choices: &[usize]) -> Result<DecisionRule> {
    let f = Factor::new(temporal.to_vec(), choices.iter().map(|&c| c as f64).collect())?;
    let sorted: Vec<usize> = f.values().iter().map(|&c| c as usize).collect();
    Ok(DecisionRule { decision: decision.clone(), table: ArgTable::new(f.scope().to_vec(), decision.clone(), sorted)? })
}

fn oracle_result(policy: Vec<DecisionRule>, expected_value: f64) -> EvaluationResult {
    EvaluationResult {
        policy,
        expected_value,
        stages: Vec::new(),
        final_queries: Vec::new(),
        final_stats: InferenceStats::default(),
    }
}

/// Optimal policy and value by rolling back the decision tree.
///
/// Rules range over each decision's full parent set; on ties, and in
/// unreachable contexts, the smallest action wins.
pub fn brute_force(diagram: &InfluenceDiagram, caps: &OracleCaps) -> Result<EvaluationResult> {
    valid(diagram)?;
    let layout = temporal_layout(diagram)?;
    let size = joint_size(&layout.vars);
    if size > caps.joint {
        return Err(Error::CapExceeded { what: "joint state space", size, cap: caps.joint });
    }
    let index: BTreeMap<Name, usize> = layout.vars.iter().enumerate().map(|(i, v)| (v.name().clone(), i)).collect();
    let mut table = Vec::with_capacity(size as usize);
    let mut state = vec![0usize; layout.vars.len()];
    loop {
        let (w, u) = weight_and_utility(diagram, &index, &state);
        table.push(w * u);
        if !next_state(&mut state, &layout.vars) {
            break;
        }
    }

    let block_len = |from: usize, len: usize| -> usize {
        layout.vars[from..from + len].iter().map(Variable::cardinality).product()
    };
    let mut policy = Vec::with_capacity(layout.decisions.len());
    for &(pos, len) in layout.decisions.iter().rev() {
        let group = block_len(pos + 1, len);
        table = table.chunks(group).map(|c| c.iter().sum()).collect();
        let card = layout.vars[pos].cardinality();
        let mut choices = Vec::with_capacity(table.len() / card);
        let mut maxed = Vec::with_capacity(table.len() / card);
        for chunk in table.chunks(card) {
            let mut best = 0;
            for (a, &x) in chunk.iter().enumerate() {
                if x > chunk[best] {
                    best = a;
                }
            }
            choices.push(best);
            maxed.push(chunk[best]);
        }
        table = maxed;
        policy.push(rule_from_temporal(&layout.vars[pos], &layout.vars[..pos], &choices)?);
    }
    let value: f64 = table.iter().sum();
    policy.reverse();
    Ok(oracle_result(policy, value))
}

/// Expected utility of following `policy`, by enumerating every chance
/// configuration. Each rule's scope must be among the decision's parents.
pub fn policy_value(diagram: &InfluenceDiagram, policy: &[DecisionRule], caps: &OracleCaps) -> Result<f64> {
    let order = diagram.decision_order();
    let mut rules = Vec::with_capacity(order.len());
    for d in &order {
        let rule = policy.iter().find(|r| r.decision.name() == d).ok_or_else(|| Error::MissingRule(d.clone()))?;
        let parents = diagram.node(d)?.parents();
        if let Some(v) = rule.scope().iter().find(|v| !parents.contains(v.name())) {
            return Err(Error::ScopeMismatch(alloc::format!("rule for `{d}` depends on non-parent `{}`", v.name())));
        }
        rules.push(rule);
    }
    let chance: Vec<Variable> = diagram.random_nodes().map(|n| n.variable().expect("framed").clone()).collect();
    let decisions: Vec<Variable> =
        order.iter().map(|d| diagram.node(d).map(|n| n.variable().expect("framed").clone())).collect::<Result<_>>()?;
    let size = joint_size(&chance);
    if size > caps.joint {
        return Err(Error::CapExceeded { what: "chance state space", size, cap: caps.joint });
    }
    let vars: Vec<Variable> = chance.iter().chain(decisions.iter()).cloned().collect();
    let index: BTreeMap<Name, usize> = vars.iter().enumerate().map(|(i, v)| (v.name().clone(), i)).collect();
    let mut state = vec![0usize; vars.len()];
    let mut total = 0.0;
    loop {
        for (j, rule) in rules.iter().enumerate() {
            let a = rule.action(|v| state[index[v.name()]]);
            state[chance.len() + j] = a;
        }
        let (w, u) = weight_and_utility(diagram, &index, &state);
        total += w * u;
        if !next_state(&mut state[..chance.len()], &chance) {
            break;
        }
    }
    Ok(total)
}

/// Scores every policy over full parent scopes; the first best in
/// lexicographic policy order wins.
pub fn enumerate_policies(diagram: &InfluenceDiagram, caps: &OracleCaps) -> Result<EvaluationResult> {
    valid(diagram)?;
    let order = diagram.decision_order();
    let mut slots: Vec<(Variable, Vec<Variable>)> = Vec::with_capacity(order.len());
    let mut count: u128 = 1;
    for d in &order {
        let node = diagram.node(d)?;
        let mut scope: Vec<Variable> = node
            .parents()
            .iter()
            .map(|p| diagram.node(p).map(|x| x.variable().expect("framed").clone()))
            .collect::<Result<_>>()?;
        scope.sort();
        let var = node.variable().expect("framed").clone();
        let rows = joint_size(&scope);
        count = count.saturating_mul((var.cardinality() as u128).saturating_pow(rows.min(u32::MAX as u128) as u32));
        if count > caps.policies {
            return Err(Error::CapExceeded { what: "policy count", size: count, cap: caps.policies });
        }
        slots.push((var, scope));
    }
    let mut choices: Vec<Vec<usize>> = slots.iter().map(|(_, s)| vec![0; joint_size(s) as usize]).collect();
    let build = |choices: &[Vec<usize>]| -> Result<Vec<DecisionRule>> {
        slots
            .iter()
            .zip(choices)
            .map(|((var, scope), c)| {
                Ok(DecisionRule { decision: var.clone(), table: ArgTable::new(scope.clone(), var.clone(), c.clone())? })
            })
            .collect()
    };
    let mut best: Option<(f64, Vec<DecisionRule>)> = None;
    loop {
        let policy = build(&choices)?;
        let value = policy_value(diagram, &policy, caps)?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, policy));
        }
        // Odometer over all table entries, last decision's last entry fastest.
        let mut advanced = false;
        'outer: for (j, table) in choices.iter_mut().enumerate().rev() {
            for entry in table.iter_mut().rev() {
                *entry += 1;
                if *entry < slots[j].0.cardinality() {
                    advanced = true;
                    break 'outer;
                }
                *entry = 0;
            }
        }
        if !advanced {
            break;
        }
    }
    let (value, policy) = best.expect("at least one policy");
    Ok(oracle_result(policy, value))
}
