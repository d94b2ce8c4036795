//! Influence diagrams, Bayesian networks, and value networks.
//!
//! All three are represented by [`InfluenceDiagram`]: a Bayesian network is a
//! diagram whose nodes are all random, a value network one without decision
//! nodes. Structural constraints (acyclicity, regularity, no-forgetting, ...)
//! are not enforced at construction; [`InfluenceDiagram::validate`] reports
//! them as data so that callers can print every problem at once.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::factors::{Factor, Variable};
use crate::TOLERANCE;

pub type Name = Arc<str>;
pub type NameSet = BTreeSet<Name>;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// Conditional probability table over `{self} ∪ parents`.
    Random {
        cpt: Factor,
    },
    Decision,
    /// Utility table over the parents.
    Value {
        utility: Factor,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    name: Name,
    variable: Option<Variable>,
    parents: Vec<Name>,
    kind: NodeKind,
}

fn check_parent_list(node: &Name, parents: &[Name]) -> Result<()> {
    for (i, p) in parents.iter().enumerate() {
        if parents[..i].contains(p) {
            return Err(Error::MalformedNode { node: node.clone(), reason: format!("parent `{p}` listed twice") });
        }
        if p == node {
            return Err(Error::MalformedNode { node: node.clone(), reason: String::from("node is its own parent") });
        }
    }
    Ok(())
}

impl Node {
    /// Random node whose table is row-major over `parents` (in the given
    /// order) followed by the node itself.
    pub fn random(variable: Variable, parents: &[Variable], table: Vec<f64>) -> Result<Node> {
        let mut scope = parents.to_vec();
        scope.push(variable.clone());
        let cpt = Factor::new(scope, table)
            .map_err(|e| Error::MalformedNode { node: variable.name().clone(), reason: format!("{e}") })?;
        let parents = parents.iter().map(|p| p.name().clone()).collect();
        Node::random_with_cpt(variable, parents, cpt)
    }

    pub fn random_with_cpt(variable: Variable, parents: Vec<Name>, cpt: Factor) -> Result<Node> {
        let name = variable.name().clone();
        check_parent_list(&name, &parents)?;
        let scope_ok = cpt.width() == parents.len() + 1
            && cpt.variable(&name) == Some(&variable)
            && parents.iter().all(|p| cpt.contains(p));
        if !scope_ok {
            return Err(Error::MalformedNode {
                node: name,
                reason: String::from("CPT scope must be exactly the node and its parents"),
            });
        }
        Ok(Node { name, variable: Some(variable), parents, kind: NodeKind::Random { cpt } })
    }

    pub fn decision(variable: Variable, parents: Vec<Name>) -> Result<Node> {
        let name = variable.name().clone();
        check_parent_list(&name, &parents)?;
        Ok(Node { name, variable: Some(variable), parents, kind: NodeKind::Decision })
    }

    /// Value node whose utility table is row-major over `parents` in the given order.
    pub fn value(name: impl Into<Name>, parents: &[Variable], table: Vec<f64>) -> Result<Node> {
        let name = name.into();
        let utility = Factor::new(parents.to_vec(), table)
            .map_err(|e| Error::MalformedNode { node: name.clone(), reason: format!("{e}") })?;
        let parents = parents.iter().map(|p| p.name().clone()).collect();
        Node::value_with_utility(name, parents, utility)
    }

    pub fn value_with_utility(name: impl Into<Name>, parents: Vec<Name>, utility: Factor) -> Result<Node> {
        let name = name.into();
        check_parent_list(&name, &parents)?;
        if utility.width() != parents.len() || !parents.iter().all(|p| utility.contains(p)) {
            return Err(Error::MalformedNode {
                node: name,
                reason: String::from("utility scope must be exactly the parent set"),
            });
        }
        Ok(Node { name, variable: None, parents, kind: NodeKind::Value { utility } })
    }

    pub fn name(&self) -> &Name {
        &self.name
    }

    /// The node's frame; `None` for value nodes.
    pub fn variable(&self) -> Option<&Variable> {
        self.variable.as_ref()
    }

    pub fn parents(&self) -> &[Name] {
        &self.parents
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn is_random(&self) -> bool {
        matches!(self.kind, NodeKind::Random { .. })
    }

    pub fn is_decision(&self) -> bool {
        matches!(self.kind, NodeKind::Decision)
    }

    pub fn is_value(&self) -> bool {
        matches!(self.kind, NodeKind::Value { .. })
    }

    pub fn cpt(&self) -> Option<&Factor> {
        match &self.kind {
            NodeKind::Random { cpt } => Some(cpt),
            _ => None,
        }
    }

    pub fn utility(&self) -> Option<&Factor> {
        match &self.kind {
            NodeKind::Value { utility } => Some(utility),
            _ => None,
        }
    }
}

/// Undirected moral graph, indexed like the diagram it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoralGraph {
    names: Vec<Name>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl MoralGraph {
    pub fn nodes(&self) -> &[Name] {
        &self.names
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| (**n).cmp(name)).ok()
    }

    pub fn neighbors(&self, name: &str) -> impl Iterator<Item = &Name> + '_ {
        let adj = self.index(name).map(|i| &self.adjacency[i]);
        adj.into_iter().flatten().map(move |&j| &self.names[j])
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.adjacency[i].contains(&j),
            _ => false,
        }
    }

    /// Every edge once, as a name-ordered pair, in lexicographic order.
    pub fn edges(&self) -> Vec<(Name, Name)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &j in adj.range(i + 1..) {
                out.push((self.names[i].clone(), self.names[j].clone()));
            }
        }
        out
    }

    pub(crate) fn adjacency(&self) -> &[BTreeSet<usize>] {
        &self.adjacency
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Cycle {
        nodes: Vec<Name>,
    },
    ValueHasChild {
        value: Name,
        child: Name,
    },
    /// No directed path joins the two decisions.
    NotRegular {
        first: Name,
        second: Name,
    },
    /// `later` is missing `missing`, which it should inherit from `earlier`.
    Forgetting {
        earlier: Name,
        later: Name,
        missing: Name,
    },
    UnnormalizedCpt {
        node: Name,
        configuration: usize,
        sum: f64,
    },
    InvalidProbability {
        node: Name,
        entry: usize,
        value: f64,
    },
    NonFiniteUtility {
        node: Name,
        entry: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { nodes } => {
                write!(f, "directed cycle through ")?;
                for (i, n) in nodes.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(n)?;
                }
                Ok(())
            }
            Violation::ValueHasChild { value, child } => write!(f, "value node has child {value}->{child}"),
            Violation::NotRegular { first, second } => {
                write!(f, "not regular: no directed path joins decisions {first} and {second}")
            }
            Violation::Forgetting { earlier, later, missing } => {
                write!(f, "forgetting: decision {later} must have parent {missing} (inherited from {earlier})")
            }
            Violation::UnnormalizedCpt { node, configuration, sum } => {
                write!(f, "CPT of {node} is not normalized at parent configuration {configuration} (sum {sum})")
            }
            Violation::InvalidProbability { node, entry, value } => {
                write!(f, "CPT of {node} has invalid entry {entry} ({value})")
            }
            Violation::NonFiniteUtility { node, entry } => {
                write!(f, "utility table of {node} has a non-finite entry {entry}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A directed graph of random, decision, and value nodes.
///
/// Nodes are stored in name order; every derived set is reported in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceDiagram {
    nodes: Vec<Node>,
    parent_idx: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl InfluenceDiagram {
    /// Assembles a diagram. Fails on duplicate names, unknown parents, or
    /// tables whose parent frames disagree with the parent nodes.
    pub fn new(mut nodes: Vec<Node>) -> Result<Self> {
        nodes.sort_by(|a, b| a.name.cmp(&b.name));
        for w in nodes.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::DuplicateNode(w[0].name.clone()));
            }
        }
        let find = |name: &str| nodes.binary_search_by(|n| (*n.name).cmp(name)).ok();
        let mut parent_idx = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let mut idx = Vec::with_capacity(node.parents.len());
            for p in &node.parents {
                let i = find(p).ok_or_else(|| Error::UnknownNode(p.clone()))?;
                let table = node.cpt().or_else(|| node.utility());
                if let Some(table) = table {
                    let Some(frame) = nodes[i].variable() else {
                        return Err(Error::MalformedNode {
                            node: node.name.clone(),
                            reason: format!("parent `{p}` has no frame"),
                        });
                    };
                    if table.variable(p) != Some(frame) {
                        return Err(Error::MalformedNode {
                            node: node.name.clone(),
                            reason: format!("table disagrees with the frame of parent `{p}`"),
                        });
                    }
                }
                idx.push(i);
            }
            parent_idx.push(idx);
        }
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, ps) in parent_idx.iter().enumerate() {
            for &p in ps {
                children[p].push(i);
            }
        }
        Ok(InfluenceDiagram { nodes, parent_idx, children })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Node> {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn index(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| (*n.name).cmp(name)).ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index(name).is_some()
    }

    pub fn node(&self, name: &str) -> Result<&Node> {
        self.index(name).map(|i| &self.nodes[i]).ok_or_else(|| Error::UnknownNode(name.into()))
    }

    pub fn names(&self) -> NameSet {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    pub fn children_of(&self, name: &str) -> Result<Vec<Name>> {
        let i = self.index(name).ok_or_else(|| Error::UnknownNode(name.into()))?;
        Ok(self.children[i].iter().map(|&c| self.nodes[c].name.clone()).collect())
    }

    pub fn decisions(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.is_decision())
    }

    pub fn value_nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.is_value())
    }

    pub fn random_nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.is_random())
    }

    pub fn is_bayes_net(&self) -> bool {
        self.nodes.iter().all(Node::is_random)
    }

    pub fn is_value_network(&self) -> bool {
        !self.nodes.iter().any(Node::is_decision)
    }

    /// Topological order with lexicographic tie-breaking, or `None` when cyclic.
    pub fn topological_order(&self) -> Option<Vec<Name>> {
        self.topological_indices().map(|o| o.into_iter().map(|i| self.nodes[i].name.clone()).collect())
    }

    fn topological_indices(&self) -> Option<Vec<usize>> {
        let mut indegree: Vec<usize> = self.parent_idx.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &c in &self.children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Decisions in the order a regular diagram's directed path visits them.
    pub fn decision_order(&self) -> Vec<Name> {
        let order = self.topological_indices().unwrap_or_else(|| (0..self.nodes.len()).collect());
        order.into_iter().filter(|&i| self.nodes[i].is_decision()).map(|i| self.nodes[i].name.clone()).collect()
    }

    fn reach_mask(&self, starts: impl IntoIterator<Item = usize>, up: bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = starts.into_iter().collect();
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            let next = if up { &self.parent_idx[i] } else { &self.children[i] };
            stack.extend(next.iter().copied().filter(|&j| !seen[j]));
        }
        seen
    }

    fn indices_of<'a>(&self, names: impl IntoIterator<Item = &'a Name>) -> Result<Vec<usize>> {
        names.into_iter().map(|n| self.index(n).ok_or_else(|| Error::UnknownNode(n.clone()))).collect()
    }

    fn mask_to_set(&self, mask: &[bool]) -> NameSet {
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| self.nodes[i].name.clone()).collect()
    }

    /// `A` together with all ancestors of its members.
    pub fn ancestral_set(&self, set: &NameSet) -> Result<NameSet> {
        let starts = self.indices_of(set)?;
        Ok(self.mask_to_set(&self.reach_mask(starts, true)))
    }

    /// Proper descendants of `name`.
    pub fn descendants(&self, name: &str) -> Result<NameSet> {
        let i = self.index(name).ok_or_else(|| Error::UnknownNode(name.into()))?;
        let mut mask = self.reach_mask(self.children[i].iter().copied(), false);
        mask[i] = false;
        Ok(self.mask_to_set(&mask))
    }

    pub fn is_ancestor(&self, ancestor: &str, of: &str) -> Result<bool> {
        Ok(self.descendants(ancestor)?.contains(of))
    }

    pub fn moral_graph(&self) -> MoralGraph {
        let n = self.nodes.len();
        let mut adjacency = vec![BTreeSet::new(); n];
        for (c, ps) in self.parent_idx.iter().enumerate() {
            for (k, &p) in ps.iter().enumerate() {
                adjacency[c].insert(p);
                adjacency[p].insert(c);
                for &q in &ps[k + 1..] {
                    adjacency[p].insert(q);
                    adjacency[q].insert(p);
                }
            }
        }
        MoralGraph { names: self.nodes.iter().map(|n| n.name.clone()).collect(), adjacency }
    }

    /// Nodes reachable from `start` in the moral graph without entering `blocked`.
    pub(crate) fn moral_component(&self, moral: &MoralGraph, start: &str, blocked: &NameSet) -> Result<NameSet> {
        let s = self.index(start).ok_or_else(|| Error::UnknownNode(start.into()))?;
        let blocked_mask = {
            let mut m = vec![false; self.nodes.len()];
            for i in self.indices_of(blocked)? {
                m[i] = true;
            }
            m
        };
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &moral.adjacency()[i] {
                if !seen[j] && !blocked_mask[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        Ok(self.mask_to_set(&seen))
    }

    /// Whether every moral-graph path between `x` and `y` meets `separator`.
    pub fn m_separated(&self, separator: &NameSet, x: &str, y: &str) -> Result<bool> {
        if !self.contains(y) {
            return Err(Error::UnknownNode(y.into()));
        }
        let reach = self.moral_component(&self.moral_graph(), x, separator)?;
        Ok(!reach.contains(y))
    }

    /// Checks every structural and numeric constraint of an influence diagram.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let order = self.topological_indices();
        if order.is_none() {
            let cyclic: Vec<Name> = (0..self.nodes.len())
                .filter(|&i| {
                    let mask = self.reach_mask(self.children[i].iter().copied(), false);
                    mask[i]
                })
                .map(|i| self.nodes[i].name.clone())
                .collect();
            violations.push(Violation::Cycle { nodes: cyclic });
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.is_value() {
                for &c in &self.children[i] {
                    violations
                        .push(Violation::ValueHasChild { value: node.name.clone(), child: self.nodes[c].name.clone() });
                }
            }
        }
        if order.is_some() {
            let decisions = self.decision_order();
            let reach: Vec<NameSet> = decisions.iter().map(|d| self.descendants(d).unwrap_or_default()).collect();
            for (i, a) in decisions.iter().enumerate() {
                for (j, b) in decisions.iter().enumerate().skip(i + 1) {
                    let (first, second) = if a < b { (a, b) } else { (b, a) };
                    if reach[i].contains(b) {
                        self.check_no_forgetting(a, b, &mut violations);
                    } else if reach[j].contains(a) {
                        self.check_no_forgetting(b, a, &mut violations);
                    } else {
                        violations.push(Violation::NotRegular { first: first.clone(), second: second.clone() });
                    }
                }
            }
        }
        for node in &self.nodes {
            match &node.kind {
                NodeKind::Random { cpt } => check_cpt(node, cpt, &mut violations),
                NodeKind::Value { utility } => {
                    if let Some(entry) = utility.values().iter().position(|v| !v.is_finite()) {
                        violations.push(Violation::NonFiniteUtility { node: node.name.clone(), entry });
                    }
                }
                NodeKind::Decision => {}
            }
        }
        ValidationReport { violations }
    }

    fn check_no_forgetting(&self, earlier: &Name, later: &Name, out: &mut Vec<Violation>) {
        let (Ok(e), Ok(l)) = (self.node(earlier), self.node(later)) else {
            return;
        };
        let inherited = core::iter::once(earlier).chain(e.parents.iter());
        for p in inherited {
            if !l.parents.contains(p) {
                out.push(Violation::Forgetting { earlier: earlier.clone(), later: later.clone(), missing: p.clone() });
            }
        }
    }

    /// The decision node with no other decision among its descendants.
    pub fn tail_decision_node(&self) -> Result<Name> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidDiagram(format!("{report}")));
        }
        self.tail_decision_unchecked()
    }

    pub(crate) fn tail_decision_unchecked(&self) -> Result<Name> {
        self.decision_order().pop().ok_or(Error::NoDecision)
    }

    /// Keeps only `keep`, which must contain the parents of each of its members.
    pub fn restrict_to(&self, keep: &NameSet) -> Result<Self> {
        let mut nodes = Vec::with_capacity(keep.len());
        for name in keep {
            let node = self.node(name)?;
            if let Some(p) = node.parents.iter().find(|p| !keep.contains(*p)) {
                return Err(Error::MalformedNode {
                    node: name.clone(),
                    reason: format!("parent `{p}` would be pruned"),
                });
            }
            nodes.push(node.clone());
        }
        InfluenceDiagram::new(nodes)
    }

    /// Repeatedly removes random nodes without children.
    pub fn prune_barren(&self) -> Self {
        self.prune_barren_except(&NameSet::new())
    }

    /// Like [`prune_barren`](Self::prune_barren), but never removes members of `keep`.
    pub fn prune_barren_except(&self, keep: &NameSet) -> Self {
        let n = self.nodes.len();
        let mut alive = vec![true; n];
        let mut live_children: Vec<usize> = self.children.iter().map(Vec::len).collect();
        let removable: Vec<bool> = self.nodes.iter().map(|x| x.is_random() && !keep.contains(&x.name)).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&i| live_children[i] == 0 && removable[i]).collect();
        while let Some(i) = stack.pop() {
            if !alive[i] {
                continue;
            }
            alive[i] = false;
            for &p in &self.parent_idx[i] {
                live_children[p] -= 1;
                if live_children[p] == 0 && removable[p] {
                    stack.push(p);
                }
            }
        }
        let keep = self.mask_to_set(&alive);
        self.restrict_to(&keep).expect("barren pruning keeps parents of survivors")
    }
}

fn check_cpt(node: &Node, cpt: &Factor, out: &mut Vec<Violation>) {
    if let Some(entry) = cpt.values().iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        out.push(Violation::InvalidProbability { node: node.name.clone(), entry, value: cpt.values()[entry] });
        return;
    }
    let Ok(sums) = cpt.sum_out(&node.name) else {
        return;
    };
    if let Some((configuration, &sum)) = sums.values().iter().enumerate().find(|(_, s)| (**s - 1.0).abs() > TOLERANCE) {
        out.push(Violation::UnnormalizedCpt { node: node.name.clone(), configuration, sum });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn bin(name: &str) -> Variable {
        Variable::binary(name)
    }

    fn set(names: &[&str]) -> NameSet {
        names.iter().map(|&n| Name::from(n)).collect()
    }

    /// x -> c <- y
    fn v_structure() -> InfluenceDiagram {
        InfluenceDiagram::new(vec![
            Node::random(bin("x"), &[], vec![0.5, 0.5]).unwrap(),
            Node::random(bin("y"), &[], vec![0.3, 0.7]).unwrap(),
            Node::random(bin("c"), &[bin("x"), bin("y")], vec![0.9, 0.1, 0.5, 0.5, 0.4, 0.6, 0.2, 0.8]).unwrap(),
        ])
        .unwrap()
    }

    /// x -> s -> y
    fn chain() -> InfluenceDiagram {
        InfluenceDiagram::new(vec![
            Node::random(bin("x"), &[], vec![0.5, 0.5]).unwrap(),
            Node::random(bin("s"), &[bin("x")], vec![0.9, 0.1, 0.2, 0.8]).unwrap(),
            Node::random(bin("y"), &[bin("s")], vec![0.6, 0.4, 0.3, 0.7]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn single_prior_is_valid() {
        let id = InfluenceDiagram::new(vec![Node::random(bin("a"), &[], vec![0.4, 0.6]).unwrap()]).unwrap();
        assert!(id.validate().is_valid());
    }

    #[test]
    fn value_with_child_is_reported() {
        let id = InfluenceDiagram::new(vec![
            Node::random(bin("a"), &[], vec![0.4, 0.6]).unwrap(),
            Node::value("v", &[bin("a")], vec![1.0, 2.0]).unwrap(),
            Node::decision(bin("c"), vec!["v".into()]).unwrap(),
        ])
        .unwrap();
        let report = id.validate();
        assert_eq!(report.violations, vec![Violation::ValueHasChild { value: "v".into(), child: "c".into() }]);
        assert_eq!(format!("{}", report.violations[0]), "value node has child v->c");
    }

    #[test]
    fn unordered_decisions_are_irregular() {
        let id = InfluenceDiagram::new(vec![
            Node::decision(bin("d1"), vec![]).unwrap(),
            Node::decision(bin("d2"), vec![]).unwrap(),
        ])
        .unwrap();
        let report = id.validate();
        assert!(matches!(report.violations.as_slice(), [Violation::NotRegular { .. }]));
        assert!(matches!(id.tail_decision_node(), Err(Error::InvalidDiagram(_))));
    }

    #[test]
    fn forgetting_and_normalization_are_reported() {
        let id = InfluenceDiagram::new(vec![
            Node::random(bin("o"), &[], vec![0.5, 0.4]).unwrap(),
            Node::decision(bin("d1"), vec!["o".into()]).unwrap(),
            Node::random(bin("m"), &[bin("d1")], vec![0.5, 0.5, 0.5, 0.5]).unwrap(),
            Node::decision(bin("d2"), vec!["m".into()]).unwrap(),
        ])
        .unwrap();
        let report = id.validate();
        let forgetting = report.violations.iter().filter(|v| matches!(v, Violation::Forgetting { .. })).count();
        assert_eq!(forgetting, 2);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::UnnormalizedCpt { .. })));
    }

    #[test]
    fn cycles_are_reported() {
        let id = InfluenceDiagram::new(vec![
            Node::decision(bin("a"), vec!["b".into()]).unwrap(),
            Node::decision(bin("b"), vec!["a".into()]).unwrap(),
        ])
        .unwrap();
        let report = id.validate();
        assert_eq!(report.violations, vec![Violation::Cycle { nodes: vec!["a".into(), "b".into()] }]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            InfluenceDiagram::new(vec![Node::decision(bin("a"), vec!["zz".into()]).unwrap()]),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            InfluenceDiagram::new(vec![
                Node::decision(bin("a"), vec![]).unwrap(),
                Node::decision(bin("a"), vec![]).unwrap()
            ]),
            Err(Error::DuplicateNode(_))
        ));
        // Table built against a ternary `a` while the node is binary.
        let wrong = Variable::new("a", 3).unwrap();
        assert!(InfluenceDiagram::new(vec![
            Node::random(bin("a"), &[], vec![0.5, 0.5]).unwrap(),
            Node::random(bin("b"), &[wrong], vec![0.5; 6]).unwrap(),
        ])
        .is_err());
    }

    #[test]
    fn moral_graph_marries_parents() {
        let m = v_structure().moral_graph();
        assert_eq!(m.edges(), vec![("c".into(), "x".into()), ("c".into(), "y".into()), ("x".into(), "y".into())]);
        let m = chain().moral_graph();
        assert_eq!(m.edges(), vec![("s".into(), "x".into()), ("s".into(), "y".into())]);
    }

    #[test]
    fn m_separation_examples() {
        assert!(chain().m_separated(&set(&["s"]), "x", "y").unwrap());
        assert!(!chain().m_separated(&set(&[]), "x", "y").unwrap());
        assert!(!v_structure().m_separated(&set(&[]), "x", "y").unwrap());
    }

    #[test]
    fn ancestral_sets() {
        let id = chain();
        assert_eq!(id.ancestral_set(&set(&["x"])).unwrap(), set(&["x"]));
        assert_eq!(id.ancestral_set(&set(&["y"])).unwrap(), set(&["x", "s", "y"]));
    }

    #[test]
    fn tail_decision_examples() {
        let single = InfluenceDiagram::new(vec![Node::decision(bin("d"), vec![]).unwrap()]).unwrap();
        assert_eq!(&*single.tail_decision_node().unwrap(), "d");
        let two = InfluenceDiagram::new(vec![
            Node::decision(bin("d1"), vec![]).unwrap(),
            Node::decision(bin("d2"), vec!["d1".into()]).unwrap(),
        ])
        .unwrap();
        assert_eq!(&*two.tail_decision_node().unwrap(), "d2");
        let none = chain();
        assert_eq!(none.tail_decision_node(), Err(Error::NoDecision));
    }

    #[test]
    fn prune_barren_chain() {
        let id = InfluenceDiagram::new(vec![
            Node::random(bin("x"), &[], vec![0.3, 0.7]).unwrap(),
            Node::random(bin("y"), &[bin("x")], vec![0.9, 0.1, 0.2, 0.8]).unwrap(),
        ])
        .unwrap();
        // All random nodes are barren eventually.
        assert!(id.prune_barren().is_empty());
        let kept = id.prune_barren_except(&set(&["x"]));
        assert_eq!(kept.names(), set(&["x"]));
        assert_eq!(kept.node("x").unwrap(), id.node("x").unwrap());
        let with_value = InfluenceDiagram::new(vec![
            Node::random(bin("x"), &[], vec![0.3, 0.7]).unwrap(),
            Node::random(bin("y"), &[bin("x")], vec![0.9, 0.1, 0.2, 0.8]).unwrap(),
            Node::value("v", &[bin("x")], vec![0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let pruned = with_value.prune_barren();
        assert_eq!(pruned.names(), set(&["v", "x"]));
        assert_eq!(pruned.node("x").unwrap(), with_value.node("x").unwrap());
        assert_eq!(pruned.prune_barren(), pruned);
    }

    /// Random DAG over n nodes, edges only from lower to higher index.
    fn arb_dag(n: usize) -> impl Strategy<Value = InfluenceDiagram> {
        prop::collection::vec(prop::bool::weighted(0.3), n * n).prop_map(move |bits| {
            let names: Vec<Variable> = (0..n).map(|i| bin(&format!("n{i}"))).collect();
            let nodes = (0..n)
                .map(|j| {
                    let parents: Vec<Name> =
                        (0..j).filter(|&i| bits[i * n + j]).map(|i| names[i].name().clone()).collect();
                    Node::decision(names[j].clone(), parents).unwrap()
                })
                .collect();
            InfluenceDiagram::new(nodes).unwrap()
        })
    }

    fn oracle_moral_edges(id: &InfluenceDiagram) -> BTreeSet<(Name, Name)> {
        let mut edges = BTreeSet::new();
        let ordered = |a: &Name, b: &Name| {
            if a < b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        };
        for x in id.nodes() {
            for y in id.nodes() {
                if x.name() == y.name() {
                    continue;
                }
                let directed = y.parents().contains(x.name()) || x.parents().contains(y.name());
                let co_parents =
                    id.nodes().iter().any(|c| c.parents().contains(x.name()) && c.parents().contains(y.name()));
                if directed || co_parents {
                    edges.insert(ordered(x.name(), y.name()));
                }
            }
        }
        edges
    }

    /// Whether some simple moral-graph path joins x and y avoiding `sep` (DFS over all paths).
    fn oracle_connected(
        edges: &BTreeSet<(Name, Name)>,
        sep: &NameSet,
        x: &Name,
        y: &Name,
        visited: &mut Vec<Name>,
    ) -> bool {
        if x == y {
            return true;
        }
        visited.push(x.clone());
        for (a, b) in edges {
            let next = if a == x {
                b
            } else if b == x {
                a
            } else {
                continue;
            };
            if visited.contains(next) || (sep.contains(next) && next != y) {
                continue;
            }
            if oracle_connected(edges, sep, next, y, visited) {
                visited.pop();
                return true;
            }
        }
        visited.pop();
        false
    }

    proptest! {
        #[test]
        fn moral_graph_matches_definition(id in arb_dag(10)) {
            let got: BTreeSet<(Name, Name)> = id.moral_graph().edges().into_iter().collect();
            prop_assert_eq!(got, oracle_moral_edges(&id));
        }

        #[test]
        fn m_separation_matches_path_enumeration(id in arb_dag(8), mask in 0u32..256, x in 0usize..8, y in 0usize..8) {
            prop_assume!(x != y);
            let name = |i: usize| Name::from(format!("n{i}"));
            let sep: NameSet = (0..8).filter(|&i| mask & (1 << i) != 0 && i != x && i != y).map(name).collect();
            let edges = oracle_moral_edges(&id);
            let expect = !oracle_connected(&edges, &sep, &name(x), &name(y), &mut Vec::new());
            prop_assert_eq!(id.m_separated(&sep, &name(x), &name(y)).unwrap(), expect);
            prop_assert_eq!(id.m_separated(&sep, &name(y), &name(x)).unwrap(), expect);
        }

        #[test]
        fn ancestral_set_matches_closure(id in arb_dag(9), mask in 0u32..512, mask2 in 0u32..512) {
            let n = 9;
            // Reflexive-transitive closure of the parent relation (Warshall).
            let mut reach = vec![vec![false; n]; n];
            for (j, row) in reach.iter_mut().enumerate() {
                row[j] = true;
                for p in id.nodes()[j].parents() {
                    row[id.index(p).unwrap()] = true;
                }
            }
            for k in 0..n { for i in 0..n { for j in 0..n {
                if reach[i][k] && reach[k][j] { reach[i][j] = true; }
            }}}
            let pick = |m: u32| -> NameSet { (0..n).filter(|i| m & (1 << i) != 0).map(|i| id.nodes()[i].name().clone()).collect() };
            let a = pick(mask);
            let expect: NameSet = (0..n)
                .filter(|&j| (0..n).any(|i| mask & (1 << i) != 0 && reach[id.index(&id.nodes()[i].name().clone()).unwrap()][j]))
                .map(|j| id.nodes()[j].name().clone())
                .collect();
            let an = id.ancestral_set(&a).unwrap();
            prop_assert_eq!(&an, &expect);
            // Idempotent and monotone.
            prop_assert_eq!(&id.ancestral_set(&an).unwrap(), &an);
            let b: NameSet = a.union(&pick(mask2)).cloned().collect();
            prop_assert!(an.is_subset(&id.ancestral_set(&b).unwrap()));
        }
    }
}
