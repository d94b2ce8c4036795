//! Dense factor algebra over discrete variables.
//!
//! A [`Factor`] is a real table over an ordered scope of [`Variable`]s. The
//! scope is kept sorted by variable name and the table is row-major in that
//! order (the last variable varies fastest), so two factors over the same
//! variables always share a layout. Probability tables and utility tables
//! share the representation; only the caller knows which is which.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::model::Name;

/// A named discrete variable with a finite frame `0..cardinality`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    name: Name,
    cardinality: usize,
    labels: Option<Arc<[String]>>,
}

impl Variable {
    pub fn new(name: impl Into<Name>, cardinality: usize) -> Result<Self> {
        let name = name.into();
        if cardinality == 0 {
            return Err(Error::ZeroCardinality { name });
        }
        Ok(Variable { name, cardinality, labels: None })
    }

    /// Variable whose frame is named by `labels`; cardinality is the label count.
    pub fn with_labels(name: impl Into<Name>, labels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if labels.is_empty() {
            return Err(Error::ZeroCardinality { name });
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::InvalidLabels { name, reason: alloc::format!("label `{label}` is repeated") });
            }
        }
        Ok(Variable { name, cardinality: labels.len(), labels: Some(labels.into()) })
    }

    pub fn binary(name: impl Into<Name>) -> Self {
        Variable { name: name.into(), cardinality: 2, labels: None }
    }

    pub fn name(&self) -> &Name {
        &self.name
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name
            .cmp(&other.name)
            .then(self.cardinality.cmp(&other.cardinality))
            .then_with(|| self.labels.cmp(&other.labels))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A real-valued table over a name-sorted scope.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    scope: Vec<Variable>,
    values: Vec<f64>,
}

/// Smallest maximizing index of a maximized-out variable, per configuration
/// of the remaining scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgTable {
    scope: Vec<Variable>,
    variable: Variable,
    choices: Vec<usize>,
}

fn strides(scope: &[Variable]) -> Vec<usize> {
    let mut out = vec![0; scope.len()];
    let mut acc = 1;
    for (slot, var) in out.iter_mut().zip(scope).rev() {
        *slot = acc;
        acc *= var.cardinality;
    }
    out
}

fn table_len(scope: &[Variable]) -> usize {
    scope.iter().map(|v| v.cardinality).product()
}

/// Stride of each `target` variable inside a table laid out over `sub`
/// (zero where the variable is absent from `sub`).
fn strides_within(sub: &[Variable], target: &[Variable]) -> Vec<usize> {
    let own = strides(sub);
    target.iter().map(|t| sub.iter().position(|s| s.name == t.name).map_or(0, |i| own[i])).collect()
}

/// Visits every configuration of `cards` in row-major order, passing the
/// running offsets of `K` tables with the given per-variable strides.
fn walk<const K: usize>(cards: &[usize], strides: [&[usize]; K], mut visit: impl FnMut([usize; K])) {
    if cards.contains(&0) {
        return;
    }
    let n = cards.len();
    let mut digits = vec![0usize; n];
    let mut offsets = [0usize; K];
    loop {
        visit(offsets);
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            digits[j] += 1;
            for k in 0..K {
                offsets[k] += strides[k][j];
            }
            if digits[j] < cards[j] {
                break;
            }
            for k in 0..K {
                offsets[k] -= strides[k][j] * cards[j];
            }
            digits[j] = 0;
        }
    }
}

fn cards(scope: &[Variable]) -> Vec<usize> {
    scope.iter().map(|v| v.cardinality).collect()
}

/// Name-sorted union of two sorted scopes.
fn merge_scopes(a: &[Variable], b: &[Variable]) -> Result<Vec<Variable>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].name.cmp(&b[j].name) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                if a[i].cardinality != b[j].cardinality {
                    return Err(Error::CardinalityMismatch {
                        name: a[i].name.clone(),
                        left: a[i].cardinality,
                        right: b[j].cardinality,
                    });
                }
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Ok(out)
}

impl Factor {
    /// Builds a factor from a table laid out row-major in the order of `scope`.
    /// The scope is re-sorted by name and the table permuted to match.
    pub fn new(scope: Vec<Variable>, values: Vec<f64>) -> Result<Self> {
        for (i, var) in scope.iter().enumerate() {
            if scope[..i].iter().any(|o| o.name == var.name) {
                return Err(Error::DuplicateVariable(var.name.clone()));
            }
        }
        let expected = table_len(&scope);
        if values.len() != expected {
            return Err(Error::TableLength { expected, actual: values.len() });
        }
        if scope.windows(2).all(|w| w[0].name < w[1].name) {
            return Ok(Factor { scope, values });
        }
        let mut sorted = scope.clone();
        sorted.sort();
        let src = strides_within(&scope, &sorted);
        let mut out = Vec::with_capacity(expected);
        walk(&cards(&sorted), [&src], |[o]| out.push(values[o]));
        Ok(Factor { scope: sorted, values: out })
    }

    pub fn scalar(value: f64) -> Self {
        Factor { scope: Vec::new(), values: vec![value] }
    }

    pub fn constant(scope: Vec<Variable>, value: f64) -> Result<Self> {
        let n = table_len(&scope);
        Factor::new(scope, vec![value; n])
    }

    /// Uniform distribution `1/|Ω|` over a single variable.
    pub fn uniform(variable: Variable) -> Self {
        let n = variable.cardinality;
        Factor { scope: vec![variable], values: vec![1.0 / n as f64; n] }
    }

    pub fn scope(&self) -> &[Variable] {
        &self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.scope.is_empty()
    }

    /// Number of variables in the scope.
    pub fn width(&self) -> usize {
        self.scope.len()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.position(name).map(|i| &self.scope[i])
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.scope.binary_search_by(|v| (*v.name).cmp(name)).ok()
    }

    /// Value of a scalar factor.
    pub fn scalar_value(&self) -> Option<f64> {
        if self.is_scalar() {
            Some(self.values[0])
        } else {
            None
        }
    }

    /// Entry at a configuration given in scope order.
    pub fn get(&self, config: &[usize]) -> f64 {
        self.values[self.offset(config)]
    }

    fn offset(&self, config: &[usize]) -> usize {
        debug_assert_eq!(config.len(), self.scope.len());
        config.iter().zip(&self.scope).fold(0, |acc, (&x, v)| acc * v.cardinality + x)
    }

    /// Entry at the configuration chosen by `value_of` for each scope variable.
    pub fn value_for(&self, mut value_of: impl FnMut(&Variable) -> usize) -> f64 {
        let idx = self.scope.iter().fold(0, |acc, v| acc * v.cardinality + value_of(v));
        self.values[idx]
    }

    /// Table laid out row-major in the order of `order`, which must name
    /// exactly the scope variables.
    pub fn values_in_order(&self, order: &[Name]) -> Result<Vec<f64>> {
        if order.len() != self.scope.len() {
            return Err(Error::ScopeMismatch(alloc::format!(
                "ordering names {} variables, factor has {}",
                order.len(),
                self.scope.len()
            )));
        }
        let target = order
            .iter()
            .map(|n| self.variable(n).cloned().ok_or_else(|| Error::NotInScope(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        let src = strides_within(&self.scope, &target);
        let mut out = Vec::with_capacity(self.len());
        walk(&cards(&target), [&src], |[o]| out.push(self.values[o]));
        Ok(out)
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let scope = merge_scopes(&self.scope, &other.scope)?;
        let sf = strides_within(&self.scope, &scope);
        let sg = strides_within(&other.scope, &scope);
        let mut values = Vec::with_capacity(table_len(&scope));
        walk(&cards(&scope), [&sf, &sg], |[a, b]| values.push(self.values[a] * other.values[b]));
        Ok(Factor { scope, values })
    }

    /// Pointwise sum over the union of both scopes.
    pub fn add(&self, other: &Factor) -> Result<Factor> {
        let scope = merge_scopes(&self.scope, &other.scope)?;
        let sf = strides_within(&self.scope, &scope);
        let sg = strides_within(&other.scope, &scope);
        let mut values = Vec::with_capacity(table_len(&scope));
        walk(&cards(&scope), [&sf, &sg], |[a, b]| values.push(self.values[a] + other.values[b]));
        Ok(Factor { scope, values })
    }

    /// Applies `op` entrywise over the union of both scopes.
    pub fn combine(&self, other: &Factor, mut op: impl FnMut(f64, f64) -> f64) -> Result<Factor> {
        let scope = merge_scopes(&self.scope, &other.scope)?;
        let sf = strides_within(&self.scope, &scope);
        let sg = strides_within(&other.scope, &scope);
        let mut values = Vec::with_capacity(table_len(&scope));
        walk(&cards(&scope), [&sf, &sg], |[a, b]| values.push(op(self.values[a], other.values[b])));
        Ok(Factor { scope, values })
    }

    /// Sums `name` out of the scope.
    pub fn sum_out(&self, name: &str) -> Result<Factor> {
        let pos = self.position(name).ok_or_else(|| Error::NotInScope(name.into()))?;
        let mut scope = self.scope.clone();
        scope.remove(pos);
        let mut values = vec![0.0; table_len(&scope)];
        let own = strides(&self.scope);
        let out = strides_within(&scope, &self.scope);
        walk(&cards(&self.scope), [&own, &out], |[i, o]| values[o] += self.values[i]);
        Ok(Factor { scope, values })
    }

    /// Maximizes `name` out of the scope; ties resolve to the smallest index.
    pub fn max_out(&self, name: &str) -> Result<(Factor, ArgTable)> {
        let pos = self.position(name).ok_or_else(|| Error::NotInScope(name.into()))?;
        let mut scope = self.scope.clone();
        let variable = scope.remove(pos);
        let step = strides(&self.scope)[pos];
        let src = strides_within(&self.scope, &scope);
        let n = table_len(&scope);
        let mut values = Vec::with_capacity(n);
        let mut choices = Vec::with_capacity(n);
        walk(&cards(&scope), [&src], |[base]| {
            let mut best = 0;
            let mut best_value = self.values[base];
            for k in 1..variable.cardinality {
                let v = self.values[base + k * step];
                if v > best_value {
                    best = k;
                    best_value = v;
                }
            }
            values.push(best_value);
            choices.push(best);
        });
        Ok((Factor { scope: scope.clone(), values }, ArgTable { scope, variable, choices }))
    }

    /// Entrywise quotient `self / other` where `other`'s scope is contained in
    /// `self`'s. `0/0` is taken to be `0`; any other division by zero fails.
    pub fn divide(&self, other: &Factor) -> Result<Factor> {
        for var in &other.scope {
            match self.variable(&var.name) {
                None => {
                    return Err(Error::ScopeMismatch(alloc::format!(
                        "divisor variable `{}` is not in the dividend scope",
                        var.name
                    )))
                }
                Some(mine) if mine.cardinality != var.cardinality => {
                    return Err(Error::CardinalityMismatch {
                        name: var.name.clone(),
                        left: mine.cardinality,
                        right: var.cardinality,
                    })
                }
                Some(_) => {}
            }
        }
        let own = strides(&self.scope);
        let sg = strides_within(&other.scope, &self.scope);
        let mut values = Vec::with_capacity(self.len());
        let mut failure = None;
        walk(&cards(&self.scope), [&own, &sg], |[a, b]| {
            let (num, den) = (self.values[a], other.values[b]);
            let q = if den != 0.0 {
                num / den
            } else if num == 0.0 {
                0.0
            } else {
                failure.get_or_insert(num);
                0.0
            };
            values.push(q);
        });
        if let Some(numerator) = failure {
            return Err(Error::DivisionByZero { numerator });
        }
        Ok(Factor { scope: self.scope.clone(), values })
    }

    /// Slice of the table at `name = value`.
    pub fn restrict(&self, name: &str, value: usize) -> Result<Factor> {
        let pos = self.position(name).ok_or_else(|| Error::NotInScope(name.into()))?;
        let card = self.scope[pos].cardinality;
        if value >= card {
            return Err(Error::ValueOutOfRange { name: name.into(), value, cardinality: card });
        }
        let mut scope = self.scope.clone();
        scope.remove(pos);
        let base = value * strides(&self.scope)[pos];
        let src = strides_within(&self.scope, &scope);
        let mut values = Vec::with_capacity(table_len(&scope));
        walk(&cards(&scope), [&src], |[o]| values.push(self.values[base + o]));
        Ok(Factor { scope, values })
    }

    /// Broadcasts the table over a larger scope (no arithmetic is performed).
    pub fn expand(&self, scope: &[Variable]) -> Result<Factor> {
        let mut sorted = scope.to_vec();
        sorted.sort();
        let scope = merge_scopes(&self.scope, &sorted)?;
        let src = strides_within(&self.scope, &scope);
        let mut values = Vec::with_capacity(table_len(&scope));
        walk(&cards(&scope), [&src], |[o]| values.push(self.values[o]));
        Ok(Factor { scope, values })
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Rescales the table to sum to one; an all-zero table is returned as is.
    pub fn normalize(&self) -> Factor {
        let z = self.total();
        if z == 0.0 {
            return self.clone();
        }
        self.map(|x| x / z)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Factor {
        Factor { scope: self.scope.clone(), values: self.values.iter().map(|&x| f(x)).collect() }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// L∞ distance between two factors over the same variables.
    pub fn max_abs_diff(&self, other: &Factor) -> Result<f64> {
        let same =
            self.scope.len() == other.scope.len() && self.scope.iter().zip(&other.scope).all(|(a, b)| a.name == b.name);
        if !same {
            return Err(Error::ScopeMismatch(String::from("factors range over different variables")));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

impl ArgTable {
    /// Builds a table directly; `choices` is row-major over the name-sorted `scope`.
    pub fn new(scope: Vec<Variable>, variable: Variable, choices: Vec<usize>) -> Result<Self> {
        if !scope.windows(2).all(|w| w[0].name < w[1].name) {
            return Err(Error::ScopeMismatch(String::from("arg table scope must be name-sorted")));
        }
        let expected = table_len(&scope);
        if choices.len() != expected {
            return Err(Error::TableLength { expected, actual: choices.len() });
        }
        if let Some(&bad) = choices.iter().find(|&&c| c >= variable.cardinality) {
            return Err(Error::ValueOutOfRange {
                name: variable.name.clone(),
                value: bad,
                cardinality: variable.cardinality,
            });
        }
        Ok(ArgTable { scope, variable, choices })
    }

    pub fn scope(&self) -> &[Variable] {
        &self.scope
    }

    /// The maximized-out variable.
    pub fn variable(&self) -> &Variable {
        &self.variable
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn choice(&self, config: &[usize]) -> usize {
        let idx = config.iter().zip(&self.scope).fold(0, |acc, (&x, v)| acc * v.cardinality + x);
        self.choices[idx]
    }

    pub fn choice_for(&self, mut value_of: impl FnMut(&Variable) -> usize) -> usize {
        let idx = self.scope.iter().fold(0, |acc, v| acc * v.cardinality + value_of(v));
        self.choices[idx]
    }
}
