//! The JSON network and result documents.
//!
//! Tables are flat and row-major with the last variable varying fastest. A
//! random node's table runs over its parents in listed order and then the
//! node itself; a value node's over its parents. `docs/file-format.md` has a
//! worked example.

use std::collections::BTreeMap;
use std::io;

use influence_core::evaluator::EvaluationResult;
use influence_core::{Error as CoreError, InfluenceDiagram, Name, Node, NodeKind, Variable};
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NetworkDocument {
    pub format: u32,
    pub variables: Vec<VariableSpec>,
    pub nodes: Vec<NodeSpec>,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub cardinality: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKindSpec {
    Random,
    Decision,
    Value,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub kind: NodeKindSpec,
    #[serde(default)]
    pub parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("variable `{name}`: {source}")]
    Variable { name: String, source: CoreError },
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("node `{node}`: {reason}")]
    Node { node: String, reason: String },
    #[error("{0}")]
    Diagram(CoreError),
}

fn node_error(node: &str, reason: impl ToString) -> LoadError {
    LoadError::Node { node: node.to_owned(), reason: reason.to_string() }
}

impl NetworkDocument {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_diagram(&self) -> Result<InfluenceDiagram, LoadError> {
        if self.format != FORMAT_VERSION {
            return Err(LoadError::Version(self.format));
        }
        let mut frames: BTreeMap<&str, Variable> = BTreeMap::new();
        for spec in &self.variables {
            let var = match &spec.labels {
                Some(labels) if labels.len() != spec.cardinality => {
                    return Err(LoadError::Variable {
                        name: spec.name.clone(),
                        source: CoreError::InvalidLabels {
                            name: spec.name.as_str().into(),
                            reason: format!("{} labels for cardinality {}", labels.len(), spec.cardinality),
                        },
                    });
                }
                Some(labels) => Variable::with_labels(spec.name.as_str(), labels.clone()),
                None => Variable::new(spec.name.as_str(), spec.cardinality),
            }
            .map_err(|source| LoadError::Variable { name: spec.name.clone(), source })?;
            if frames.insert(&spec.name, var).is_some() {
                return Err(LoadError::DuplicateVariable(spec.name.clone()));
            }
        }
        let frame = |node: &str, name: &str| {
            frames.get(name).cloned().ok_or_else(|| node_error(node, format!("`{name}` has no declared variable")))
        };
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for spec in &self.nodes {
            let name = spec.name.as_str();
            let parent_frames = || spec.parents.iter().map(|p| frame(name, p)).collect::<Result<Vec<_>, _>>();
            let table = || spec.table.clone().ok_or_else(|| node_error(name, "missing table"));
            let node = match spec.kind {
                NodeKindSpec::Random => Node::random(frame(name, name)?, &parent_frames()?, table()?),
                NodeKindSpec::Value => {
                    if frames.contains_key(name) {
                        return Err(node_error(name, "value nodes take no variable"));
                    }
                    Node::value(name, &parent_frames()?, table()?)
                }
                NodeKindSpec::Decision => {
                    if spec.table.is_some() {
                        return Err(node_error(name, "decision nodes take no table"));
                    }
                    Node::decision(frame(name, name)?, spec.parents.iter().map(|p| Name::from(p.as_str())).collect())
                }
            }
            .map_err(|e| match e {
                CoreError::MalformedNode { reason, .. } => node_error(name, reason),
                e => node_error(name, e),
            })?;
            nodes.push(node);
        }
        InfluenceDiagram::new(nodes).map_err(LoadError::Diagram)
    }

    pub fn from_diagram(diagram: &InfluenceDiagram) -> Self {
        let mut variables = Vec::new();
        let mut nodes = Vec::with_capacity(diagram.len());
        for node in diagram.nodes() {
            if let Some(var) = node.variable() {
                variables.push(VariableSpec {
                    name: var.name().to_string(),
                    cardinality: var.cardinality(),
                    labels: var.labels().map(<[String]>::to_vec),
                });
            }
            let parents: Vec<String> = node.parents().iter().map(|p| p.to_string()).collect();
            let (kind, table) = match node.kind() {
                NodeKind::Random { cpt } => {
                    let mut order = node.parents().to_vec();
                    order.push(node.name().clone());
                    (NodeKindSpec::Random, Some(cpt.values_in_order(&order).expect("cpt covers its family")))
                }
                NodeKind::Decision => (NodeKindSpec::Decision, None),
                NodeKind::Value { utility } => (
                    NodeKindSpec::Value,
                    Some(utility.values_in_order(node.parents()).expect("utility covers its parents")),
                ),
            };
            nodes.push(NodeSpec { name: node.name().to_string(), kind, parents, table });
        }
        NetworkDocument { format: FORMAT_VERSION, variables, nodes }
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ResultDocument {
    pub method: String,
    pub expected_value: f64,
    pub policy: Vec<RuleSpec>,
    pub stats: Vec<StageStats>,
}

/// A decision rule: the action for each configuration of `scope`, row-major
/// in the listed order.
#[derive(Clone, Debug, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RuleSpec {
    pub decision: String,
    pub scope: Vec<String>,
    pub table: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StageStats {
    /// The decision solved at this stage, or `null` for the final value network.
    pub decision: Option<String>,
    pub multiplications: u64,
    pub additions: u64,
    pub max_factor_size: usize,
}

impl ResultDocument {
    pub fn from_result(method: &str, result: &EvaluationResult) -> Self {
        let policy = result
            .policy
            .iter()
            .map(|rule| RuleSpec {
                decision: rule.decision.name().to_string(),
                scope: rule.scope().iter().map(|v| v.name().to_string()).collect(),
                table: rule.table.choices().to_vec(),
            })
            .collect();
        let stages = result.stages.iter().map(|s| (Some(s.decision.to_string()), s.stats));
        let stats = stages
            .chain(std::iter::once((None, result.final_stats)))
            .map(|(decision, s)| StageStats {
                decision,
                multiplications: s.multiplications,
                additions: s.additions,
                max_factor_size: s.max_factor_size,
            })
            .collect();
        ResultDocument { method: method.to_owned(), expected_value: result.expected_value, policy, stats }
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `x` with 17 significant digits, trailing zeros dropped, switching to
/// exponent form below `1e-4` and from `1e17` up.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return String::from(if x.is_sign_negative() { "-0" } else { "0" });
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON with reals written by [`format_real`].
struct Layout(PrettyFormatter<'static>);

impl Formatter for Layout {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_key(writer)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Joins arrays whose elements are all scalars onto their opening line.
fn collapse_scalar_arrays(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if line.ends_with('[') {
            let mut j = i + 1;
            while j < lines.len() && !lines[j].trim_start().starts_with(']') {
                let t = lines[j].trim_start();
                if t.starts_with('{') || t.starts_with('[') {
                    break;
                }
                j += 1;
            }
            if j < lines.len() && lines[j].trim_start().starts_with(']') {
                out.push_str(line);
                for (k, item) in lines[i + 1..j].iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    out.push_str(item.trim());
                }
                out.push_str(lines[j].trim_start());
                out.push('\n');
                i = j + 1;
                continue;
            }
        }
        out.push_str(line);
        out.push('\n');
        i += 1;
    }
    out
}

/// Serializes a document in the layout used for every file this crate writes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Layout(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("documents serialize");
    collapse_scalar_arrays(&String::from_utf8(out).expect("JSON is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(5.0), "5");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(0.1), "0.10000000000000001");
        assert_eq!(format_real(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_real(1e20), "1e+20");
        assert_eq!(format_real(123456.0), "123456");
        assert_eq!(format_real(0.0), "0");
    }

    #[test]
    fn number_arrays_stay_on_one_line() {
        let doc = ResultDocument {
            method: "reduction".into(),
            expected_value: 0.5,
            policy: vec![RuleSpec { decision: "d".into(), scope: vec!["c".into()], table: vec![1, 0] }],
            stats: vec![],
        };
        let text = to_json(&doc);
        assert!(text.contains("\"table\": [1, 0]"), "{text}");
        assert!(text.contains("\"scope\": [\"c\"]"), "{text}");
        assert!(text.contains("\"policy\": [\n"), "{text}");
        assert_eq!(ResultDocument::parse(&text).unwrap(), doc);
    }

    #[test]
    fn version_and_table_errors_name_their_source() {
        let text = r#"{"format": 2, "variables": [], "nodes": []}"#;
        let err = NetworkDocument::parse(text).unwrap().to_diagram().unwrap_err();
        assert!(matches!(err, LoadError::Version(2)));
        let text = r#"{"format": 1, "variables": [{"name": "a", "cardinality": 2}],
            "nodes": [{"name": "a", "kind": "random", "table": [0.5]}]}"#;
        let err = NetworkDocument::parse(text).unwrap().to_diagram().unwrap_err();
        assert!(err.to_string().starts_with("node `a`"), "{err}");
        let err = NetworkDocument::parse(r#"{"format": 1, "variables": []}"#).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    proptest! {
        #[test]
        fn reals_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back: f64 = format_real(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn result_documents_round_trip(
            value in -1e6f64..1e6,
            table in proptest::collection::vec(0usize..3, 1..9),
            mults in any::<u32>(),
        ) {
            let doc = ResultDocument {
                method: "fusion".into(),
                expected_value: value,
                policy: vec![RuleSpec { decision: "d".into(), scope: vec!["a".into(), "b".into()], table }],
                stats: vec![
                    StageStats { decision: Some("d".into()), multiplications: mults as u64, additions: 3, max_factor_size: 2 },
                    StageStats { decision: None, multiplications: 0, additions: 0, max_factor_size: 1 },
                ],
            };
            prop_assert_eq!(ResultDocument::parse(&to_json(&doc)).unwrap(), doc);
        }
    }
}
