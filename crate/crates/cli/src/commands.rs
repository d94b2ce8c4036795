//! The subcommands, returning what to print and the exit status instead of
//! touching the process so they can be tested in place.

use std::fs;
use std::path::Path;

use influence_core::baselines::{
    brute_force, compare as run_compare, eval_id1, shachter_peot, CompareOptions, OracleCaps,
};
use influence_core::decomposition::decompose as run_decompose;
use influence_core::evaluator::{EvaluationResult, Evaluator};
use influence_core::inference::{global_order, VariableElimination};
use influence_core::random::{random_influence_diagram, DiagramShape};
use influence_core::{Error, InfluenceDiagram};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::document::{to_json, LoadError, NetworkDocument, ResultDocument};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INAPPLICABLE: i32 = 3;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Output { code, stdout: String::new(), stderr }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Reduction,
    Fusion,
    ShachterPeot,
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Reduction => "reduction",
            Method::Fusion => "fusion",
            Method::ShachterPeot => "shachter-peot",
            Method::BruteForce => "brute-force",
        }
    }
}

pub fn load(path: &Path) -> Result<InfluenceDiagram, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    NetworkDocument::parse(&text)?.to_diagram()
}

fn load_or_exit(path: &Path) -> Result<InfluenceDiagram, Output> {
    load(path).map_err(|e| Output::fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn violations(diagram: &InfluenceDiagram) -> Option<String> {
    let report = diagram.validate();
    (!report.is_valid()).then(|| report.violations.iter().map(|v| format!("{v}\n")).collect())
}

/// Loads and validates; violations become exit status 1.
fn load_valid(path: &Path) -> Result<InfluenceDiagram, Output> {
    let diagram = load_or_exit(path)?;
    match violations(&diagram) {
        None => Ok(diagram),
        Some(lines) => Err(Output::fail(EXIT_INVALID, lines)),
    }
}

fn core_failure(e: Error) -> Output {
    match e {
        Error::RequiresSingleValueNode { .. } | Error::CapExceeded { .. } => {
            Output::fail(EXIT_INAPPLICABLE, e.to_string())
        }
        _ => Output::fail(EXIT_INVALID, e.to_string()),
    }
}

/// Violations, one per line, on standard output.
pub fn validate(path: &Path) -> Output {
    match load_or_exit(path) {
        Ok(diagram) => match violations(&diagram) {
            None => Output::ok(String::new()),
            Some(lines) => Output { code: EXIT_INVALID, stdout: lines, stderr: String::new() },
        },
        Err(out) => out,
    }
}

pub fn decompose(path: &Path) -> Output {
    let diagram = match load_valid(path) {
        Ok(d) => d,
        Err(out) => return out,
    };
    match run_decompose(&diagram) {
        Ok(dec) => Output::ok(report::decomposition(&dec)),
        Err(e) => core_failure(e),
    }
}

fn run(diagram: &InfluenceDiagram, method: Method, conform: bool) -> Result<EvaluationResult, Error> {
    let engine =
        if conform { VariableElimination::conforming(global_order(diagram)) } else { VariableElimination::min_fill() };
    match method {
        Method::Reduction => Evaluator::new(engine).evaluate(diagram),
        Method::Fusion => eval_id1(diagram),
        Method::ShachterPeot => shachter_peot(diagram, &engine),
        Method::BruteForce => brute_force(diagram, &OracleCaps::default()),
    }
}

pub fn evaluate(path: &Path, method: Method, out: Option<&Path>, conform: bool) -> Output {
    let diagram = match load_valid(path) {
        Ok(d) => d,
        Err(out) => return out,
    };
    let result = match run(&diagram, method, conform) {
        Ok(r) => r,
        Err(e) => return core_failure(e),
    };
    if let Some(out) = out {
        let doc = ResultDocument::from_result(method.name(), &result);
        if let Err(e) = fs::write(out, to_json(&doc)) {
            return Output::fail(EXIT_INVALID, format!("cannot write {}: {e}", out.display()));
        }
    }
    Output::ok(report::evaluation(method.name(), &result))
}

pub fn compare(path: &Path, oracle: bool, caps: OracleCaps) -> Output {
    let diagram = match load_valid(path) {
        Ok(d) => d,
        Err(out) => return out,
    };
    let options = CompareOptions { oracle: oracle.then_some(caps) };
    match run_compare(&diagram, &options) {
        Ok(r) => Output {
            code: if report::verdict(&r) { EXIT_OK } else { EXIT_INVALID },
            stdout: report::comparison(&r),
            stderr: String::new(),
        },
        Err(e) => core_failure(e),
    }
}

/// A random diagram from the test-suite generator, as a network document.
pub fn generate(seed: u64, dense: bool) -> Output {
    let shape =
        if dense { DiagramShape { edge_probability: 0.7, ..DiagramShape::default() } } else { DiagramShape::default() };
    let diagram = random_influence_diagram(&mut ChaCha8Rng::seed_from_u64(seed), &shape);
    Output::ok(to_json(&NetworkDocument::from_diagram(&diagram)))
}
