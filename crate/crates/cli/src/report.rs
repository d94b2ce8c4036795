//! Plain-text renderings of decompositions, evaluation results, and comparisons.

use std::fmt::Write;

use influence_core::baselines::{ComparisonReport, Outcome};
use influence_core::decomposition::TailDecomposition;
use influence_core::evaluator::{DecisionRule, EvaluationResult};
use influence_core::{NameSet, Variable};

fn set(names: &NameSet) -> String {
    let items: Vec<&str> = names.iter().map(|n| &**n).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn decomposition(dec: &TailDecomposition) -> String {
    let rows = [
        ("upstream", &dec.upstream),
        ("downstream", &dec.downstream),
        ("parents", &dec.parents),
        ("pi1", &dec.pi1),
        ("pi2", &dec.pi2),
        ("irrelevant", &dec.irrelevant),
        ("relevant", &dec.relevant),
        ("tail values", &dec.tail_values),
    ];
    let mut out = format!("{:<12} {}\n", "decision", dec.decision);
    for (label, names) in rows {
        writeln!(out, "{label:<12} {}", set(names)).unwrap();
    }
    out
}

fn state(var: &Variable, i: usize) -> String {
    match var.labels() {
        Some(labels) => labels[i].clone(),
        None => i.to_string(),
    }
}

fn rule(out: &mut String, rule: &DecisionRule) {
    let d = &rule.decision;
    let scope = rule.scope();
    if scope.is_empty() {
        writeln!(out, "  {} = {}", d.name(), state(d, rule.table.choices()[0])).unwrap();
        return;
    }
    let names: Vec<&str> = scope.iter().map(|v| &**v.name()).collect();
    writeln!(out, "  {} given {}:", d.name(), names.join(", ")).unwrap();
    let mut config = vec![0usize; scope.len()];
    for &action in rule.table.choices() {
        let shown: Vec<String> = config.iter().zip(scope).map(|(&i, v)| state(v, i)).collect();
        writeln!(out, "    {} -> {}", shown.join(" "), state(d, action)).unwrap();
        for k in (0..scope.len()).rev() {
            config[k] += 1;
            if config[k] < scope[k].cardinality() {
                break;
            }
            config[k] = 0;
        }
    }
}

pub fn evaluation(method: &str, result: &EvaluationResult) -> String {
    let mut out = format!("method          {method}\nexpected value  {}\n", result.expected_value);
    if !result.policy.is_empty() {
        out.push_str("policy\n");
        for r in &result.policy {
            rule(&mut out, r);
        }
    }
    let total = result.total_stats();
    writeln!(
        out,
        "operations      {} multiplications, {} additions, largest factor {} variables",
        total.multiplications, total.additions, total.max_factor_size
    )
    .unwrap();
    out
}

fn ratio(r: f64) -> String {
    if r.is_finite() {
        format!("{r:.3}")
    } else {
        String::from("inf")
    }
}

/// Whether the comparison supports every claim it checks.
pub fn verdict(report: &ComparisonReport) -> bool {
    report.bound_holds() && report.size_dominated() && report.values_agree(1e-8)
}

pub fn comparison(report: &ComparisonReport) -> String {
    let mut out = format!("{:<14} {:<24} {:>15} {:>11}\n", "method", "value", "multiplications", "max factor");
    for row in &report.methods {
        let value = match &row.outcome {
            Outcome::Value(v) => v.to_string(),
            Outcome::Skipped(why) => format!("skipped ({why})"),
        };
        let (mults, size) = match &row.stats {
            Some(s) => (s.multiplications.to_string(), s.max_factor_size.to_string()),
            None => (String::from("-"), String::from("-")),
        };
        writeln!(out, "{:<14} {value:<24} {mults:>15} {size:>11}", row.method).unwrap();
    }
    out.push('\n');
    writeln!(
        out,
        "{:<10} {:>2} {:>16} {:>16} {:>8} {:>6} {:>10} {:>12}",
        "tail", "m", "reduction mults", "fusion mults", "ratio", "1+m", "all-ratio", "max factor"
    )
    .unwrap();
    for t in &report.tails {
        writeln!(
            out,
            "{:<10} {:>2} {:>16} {:>16} {:>8} {:>6} {:>10} {:>12}",
            t.decision,
            t.m,
            t.reduction.elimination_multiplications,
            t.fusion.elimination_multiplications,
            ratio(t.elimination_ratio()),
            t.bound(),
            ratio(t.full_ratio()),
            format!("{}/{}", t.reduction.max_factor_size, t.fusion.max_factor_size),
        )
        .unwrap();
    }
    out.push('\n');
    let yes = |b: bool| if b { "yes" } else { "no" };
    writeln!(
        out,
        "max ratio       {} (elimination), {} (all multiplications)",
        ratio(report.max_elimination_ratio()),
        ratio(report.max_full_ratio())
    )
    .unwrap();
    writeln!(out, "within 1+m      {}", yes(report.bound_holds())).unwrap();
    writeln!(
        out,
        "factor sizes    {}",
        if report.size_dominated() { "reduction <= fusion" } else { "reduction exceeds fusion" }
    )
    .unwrap();
    writeln!(out, "values agree    {} (spread {:.1e})", yes(report.values_agree(1e-8)), report.value_spread()).unwrap();
    writeln!(out, "verdict         {}", if verdict(report) { "PASS" } else { "FAIL" }).unwrap();
    out
}
