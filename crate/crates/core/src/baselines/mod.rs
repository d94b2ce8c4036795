//! Reference evaluators used to cross-check the reduction evaluator, and
//! the harness that compares their operation counts.

pub mod compare;
pub mod fusion;
pub mod oracle;
pub mod shachter_peot;

pub use compare::{compare, CompareOptions, ComparisonReport, MethodRow, Outcome, TailRow};
pub use fusion::{eval_fun1, eval_id1, eval_id1_with, exp_val1, fuse, FactorLists};
pub use oracle::{brute_force, enumerate_policies, policy_value, OracleCaps};
pub use shachter_peot::shachter_peot;
