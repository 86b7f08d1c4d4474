//! Scenario files, the expression language and JSON reports.

pub mod compile;
pub mod expr;
pub mod run;
pub mod scenario;

pub use compile::{compile_field, truncation_loss, TruncationReport};
pub use expr::{parse_expression, Expr, ParseError, ParseErrorKind};
pub use run::{run_scenario, Report, RunOptions, SCHEMA_VERSION};
pub use scenario::{parse_scenario, Scenario, ScenarioError, TaskKind, TASK_KINDS};
