//! End-to-end pipeline behind the `sseval` binary: objective FAD scoring,
//! subjective rating aggregation, their correlation, and the manifest and
//! budget checks.

pub mod budget;
pub mod cli;
pub mod config;
pub mod correlate;
pub mod error;
pub mod objective;
pub mod report;
pub mod subjective;

pub use budget::{check_generation_budget, BudgetCheck, BudgetLimits};
pub use cli::{run, Cli, Command, Outcome};
pub use config::Settings;
pub use correlate::{attach_subjective, run_correlation};
pub use error::CliError;
pub use objective::run_objective;
pub use report::{CorrelationReport, ObjectiveReport, SubjectiveReport, SystemReport, SCHEMA_VERSION};
pub use subjective::{run_subjective, run_subjective_records};
