//! Campaigns: configuration, execution, analysis and reports on disk.

pub mod analyze;
pub mod checks;
pub mod config;
pub mod report;
pub mod run;

pub use analyze::{analyze, cmd_analyze, AnalysisSummary, AnalyzeOptions, Campaign, OutcomeKind};
pub use checks::{run_oracle, OracleOptions, OracleReport, Suite};
pub use config::{preset, CampaignConfig, OUTPUT_ROOT_ENV, PRESET_NAMES, SCHEMA_VERSION};
pub use report::cmd_report;
pub use run::{cmd_run, run_in, RunOptions, RunSummary};
