//! Scenario files in, risk reports and expression listings out.

mod report;
mod scenario;

pub use report::{
    compare_methods, comparison_text, report_csv, report_json, run_assess, run_oracle,
    AgentReport, AssessOptions, Comparison, ComparisonRow, MethodResult, MultiAgentTotal,
    RiskReport,
};
pub use scenario::{
    load_scenario, parse_scenario, save_scenario, write_scenario, AgentPrediction, Scenario,
};
pub use crate::treering::dump_treering;
