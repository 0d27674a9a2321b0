//! Assessment runs and their JSON, CSV and text renderings.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::scenario::{AgentPrediction, Scenario};
use crate::error::{Error, Result};
use crate::mc_oracle::{mc_control_risk, mc_position_risk, McRisk};
use crate::method::Method;
use crate::par::Execution;
use crate::risk_engine::{
    control_trajectory_risk, multi_agent_bound, position_trajectory_risk, RiskConfig, TrajectoryRisk,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub risk: TrajectoryRisk,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent: usize,
    pub form: String,
    pub results: Vec<MethodResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<McRisk>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiAgentTotal {
    pub method: Method,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub horizon: usize,
    pub config: RiskConfig,
    pub agents: Vec<AgentReport>,
    /// Union bound over agents per method.
    pub multi_agent: Vec<MultiAgentTotal>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessOptions {
    pub config: RiskConfig,
    pub exec: Execution,
    /// Also run the Monte Carlo oracle per agent.
    pub oracle: bool,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions {
            config: RiskConfig::default(),
            exec: Execution::Parallel,
            oracle: false,
        }
    }
}

fn agent_risk(
    agent: &AgentPrediction,
    sc: &Scenario,
    method: Method,
    opts: &AssessOptions,
) -> Result<TrajectoryRisk> {
    match agent {
        AgentPrediction::Position { mode_persistence, steps } => position_trajectory_risk(
            steps,
            &sc.ego_trajectory,
            &sc.ellipsoid,
            method,
            &opts.config,
            *mode_persistence,
            opts.exec,
        ),
        AgentPrediction::Control { inputs, .. } => control_trajectory_risk(
            inputs,
            &sc.ego_trajectory,
            &sc.ellipsoid,
            method,
            &opts.config,
            opts.exec,
        ),
    }
}

fn agent_oracle(agent: &AgentPrediction, sc: &Scenario, opts: &AssessOptions) -> Result<McRisk> {
    let cfg = &opts.config;
    match agent {
        AgentPrediction::Position { steps, .. } => mc_position_risk(
            steps,
            &sc.ego_trajectory,
            &sc.ellipsoid,
            cfg.mc_samples,
            cfg.seed,
            opts.exec,
        ),
        AgentPrediction::Control { inputs, .. } => mc_control_risk(
            inputs,
            &sc.ego_trajectory,
            &sc.ellipsoid,
            cfg.mc_samples,
            cfg.seed,
            opts.exec,
        ),
    }
}

/// Evaluates every method on every agent. Deterministic for a fixed seed
/// apart from the timings.
pub fn run_assess(sc: &Scenario, methods: &[Method], opts: &AssessOptions) -> Result<RiskReport> {
    if methods.is_empty() && !opts.oracle {
        return Err(Error::Validation("no methods given".into()));
    }
    sc.validate()?;
    let mut agents = Vec::with_capacity(sc.agents.len());
    for (a, agent) in sc.agents.iter().enumerate() {
        let mut results = Vec::with_capacity(methods.len());
        for &method in methods {
            let start = Instant::now();
            let risk = agent_risk(agent, sc, method, opts)?;
            results.push(MethodResult {
                method,
                risk,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        let oracle = if opts.oracle { Some(agent_oracle(agent, sc, opts)?) } else { None };
        agents.push(AgentReport {
            agent: a,
            form: agent.form().into(),
            results,
            oracle,
        });
    }
    let multi_agent = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let per_agent: Vec<TrajectoryRisk> =
                agents.iter().map(|r| r.results[k].risk.clone()).collect();
            MultiAgentTotal { method, bound: multi_agent_bound(&per_agent) }
        })
        .collect();
    Ok(RiskReport {
        horizon: sc.horizon(),
        config: opts.config,
        agents,
        multi_agent,
    })
}

/// Monte Carlo only.
pub fn run_oracle(sc: &Scenario, opts: &AssessOptions) -> Result<RiskReport> {
    run_assess(sc, &[], &AssessOptions { oracle: true, ..*opts })
}

pub fn report_json(r: &RiskReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(|s| format!("{s:e}")).unwrap_or_default()
}

/// One row per agent, step and method; oracle rows use the method name
/// `mc-oracle`.
pub fn report_csv(r: &RiskReport) -> String {
    let mut out = String::from("agent,t,method,value,is_upper_bound,std_error\n");
    for a in &r.agents {
        for res in &a.results {
            for m in &res.risk.marginals {
                let _ = writeln!(
                    out,
                    "{},{},{},{:e},{},{}",
                    a.agent,
                    m.t,
                    res.method,
                    m.mixed,
                    m.is_upper_bound,
                    csv_opt(m.std_error)
                );
            }
        }
        if let Some(o) = &a.oracle {
            for (t, e) in o.per_step.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},mc-oracle,{:e},false,{:e}",
                    a.agent, t, e.probability, e.std_error
                );
            }
        }
    }
    out
}

/// Method comparison against a reference method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub is_upper_bound: bool,
    /// Mean trajectory total over agents.
    pub mean_total: f64,
    /// Largest per-step deviation from the reference over all agents.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_diff: Option<f64>,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Method>,
    pub rows: Vec<ComparisonRow>,
}

/// Builds the comparison table; the reference is the first of imhof or mc
/// present in the report.
pub fn compare_methods(r: &RiskReport) -> Comparison {
    let methods: Vec<Method> = r
        .agents
        .first()
        .map(|a| a.results.iter().map(|x| x.method).collect())
        .unwrap_or_default();
    let reference = [Method::Imhof, Method::Mc]
        .into_iter()
        .find(|m| methods.contains(m));
    let rows = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let results: Vec<&MethodResult> = r.agents.iter().map(|a| &a.results[k]).collect();
            let n = results.len().max(1) as f64;
            let max_abs_diff = reference.map(|rm| {
                let rk = methods.iter().position(|m| *m == rm).expect("present");
                r.agents
                    .iter()
                    .flat_map(|a| {
                        a.results[k]
                            .risk
                            .marginals
                            .iter()
                            .zip(&a.results[rk].risk.marginals)
                            .map(|(x, y)| (x.mixed - y.mixed).abs())
                    })
                    .fold(0.0, f64::max)
            });
            ComparisonRow {
                method,
                is_upper_bound: method.is_upper_bound(),
                mean_total: results.iter().map(|x| x.risk.total).sum::<f64>() / n,
                max_abs_diff,
                total_ms: results.iter().map(|x| x.elapsed_ms).sum(),
            }
        })
        .collect();
    Comparison { reference, rows }
}

pub fn comparison_text(c: &Comparison) -> String {
    let mut out = String::new();
    let reference = c.reference.map(|m| m.to_string()).unwrap_or_else(|| "none".into());
    let _ = writeln!(
        out,
        "{:<22}{:>8}{:>14}{:>20}{:>12}",
        "method",
        "bound",
        "mean total",
        format!("max |diff {reference}|"),
        "time ms"
    );
    for r in &c.rows {
        let _ = writeln!(
            out,
            "{:<22}{:>8}{:>14.6}{:>20}{:>12.2}",
            r.method.to_string(),
            if r.is_upper_bound { "yes" } else { "no" },
            r.mean_total,
            r.max_abs_diff.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into()),
            r.total_ms
        );
    }
    out
}
