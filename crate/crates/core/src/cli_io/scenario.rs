//! Scenario files: JSON schema, validation and serialization.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::{Gaussian2D, Gaussian2DMixture, ScalarComponent, ScalarMixture};
use crate::error::{Error, Result};
use crate::frames::{EgoPose, Ellipsoid};
use crate::linalg::{Mat2, Vec2};
use crate::treering::{DubinsInputs, DubinsState};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub ego_trajectory: Vec<EgoPose>,
    pub ellipsoid: Ellipsoid,
    pub agents: Vec<AgentPrediction>,
}

#[derive(Debug, Clone)]
pub enum AgentPrediction {
    /// One Gaussian mixture over the position per step.
    Position {
        mode_persistence: bool,
        steps: Vec<Gaussian2DMixture>,
    },
    /// Initial Dubins state and per-step control mixtures.
    Control {
        mode_persistence: bool,
        inputs: DubinsInputs,
    },
}

impl AgentPrediction {
    pub fn horizon(&self) -> usize {
        match self {
            AgentPrediction::Position { steps, .. } => steps.len(),
            AgentPrediction::Control { inputs, .. } => inputs.horizon(),
        }
    }

    pub fn form(&self) -> &'static str {
        match self {
            AgentPrediction::Position { .. } => "gmm_position",
            AgentPrediction::Control { .. } => "gmm_control",
        }
    }

    pub fn mode_persistence(&self) -> bool {
        match self {
            AgentPrediction::Position { mode_persistence, .. }
            | AgentPrediction::Control { mode_persistence, .. } => *mode_persistence,
        }
    }
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.ego_trajectory.len()
    }

    /// Checks the cross-field invariants: a nonempty horizon shared by
    /// every agent.
    pub fn validate(&self) -> Result<()> {
        if self.ego_trajectory.is_empty() {
            return Err(Error::Validation("ego_trajectory is empty".into()));
        }
        for (a, agent) in self.agents.iter().enumerate() {
            if agent.horizon() != self.horizon() {
                return Err(Error::Validation(format!(
                    "agents[{a}]: {} steps but the ego trajectory has {}",
                    agent.horizon(),
                    self.horizon()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPose {
    x: f64,
    y: f64,
    theta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawEllipsoid {
    q: [[f64; 2]; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct RawMode {
    weight: f64,
    mean: [f64; 2],
    cov: [[f64; 2]; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct RawStep {
    modes: Vec<RawMode>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawScalarMode {
    weight: f64,
    mean: f64,
    var: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawControlStep {
    w_v_modes: Vec<RawScalarMode>,
    w_theta_modes: Vec<RawScalarMode>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawState {
    x: f64,
    y: f64,
    v: f64,
    theta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "form")]
enum RawAgent {
    #[serde(rename = "gmm_position")]
    Position {
        #[serde(default)]
        mode_persistence: bool,
        steps: Vec<RawStep>,
    },
    #[serde(rename = "gmm_control")]
    Control {
        #[serde(default)]
        mode_persistence: bool,
        initial_state: RawState,
        steps: Vec<RawControlStep>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct RawScenario {
    ego_trajectory: Vec<RawPose>,
    ellipsoid: RawEllipsoid,
    agents: Vec<RawAgent>,
}

fn mat(m: [[f64; 2]; 2]) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn unmat(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Validation(format!("{path}: {e}")))
}

fn scalar_mixture(path: &str, modes: &[RawScalarMode]) -> Result<ScalarMixture> {
    let comps = modes
        .iter()
        .enumerate()
        .map(|(k, m)| at(&format!("{path}[{k}]"), ScalarComponent::gaussian(m.mean, m.var)))
        .collect::<Result<Vec<_>>>()?;
    at(path, ScalarMixture::new(comps, modes.iter().map(|m| m.weight).collect()))
}

fn from_raw(raw: RawScenario) -> Result<Scenario> {
    let ego_trajectory = raw
        .ego_trajectory
        .iter()
        .enumerate()
        .map(|(t, p)| at(&format!("ego_trajectory[{t}]"), EgoPose::new(p.x, p.y, p.theta)))
        .collect::<Result<Vec<_>>>()?;
    let ellipsoid = at("ellipsoid.q", Ellipsoid::new(mat(raw.ellipsoid.q)))?;
    let mut agents = Vec::with_capacity(raw.agents.len());
    for (a, agent) in raw.agents.into_iter().enumerate() {
        agents.push(match agent {
            RawAgent::Position { mode_persistence, steps } => {
                let steps = steps
                    .iter()
                    .enumerate()
                    .map(|(t, s)| {
                        let path = format!("agents[{a}].steps[{t}]");
                        let comps = s
                            .modes
                            .iter()
                            .enumerate()
                            .map(|(k, m)| {
                                at(
                                    &format!("{path}.modes[{k}]"),
                                    Gaussian2D::new(Vec2::new(m.mean[0], m.mean[1]), mat(m.cov)),
                                )
                            })
                            .collect::<Result<Vec<_>>>()?;
                        at(&path, Gaussian2DMixture::new(comps, s.modes.iter().map(|m| m.weight).collect()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                AgentPrediction::Position { mode_persistence, steps }
            }
            RawAgent::Control { mode_persistence, initial_state, steps } => {
                let s = &initial_state;
                if ![s.x, s.y, s.v, s.theta].iter().all(|v| v.is_finite()) {
                    return Err(Error::Validation(format!(
                        "agents[{a}].initial_state is not finite"
                    )));
                }
                let mut w_v = Vec::with_capacity(steps.len());
                let mut w_theta = Vec::with_capacity(steps.len());
                for (t, st) in steps.iter().enumerate() {
                    let path = format!("agents[{a}].steps[{t}]");
                    w_v.push(scalar_mixture(&format!("{path}.w_v_modes"), &st.w_v_modes)?);
                    w_theta.push(scalar_mixture(&format!("{path}.w_theta_modes"), &st.w_theta_modes)?);
                }
                let initial = DubinsState { x: s.x, y: s.y, v: s.v, theta: s.theta };
                AgentPrediction::Control {
                    mode_persistence,
                    inputs: at(&format!("agents[{a}]"), DubinsInputs::new(initial, w_v, w_theta))?,
                }
            }
        });
    }
    let sc = Scenario { ego_trajectory, ellipsoid, agents };
    sc.validate()?;
    Ok(sc)
}

fn scalar_modes(m: &ScalarMixture) -> Vec<RawScalarMode> {
    m.components()
        .iter()
        .zip(m.weights())
        .map(|(c, w)| RawScalarMode { weight: *w, mean: c.mean(), var: c.variance() })
        .collect()
}

fn to_raw(sc: &Scenario) -> RawScenario {
    RawScenario {
        ego_trajectory: sc
            .ego_trajectory
            .iter()
            .map(|p| RawPose { x: p.x, y: p.y, theta: p.theta })
            .collect(),
        ellipsoid: RawEllipsoid { q: unmat(&sc.ellipsoid.matrix()) },
        agents: sc
            .agents
            .iter()
            .map(|a| match a {
                AgentPrediction::Position { mode_persistence, steps } => RawAgent::Position {
                    mode_persistence: *mode_persistence,
                    steps: steps
                        .iter()
                        .map(|mix| RawStep {
                            modes: mix
                                .modes()
                                .map(|(w, g)| RawMode {
                                    weight: w,
                                    mean: [g.mean().x, g.mean().y],
                                    cov: unmat(&g.covariance()),
                                })
                                .collect(),
                        })
                        .collect(),
                },
                AgentPrediction::Control { mode_persistence, inputs } => {
                    let s = inputs.initial();
                    RawAgent::Control {
                        mode_persistence: *mode_persistence,
                        initial_state: RawState { x: s.x, y: s.y, v: s.v, theta: s.theta },
                        steps: inputs
                            .w_v()
                            .iter()
                            .zip(inputs.w_theta())
                            .map(|(v, t)| RawControlStep {
                                w_v_modes: scalar_modes(v),
                                w_theta_modes: scalar_modes(t),
                            })
                            .collect(),
                    }
                }
            })
            .collect(),
    }
}

/// Parses and validates scenario JSON. Syntax errors carry the line and
/// column; invariant violations name the offending field path.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    from_raw(raw)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Pretty-printed JSON in the input schema.
pub fn write_scenario(sc: &Scenario) -> String {
    serde_json::to_string_pretty(&to_raw(sc)).expect("scenario serializes")
}

pub fn save_scenario(sc: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_scenario(sc) + "\n")
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
