//! Per-step collision probabilities combined into trajectory risk.
//!
//! Each step's prediction is evaluated mode by mode in the ego frame and
//! mixed by the mode weights. Steps combine under independence,
//! `R = 1 - prod_t (1 - P_t)`, or, when the agent keeps one mode for the
//! whole horizon, by mixing per-mode survival products instead.

use serde::{Deserialize, Serialize};

use crate::cheb_bounds::{cheb_bound_halfspace, cheb_bound_quadratic, ellipse_to_halfspaces};
use crate::distributions::{Gaussian2D, Gaussian2DMixture, MomentTable};
use crate::error::{Error, Result};
use crate::frames::{mixture_to_ego_frame, to_ego_frame, EgoPose, Ellipsoid};
use crate::mc_oracle::{mc_control_risk, mc_gaussian_probability};
use crate::method::Method;
use crate::par::{map_indexed, Execution};
use crate::qfmvg::{quad_form_cdf, QfMethod};
use crate::sos_bound::sos_risk_bound;
use crate::treering::{dubins_position_dynamics, propagate, DubinsInputs, MomentState};

const MIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    /// Absolute tolerance of the Imhof integral.
    pub imhof_tol: f64,
    /// Faces of the polygon circumscribing the ellipse.
    pub halfspaces: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            imhof_tol: 1e-8,
            halfspaces: 12,
            mc_samples: 100_000,
            seed: 0,
        }
    }
}

/// What one step of a prediction looks like to the evaluators.
#[derive(Debug, Clone, Copy)]
pub enum StepPrediction<'a> {
    /// Gaussian mixture over the position.
    Mixture(&'a Gaussian2DMixture),
    /// Raw position moments only.
    Moments(&'a MomentTable),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRisk {
    pub weight: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    /// A bound method fell back to the Chebyshev value.
    #[serde(default)]
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRisk {
    pub t: usize,
    pub per_mode: Vec<ModeRisk>,
    pub mixed: f64,
    pub method: Method,
    pub is_upper_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

impl MarginalRisk {
    /// Mixes per-mode values by their weights.
    pub fn from_modes(t: usize, method: Method, per_mode: Vec<ModeRisk>) -> Result<Self> {
        let total_w: f64 = per_mode.iter().map(|m| m.weight).sum();
        if per_mode.is_empty() || (total_w - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "mode weights at step {t} sum to {total_w}"
            )));
        }
        if let Some(m) = per_mode.iter().find(|m| !(0.0..=1.0).contains(&m.value)) {
            return Err(Error::InvalidArgument(format!(
                "mode value {} outside [0, 1] at step {t}",
                m.value
            )));
        }
        let mixed = per_mode.iter().map(|m| m.weight * m.value).sum::<f64>().clamp(0.0, 1.0);
        let std_error = per_mode
            .iter()
            .map(|m| m.std_error.map(|s| (m.weight * s).powi(2)))
            .sum::<Option<f64>>()
            .map(f64::sqrt);
        Ok(MarginalRisk {
            t,
            per_mode,
            mixed,
            method,
            is_upper_bound: method.is_upper_bound(),
            std_error,
        })
    }
}

fn gaussian_mode_risk(
    g: &Gaussian2D,
    q: &Ellipsoid,
    method: Method,
    cfg: &RiskConfig,
    key: u32,
) -> Result<(f64, Option<f64>, bool)> {
    Ok(match method {
        Method::Imhof => (
            quad_form_cdf(q, g, 1.0, QfMethod::Imhof { tol: cfg.imhof_tol })?.probability,
            None,
            false,
        ),
        Method::Ltz => (quad_form_cdf(q, g, 1.0, QfMethod::Ltz)?.probability, None, false),
        Method::Mc => {
            let e = mc_gaussian_probability(g, q, cfg.mc_samples, cfg.seed, key, Execution::Sequential)?;
            (e.probability, Some(e.std_error), false)
        }
        _ => return moment_mode_risk(&g.raw_moments(method.moment_order())?, q, method, cfg),
    })
}

fn moment_mode_risk(
    m: &MomentTable,
    q: &Ellipsoid,
    method: Method,
    cfg: &RiskConfig,
) -> Result<(f64, Option<f64>, bool)> {
    let bound = match method {
        Method::ChebyshevQuad => cheb_bound_quadratic(q, m)?,
        Method::ChebyshevHalfspace => {
            let hs = ellipse_to_halfspaces(q, cfg.halfspaces)?;
            cheb_bound_halfspace(&hs, m.mean()?, m.covariance()?)?
        }
        Method::Sos(d) => sos_risk_bound(q, m, d as usize)?,
        other => {
            return Err(Error::MethodMismatch {
                method: other.to_string(),
                representation: "a moment-only prediction".into(),
            })
        }
    };
    Ok((bound.value, None, bound.fallback))
}

/// Collision probability, or a bound on it, at one step.
pub fn marginal_risk(
    t: usize,
    pred: StepPrediction<'_>,
    ego: &EgoPose,
    q: &Ellipsoid,
    method: Method,
    cfg: &RiskConfig,
) -> Result<MarginalRisk> {
    let per_mode = match pred {
        StepPrediction::Mixture(mix) => {
            let (local, q_star) = mixture_to_ego_frame(mix, ego, q);
            local
                .modes()
                .enumerate()
                .map(|(k, (w, g))| {
                    // generator key unique per step and mode
                    let key = 16 + ((t as u32) << 8) + k as u32;
                    let (value, std_error, fallback) = gaussian_mode_risk(g, &q_star, method, cfg, key)?;
                    Ok(ModeRisk { weight: w, value, std_error, fallback })
                })
                .collect::<Result<Vec<_>>>()?
        }
        StepPrediction::Moments(table) => {
            let (local, q_star) = to_ego_frame(table, ego, q)?;
            let (value, std_error, fallback) = moment_mode_risk(&local, &q_star, method, cfg)?;
            vec![ModeRisk { weight: 1.0, value, std_error, fallback }]
        }
    };
    MarginalRisk::from_modes(t, method, per_mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRisk {
    pub horizon: usize,
    pub marginals: Vec<MarginalRisk>,
    pub total: f64,
    pub is_upper_bound: bool,
    pub mode_persistent: bool,
}

/// `1 - prod_t (1 - P_t)`, or with a persistent mode
/// `sum_z w_z (1 - prod_t (1 - P_{t,z}))`.
pub fn trajectory_risk(marginals: Vec<MarginalRisk>, mode_persistent: bool) -> Result<TrajectoryRisk> {
    let first = marginals.first().ok_or(Error::EmptyHorizon)?;
    let is_upper_bound = marginals.iter().all(|m| m.is_upper_bound);
    let total = if mode_persistent {
        let weights: Vec<f64> = first.per_mode.iter().map(|m| m.weight).collect();
        let mut survival = vec![1.0; weights.len()];
        for m in &marginals {
            let same = m.per_mode.len() == weights.len()
                && m.per_mode.iter().zip(&weights).all(|(a, w)| (a.weight - w).abs() <= MIX_TOL);
            if !same {
                return Err(Error::Validation(format!(
                    "persistent modes need identical weights at every step (step {})",
                    m.t
                )));
            }
            for (s, mode) in survival.iter_mut().zip(&m.per_mode) {
                *s *= 1.0 - mode.value;
            }
        }
        weights.iter().zip(&survival).map(|(w, s)| w * (1.0 - s)).sum::<f64>()
    } else {
        1.0 - marginals.iter().map(|m| 1.0 - m.mixed).product::<f64>()
    };
    Ok(TrajectoryRisk {
        horizon: marginals.len(),
        total: total.clamp(0.0, 1.0),
        marginals,
        is_upper_bound,
        mode_persistent,
    })
}

/// Union bound over agents, `min(1, sum R_i)`.
pub fn multi_agent_bound(per_agent: &[TrajectoryRisk]) -> f64 {
    per_agent.iter().map(|r| r.total).sum::<f64>().min(1.0)
}

/// Trajectory risk of a position-form prediction with one mixture per step.
pub fn position_trajectory_risk(
    steps: &[Gaussian2DMixture],
    ego: &[EgoPose],
    q: &Ellipsoid,
    method: Method,
    cfg: &RiskConfig,
    mode_persistent: bool,
    exec: Execution,
) -> Result<TrajectoryRisk> {
    if steps.len() != ego.len() {
        return Err(Error::Validation(format!(
            "{} prediction steps for {} ego poses",
            steps.len(),
            ego.len()
        )));
    }
    let marginals = map_indexed(exec, steps.len(), |t| {
        marginal_risk(t, StepPrediction::Mixture(&steps[t]), &ego[t], q, method, cfg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    trajectory_risk(marginals, mode_persistent)
}

/// Position moment tables after each control, `E[x^i y^j]` for the states
/// `1..=horizon`, from the propagated Dubins recursion.
pub fn control_moment_tables(inputs: &DubinsInputs, order: usize) -> Result<Vec<MomentTable>> {
    let dyn_ = dubins_position_dynamics(order)?;
    let init = MomentState::point(&dyn_, &inputs.initial().as_point());
    let states = propagate(&dyn_, &init, inputs, inputs.horizon())?;
    states[1..]
        .iter()
        .map(|s| s.position_table(&dyn_, order))
        .collect()
}

/// Trajectory risk of a control-form prediction. Moment methods evaluate
/// the propagated moments; `mc` rolls particles through the dynamics.
pub fn control_trajectory_risk(
    inputs: &DubinsInputs,
    ego: &[EgoPose],
    q: &Ellipsoid,
    method: Method,
    cfg: &RiskConfig,
    exec: Execution,
) -> Result<TrajectoryRisk> {
    if inputs.horizon() != ego.len() {
        return Err(Error::Validation(format!(
            "{} control steps for {} ego poses",
            inputs.horizon(),
            ego.len()
        )));
    }
    if method.needs_gaussian() {
        return Err(Error::MethodMismatch {
            method: method.to_string(),
            representation: "a control-form prediction".into(),
        });
    }
    let marginals = if method == Method::Mc {
        let mc = mc_control_risk(inputs, ego, q, cfg.mc_samples, cfg.seed, exec)?;
        mc.per_step
            .iter()
            .enumerate()
            .map(|(t, e)| {
                MarginalRisk::from_modes(
                    t,
                    method,
                    vec![ModeRisk {
                        weight: 1.0,
                        value: e.probability,
                        std_error: Some(e.std_error),
                        fallback: false,
                    }],
                )
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let tables = control_moment_tables(inputs, method.moment_order())?;
        map_indexed(exec, tables.len(), |t| {
            marginal_risk(t, StepPrediction::Moments(&tables[t]), &ego[t], q, method, cfg)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
    };
    trajectory_risk(marginals, false)
}
