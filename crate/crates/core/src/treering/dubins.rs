//! Stochastic Dubins car in polynomial form.
//!
//! ```text
//! x' = x + v cos(theta)       y' = y + v sin(theta)
//! v' = v + w_v                theta' = theta + w_theta
//! ```
//!
//! With `c = cos(theta)`, `s = sin(theta)`, `c_w = cos(w_theta)` and
//! `s_w = sin(w_theta)` the heading update becomes polynomial through the
//! angle-sum identities. Speed and heading are sums of independent noise, so
//! any moment free of `x` and `y` is computed directly: speed moments by
//! binomial convolution, heading moments through the characteristic
//! function of the accumulated heading.

use serde::{Deserialize, Serialize};

use super::dynamics::MAX_MOMENT_DEGREE;
use super::graph::DependenceGraph;
use super::poly::{MultiIndex, Poly, VarId};
use super::propagate::BaseMoments;
use super::system::PolySystem;
use crate::distributions::{trig_moment, IndependentSum, ScalarMixture};
use crate::error::{Error, Result};
use crate::math::convolve_moments;

pub const DUBINS_VARS: [&str; 8] = ["x", "y", "v", "c", "s", "w_v", "c_w", "s_w"];

pub const X: VarId = 0;
pub const Y: VarId = 1;
pub const V: VarId = 2;
pub const C: VarId = 3;
pub const S: VarId = 4;
pub const W_V: VarId = 5;
pub const C_W: VarId = 6;
pub const S_W: VarId = 7;

/// Position, speed and heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DubinsState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
}

impl DubinsState {
    /// Values of all eight polynomial variables with zero noise.
    pub fn as_point(&self) -> [f64; 8] {
        [
            self.x,
            self.y,
            self.v,
            self.theta.cos(),
            self.theta.sin(),
            0.0,
            1.0,
            0.0,
        ]
    }

    /// One step of the Dubins update with the given noise.
    pub fn step(&self, w_v: f64, w_theta: f64) -> DubinsState {
        DubinsState {
            x: self.x + self.v * self.theta.cos(),
            y: self.y + self.v * self.theta.sin(),
            v: self.v + w_v,
            theta: self.theta + w_theta,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DubinsSystem {
    pub system: PolySystem,
    pub graph: DependenceGraph,
}

fn v(id: VarId) -> Poly {
    Poly::var(id)
}

fn base_system(stochastic_speed: bool) -> Result<PolySystem> {
    let mut sys = PolySystem::new(DUBINS_VARS)?;
    sys.set_update(X, &v(X) + &(&v(V) * &v(C)))?;
    sys.set_update(Y, &v(Y) + &(&v(V) * &v(S)))?;
    if stochastic_speed {
        sys.set_update(V, &v(V) + &v(W_V))?;
    } else {
        sys.set_update(V, v(V))?;
    }
    sys.set_update(C, &(&v(C) * &v(C_W)) - &(&v(S) * &v(S_W)))?;
    sys.set_update(S, &(&v(S) * &v(C_W)) + &(&v(C) * &v(S_W)))?;
    for k in [V, C, S, W_V, C_W, S_W] {
        sys.mark_known(k)?;
    }
    Ok(sys)
}

/// Dependence among position, speed and heading, plus the joint
/// dependence of each sine/cosine pair.
pub const DUBINS_EDGES: [(VarId, VarId); 9] = [
    (X, Y),
    (X, V),
    (Y, V),
    (X, S),
    (X, C),
    (Y, S),
    (Y, C),
    (C, S),
    (C_W, S_W),
];

pub fn dubins_system() -> DubinsSystem {
    DubinsSystem {
        system: base_system(true).expect("static system"),
        graph: DependenceGraph::with_edges(8, &DUBINS_EDGES).expect("static graph"),
    }
}

/// Deterministic constant speed: `v` is independent of everything, so the
/// position-speed edges are dropped.
pub fn dubins_system_constant_speed() -> DubinsSystem {
    let edges: Vec<_> = DUBINS_EDGES
        .iter()
        .copied()
        .filter(|&(a, b)| !(a == V || b == V))
        .collect();
    DubinsSystem {
        system: base_system(false).expect("static system"),
        graph: DependenceGraph::with_edges(8, &edges).expect("static graph"),
    }
}

/// Initial state and per-step control noise; supplies every moment free of
/// position.
#[derive(Debug, Clone)]
pub struct DubinsInputs {
    initial: DubinsState,
    w_v: Vec<ScalarMixture>,
    w_theta: Vec<ScalarMixture>,
    /// Raw moments of the speed at each step up to the degree cap.
    speed_moments: Vec<Vec<f64>>,
}

impl DubinsInputs {
    pub fn new(
        initial: DubinsState,
        w_v: Vec<ScalarMixture>,
        w_theta: Vec<ScalarMixture>,
    ) -> Result<Self> {
        if w_v.len() != w_theta.len() {
            return Err(Error::Validation(format!(
                "{} speed noise steps but {} heading noise steps",
                w_v.len(),
                w_theta.len()
            )));
        }
        let n = MAX_MOMENT_DEGREE as usize;
        let mut cur: Vec<f64> = (0..=n).map(|k| initial.v.powi(k as i32)).collect();
        let mut speed_moments = vec![cur.clone()];
        for w in &w_v {
            cur = convolve_moments(&cur, &w.raw_moments(n));
            speed_moments.push(cur.clone());
        }
        Ok(DubinsInputs {
            initial,
            w_v,
            w_theta,
            speed_moments,
        })
    }

    pub fn horizon(&self) -> usize {
        self.w_v.len()
    }

    pub fn initial(&self) -> &DubinsState {
        &self.initial
    }

    pub fn w_v(&self) -> &[ScalarMixture] {
        &self.w_v
    }

    pub fn w_theta(&self) -> &[ScalarMixture] {
        &self.w_theta
    }

    /// `E[cos^a(theta_t) sin^b(theta_t)]` for the accumulated heading.
    pub fn heading_moment(&self, t: usize, a: usize, b: usize) -> Result<f64> {
        let sum = IndependentSum {
            parts: self.w_theta[..t].iter().collect::<Vec<_>>(),
            constant: self.initial.theta,
        };
        trig_moment(&sum, a, b)
    }
}

impl BaseMoments for DubinsInputs {
    fn base_moment(&self, t: usize, alpha: &MultiIndex) -> Result<f64> {
        let missing = || {
            Error::MissingBaseMoment(format!(
                "E[{}] at step {t}",
                alpha.render(&DUBINS_VARS.map(String::from))
            ))
        };
        if t >= self.horizon() || alpha.involves(X) || alpha.involves(Y) {
            return Err(missing());
        }
        let e = |k| alpha.exponent(k) as usize;
        if alpha.degree() > MAX_MOMENT_DEGREE {
            return Err(Error::OrderLimit {
                requested: alpha.degree() as usize,
                limit: MAX_MOMENT_DEGREE as usize,
            });
        }
        let speed = self.speed_moments[t][e(V)];
        let heading = self.heading_moment(t, e(C), e(S))?;
        let accel = self.w_v[t].moment(e(W_V));
        let turn = trig_moment(&self.w_theta[t], e(C_W), e(S_W))?;
        Ok(speed * heading * accel * turn)
    }
}
