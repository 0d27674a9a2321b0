//! One-tailed Chebyshev (Cantelli) risk bounds.
//!
//! For `g` with `E[g] > 0`, `P(g <= 0) <= (E[g^2] - E[g]^2) / E[g^2]`.
//! Applied to `g = Q(x) - 1` this needs moments of `x` up to order four.
//! Applied to each face of a circumscribing polygon it needs only the mean
//! and covariance, and the smallest face bound wins.

use serde::{Deserialize, Serialize};

use crate::distributions::MomentTable;
use crate::error::{Error, Result};
use crate::frames::Ellipsoid;
use crate::linalg::{sym2_eigen, Mat2, Vec2};
use crate::method::Method;

const JENSEN_TOL: f64 = 1e-12;

/// `{x : a^T x + b <= 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub a: Vec2,
    pub b: f64,
}

impl HalfSpace {
    pub fn new(a: Vec2, b: f64) -> Result<Self> {
        if !(a.norm() > 0.0) || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "half-space needs a nonzero normal, got a = {a:?}, b = {b}"
            )));
        }
        Ok(HalfSpace { a, b })
    }

    /// `a^T x + b`.
    pub fn margin(&self, x: &Vec2) -> f64 {
        self.a.dot(x) + self.b
    }

    pub fn contains(&self, x: &Vec2) -> bool {
        self.margin(x) <= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBound {
    pub value: f64,
    pub method: Method,
    /// Highest moment order consumed.
    pub moments_used: usize,
    /// Set when a higher-order method fell back to the Chebyshev bound.
    pub fallback: bool,
}

/// Cantelli bound on `P(g <= 0)` from `E[g]` and `E[g^2]`. Returns 1 when
/// `E[g] <= 0`: the mean itself already lies in the event.
pub fn cheb_one_tailed(mean_g: f64, second_moment_g: f64) -> Result<f64> {
    if !mean_g.is_finite() || !second_moment_g.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite moments ({mean_g}, {second_moment_g})"
        )));
    }
    let var = second_moment_g - mean_g * mean_g;
    if var < -JENSEN_TOL * second_moment_g.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "inconsistent moments: E[g^2] = {second_moment_g} < E[g]^2 = {}",
            mean_g * mean_g
        )));
    }
    if mean_g <= 0.0 {
        return Ok(1.0);
    }
    Ok((var.max(0.0) / second_moment_g).clamp(0.0, 1.0))
}

/// `E[x^T Q x] = tr(Q sigma) + mu^T Q mu`.
pub fn quad_form_mean(q: &Ellipsoid, mu: Vec2, sigma: Mat2) -> f64 {
    let qm = q.matrix();
    (qm * sigma).trace() + mu.dot(&(qm * mu))
}

/// `E[x^T Q x]` from raw moments up to order two.
pub fn quad_form_mean_from_moments(q: &Ellipsoid, moments: &MomentTable) -> Result<f64> {
    moments.require_order(2)?;
    let qm = q.matrix();
    Ok(qm[(0, 0)] * moments.get(2, 0)
        + 2.0 * qm[(0, 1)] * moments.get(1, 1)
        + qm[(1, 1)] * moments.get(0, 2))
}

/// `E[(x^T Q x)^2] = sum_{ijkl} Q_ij Q_kl E[x_i x_j x_k x_l]`.
pub fn quad_form_second_moment(q: &Ellipsoid, moments: &MomentTable) -> Result<f64> {
    moments.require_order(4)?;
    let qm = q.matrix();
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let ny = i + j + k + l;
                    acc += qm[(i, j)] * qm[(k, l)] * moments.get(4 - ny, ny);
                }
            }
        }
    }
    Ok(acc)
}

/// Cantelli bound on `P(x^T Q x <= 1)` from moments up to order four.
pub fn cheb_bound_quadratic(q: &Ellipsoid, moments: &MomentTable) -> Result<RiskBound> {
    let m1 = quad_form_mean_from_moments(q, moments)?;
    let m2 = quad_form_second_moment(q, moments)?;
    let value = cheb_one_tailed(m1 - 1.0, m2 - 2.0 * m1 + 1.0)?;
    Ok(RiskBound {
        value,
        method: Method::ChebyshevQuad,
        moments_used: 4,
        fallback: false,
    })
}

/// `n_h` lines tangent to `{x^T Q x = 1}` at `x_k = Q^{-1/2}(cos phi_k, sin phi_k)`,
/// `phi_k = 2 pi k / n_h`. Their intersection contains the ellipse.
pub fn ellipse_to_halfspaces(q: &Ellipsoid, n_h: usize) -> Result<Vec<HalfSpace>> {
    if n_h < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 half-spaces, got {n_h}"
        )));
    }
    // tangent normal at x_k is Q x_k = Q^{1/2} (cos, sin); the line is
    // a^T x = x_k^T Q x_k = 1
    let (vals, vecs) = sym2_eigen(&q.matrix());
    let root = vecs * Mat2::new(vals[0].sqrt(), 0.0, 0.0, vals[1].sqrt()) * vecs.transpose();
    (0..n_h)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / n_h as f64;
            let a = root * Vec2::new(phi.cos(), phi.sin());
            HalfSpace::new(a, -1.0)
        })
        .collect()
}

/// `min_i P(a_i^T x + b_i <= 0)` bounded face by face with Cantelli on the
/// affine margin, whose mean is `a^T mu + b` and variance `a^T sigma a`.
pub fn cheb_bound_halfspace(halfspaces: &[HalfSpace], mu: Vec2, sigma: Mat2) -> Result<RiskBound> {
    let mut best: f64 = 1.0;
    for h in halfspaces {
        let mean = h.margin(&mu);
        let var = h.a.dot(&(sigma * h.a)).max(0.0);
        best = best.min(cheb_one_tailed(mean, var + mean * mean)?);
    }
    Ok(RiskBound {
        value: best,
        method: Method::ChebyshevHalfspace,
        moments_used: 2,
        fallback: false,
    })
}
