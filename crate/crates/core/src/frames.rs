//! Moving agent moments into the ego frame.
//!
//! Only translation touches the moments. The rotation of the ego frame is
//! absorbed into the ellipsoid, `Q* = R(theta)^T Q R(theta)`, so that
//! `x^T Q* x = (R x)^T Q (R x)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{Gaussian2DMixture, MomentTable};
use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, rotation, sym2_eigen, Mat2, Vec2};
use crate::math::binomial;

/// Collision set `{x : x^T Q x <= 1}` with `Q` symmetric positive definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    q: Mat2,
}

impl Ellipsoid {
    pub fn new(q: Mat2) -> Result<Self> {
        if !q.iter().all(|v| v.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entries".into()));
        }
        if !is_symmetric(&q, 1e-12) {
            return Err(Error::NotPositiveDefinite(format!(
                "ellipsoid matrix is not symmetric: {q}"
            )));
        }
        let (vals, _) = sym2_eigen(&q);
        if vals[1] <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "ellipsoid eigenvalues {:?}",
                vals
            )));
        }
        Ok(Ellipsoid { q })
    }

    /// Disk of the given radius.
    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(Mat2::identity() / (radius * radius))
    }

    /// Axis-aligned ellipse with semi-axes `a` (x) and `b` (y).
    pub fn axis_aligned(a: f64, b: f64) -> Result<Self> {
        Self::new(Mat2::new(1.0 / (a * a), 0.0, 0.0, 1.0 / (b * b)))
    }

    pub fn matrix(&self) -> Mat2 {
        self.q
    }

    /// `x^T Q x`.
    pub fn form(&self, x: &Vec2) -> f64 {
        x.dot(&(self.q * x))
    }

    pub fn contains(&self, x: &Vec2) -> bool {
        self.form(x) <= 1.0
    }
}

/// Planned ego pose at one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl EgoPose {
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::Validation(format!(
                "ego pose ({x}, {y}, {theta}) is not finite"
            )));
        }
        Ok(EgoPose { x, y, theta })
    }

    pub fn origin() -> Self {
        EgoPose {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// `Q* = R(theta)^T Q R(theta)`.
pub fn rotate_form(q: &Ellipsoid, theta: f64) -> Ellipsoid {
    let r = rotation(theta);
    let m = r.transpose() * q.q * r;
    // exact symmetry; round-off can leave the off-diagonals a few ulps apart
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Ellipsoid {
        q: Mat2::new(m[(0, 0)], off, off, m[(1, 1)]),
    }
}

/// Raw moments of `x - v` up to order `n` from raw moments of `x`,
/// by the binomial theorem applied per coordinate.
pub fn translate_moments(table: &MomentTable, v: Vec2, n: usize) -> Result<MomentTable> {
    table.require_order(n)?;
    // powers of -v
    let px: Vec<f64> = (0..=n).map(|k| (-v.x).powi(k as i32)).collect();
    let py: Vec<f64> = (0..=n).map(|k| (-v.y).powi(k as i32)).collect();
    Ok(MomentTable::from_fn(n, |i, j| {
        let mut acc = 0.0;
        for a in 0..=i {
            let ca = binomial(i, a) * px[i - a];
            for b in 0..=j {
                acc += ca * binomial(j, b) * py[j - b] * table.get(a, b);
            }
        }
        acc
    }))
}

/// Ego-frame view of an agent's global-frame moments: translated moments
/// (keeping the input order) and the rotated ellipsoid.
pub fn to_ego_frame(
    agent_moments: &MomentTable,
    ego: &EgoPose,
    q: &Ellipsoid,
) -> Result<(MomentTable, Ellipsoid)> {
    let translated = translate_moments(agent_moments, ego.position(), agent_moments.max_order())?;
    Ok((translated, rotate_form(q, ego.theta)))
}

/// Component-wise ego-frame view of a Gaussian mixture: every mode is
/// shifted by `-ego.position` (weights are frame invariant) and the
/// ellipsoid is rotated. Gaussian structure is kept, so exact CDF methods
/// still apply.
pub fn mixture_to_ego_frame(
    mixture: &Gaussian2DMixture,
    ego: &EgoPose,
    q: &Ellipsoid,
) -> (Gaussian2DMixture, Ellipsoid) {
    let shift = -ego.position();
    let comps = mixture
        .components()
        .iter()
        .map(|c| c.translated(shift))
        .collect();
    let moved = Gaussian2DMixture::new(comps, mixture.weights().to_vec())
        .expect("weights already validated");
    (moved, rotate_form(q, ego.theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Gaussian2D;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn rotate_form_examples() {
        let id = Ellipsoid::new(Mat2::identity()).unwrap();
        for th in [0.0, 0.3, 2.0, -4.0] {
            assert!(close(&rotate_form(&id, th).matrix(), &Mat2::identity(), 1e-15));
        }
        let q = Ellipsoid::axis_aligned(0.5, 1.0).unwrap(); // diag(4, 1)
        assert!(close(
            &rotate_form(&q, FRAC_PI_2).matrix(),
            &Mat2::new(1.0, 0.0, 0.0, 4.0),
            1e-15
        ));
        // R(pi/4)^T diag(4,1) R(pi/4) by hand: c = s = 1/sqrt 2
        // [[c, s], [-s, c]] diag(4,1) [[c, -s], [s, c]] = [[2.5, -1.5], [-1.5, 2.5]]
        assert!(close(
            &rotate_form(&q, FRAC_PI_4).matrix(),
            &Mat2::new(2.5, -1.5, -1.5, 2.5),
            1e-14
        ));
    }

    #[test]
    fn translate_point_mass_to_itself() {
        let p = Vec2::new(3.0, 4.0);
        let t = translate_moments(&MomentTable::point_mass(p, 4), p, 4).unwrap();
        for ((i, j), v) in t.iter() {
            let expect = if i + j == 0 { 1.0 } else { 0.0 };
            assert_eq!(v, expect, "({i},{j})");
        }
    }

    #[test]
    fn identity_translation() {
        let g = Gaussian2D::new(Vec2::new(0.3, -1.0), Mat2::new(2.0, 0.4, 0.4, 1.0)).unwrap();
        let t = g.raw_moments(4).unwrap();
        assert_eq!(translate_moments(&t, Vec2::zeros(), 4).unwrap(), t);
    }

    #[test]
    fn centering_a_gaussian() {
        let g = Gaussian2D::new(Vec2::new(1.0, 0.0), Mat2::identity()).unwrap();
        let t = translate_moments(&g.raw_moments(2).unwrap(), Vec2::new(1.0, 0.0), 2).unwrap();
        assert_eq!(t.get(1, 0), 0.0);
        assert_eq!(t.get(0, 1), 0.0);
        assert_eq!(t.get(2, 0), 1.0);
        assert_eq!(t.get(0, 2), 1.0);
        assert_eq!(t.get(1, 1), 0.0);
    }

    #[test]
    fn translation_never_truncates() {
        let t = MomentTable::point_mass(Vec2::new(1.0, 1.0), 3);
        for n in 4..8 {
            assert!(matches!(
                translate_moments(&t, Vec2::zeros(), n),
                Err(Error::InsufficientOrder { .. })
            ));
        }
    }

    #[test]
    fn ego_at_origin_is_identity() {
        let g = Gaussian2D::new(Vec2::new(2.0, 1.0), Mat2::identity()).unwrap();
        let t = g.raw_moments(4).unwrap();
        let q = Ellipsoid::axis_aligned(2.0, 1.0).unwrap();
        let (t2, q2) = to_ego_frame(&t, &EgoPose::origin(), &q).unwrap();
        assert_eq!(t2, t);
        assert_eq!(q2.matrix(), q.matrix());
    }

    #[test]
    fn rejects_indefinite_ellipsoid() {
        assert!(Ellipsoid::new(Mat2::new(1.0, 2.0, 2.0, 1.0)).is_err());
        assert!(Ellipsoid::new(Mat2::new(1.0, 0.0, 0.0, 0.0)).is_err());
    }
}
