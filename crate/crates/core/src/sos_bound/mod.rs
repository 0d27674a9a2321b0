//! Sum-of-squares risk bound for `P(g <= 0)`, `g = x^T Q x - 1`.
//!
//! Any polynomial `p` with `p >= 1` on `(-inf, 0]` and `p >= 0` everywhere
//! satisfies `P(g <= 0) <= E[p(g)] = sum_k p_k E[g^k]`. Writing
//! `p - 1 = s1 - x s2` with `p`, `s1`, `s2` sums of squares certifies both
//! conditions, and with Gram matrices for the three squares the cheapest
//! certificate is a small semidefinite program.

pub mod sdp;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cheb_bounds::{cheb_bound_quadratic, RiskBound};
use crate::distributions::MomentTable;
use crate::error::{Error, Result};
use crate::frames::Ellipsoid;
use crate::linalg::Mat2;
use crate::math::multinomial;
use crate::method::Method;

pub use sdp::{SdpProblem, SdpSolution, SdpStatus};

pub const SDP_TOL: f64 = 1e-9;
pub const SDP_MAX_ITER: usize = 100;
/// Relative tolerance on the smallest Hankel eigenvalue of a moment vector.
const HANKEL_TOL: f64 = 1e-9;

/// `m_k = E[g^k]`, `k = 0..=d`, possibly rescaled to `E[(g/scale)^k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub d: usize,
    pub m: Vec<f64>,
    pub scale: f64,
}

impl MomentVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.is_empty() || (m[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "moment vector must start with m0 = 1, got {m:?}"
            )));
        }
        Ok(MomentVector {
            d: m.len() - 1,
            m,
            scale: 1.0,
        })
    }

    /// `[m_{i+j}]` for `i, j <= size - 1`.
    pub fn hankel(&self, size: usize) -> DMatrix<f64> {
        DMatrix::from_fn(size, size, |i, j| self.m[i + j])
    }

    /// Whether the Hankel matrix of the even part is positive semidefinite,
    /// a necessary condition for `m` to be moments of some distribution.
    pub fn hankel_psd(&self) -> bool {
        let h = self.hankel(self.d / 2 + 1);
        let eig = h.clone().symmetric_eigenvalues();
        eig.min() >= -HANKEL_TOL * eig.amax().max(1.0)
    }
}

/// Coefficients of `(x^T Q x + shift)^k` over monomials `x^i y^j`.
pub fn expand_quad_power(q: &Mat2, shift: f64, k: usize) -> BTreeMap<(usize, usize), f64> {
    let (a, b2, c) = (q[(0, 0)], 2.0 * q[(0, 1)], q[(1, 1)]);
    let mut out = BTreeMap::new();
    // terms a x^2, b2 xy, c y^2, shift with multiplicities p1..p4
    for p1 in 0..=k {
        for p2 in 0..=k - p1 {
            for p3 in 0..=k - p1 - p2 {
                let p4 = k - p1 - p2 - p3;
                let coef = multinomial(&[p1, p2, p3, p4])
                    * a.powi(p1 as i32)
                    * b2.powi(p2 as i32)
                    * c.powi(p3 as i32)
                    * shift.powi(p4 as i32);
                if coef != 0.0 {
                    *out.entry((2 * p1 + p2, p2 + 2 * p3)).or_insert(0.0) += coef;
                }
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// `E[(x^T Q x - 1)^k]` for `k = 0..=d` by multinomial expansion.
pub fn moments_of_g(q: &Ellipsoid, x_moments: &MomentTable, d: usize) -> Result<MomentVector> {
    x_moments.require_order(2 * d)?;
    let qm = q.matrix();
    let m = (0..=d)
        .map(|k| {
            expand_quad_power(&qm, -1.0, k)
                .into_iter()
                .map(|((i, j), c)| c * x_moments.get(i, j))
                .sum()
        })
        .collect();
    MomentVector::new(m)
}

/// Moments of `g / c` with `c = sqrt(m2)`; `P(g <= 0)` is unchanged.
pub fn normalize_moments(mv: &MomentVector) -> Result<MomentVector> {
    if mv.d < 2 || !(mv.m[2] > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "normalization needs m2 > 0, got {:?}",
            mv.m.get(2)
        )));
    }
    let c = mv.m[2].sqrt();
    Ok(MomentVector {
        d: mv.d,
        m: mv.m.iter().enumerate().map(|(k, v)| v / c.powi(k as i32)).collect(),
        scale: mv.scale * c,
    })
}

/// Gram-matrix SDP for the degree-`d` certificate.
#[derive(Debug, Clone)]
pub struct SosProgram {
    pub d: usize,
    pub moments: MomentVector,
    /// Gram sizes of `p`, `s1`, `s2`.
    pub gram_dims: [usize; 3],
    pub sdp: SdpProblem,
}

impl SosProgram {
    pub fn n_constraints(&self) -> usize {
        self.sdp.b.len()
    }
}

/// `n × n` indicator of the anti-diagonal `i + j = k`.
fn anti_diag(n: usize, k: i64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if (i + j) as i64 == k { 1.0 } else { 0.0 })
}

/// Builds the program: minimize `sum_k p_k m_k` over Gram matrices `P`,
/// `S1`, `S2` subject to matching coefficients of `x^k`, `k = 0..=d`, in
/// `p(x) - 1 = s1(x) - x s2(x)`.
pub fn build_sos_program(mv: &MomentVector) -> Result<SosProgram> {
    let d = mv.d;
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "SOS degree must be even and at least 2, got {d}"
        )));
    }
    let n = d / 2;
    let dims = [n + 1, n + 1, n];
    let c = vec![
        mv.hankel(n + 1),
        DMatrix::zeros(n + 1, n + 1),
        DMatrix::zeros(n, n),
    ];
    let mut a = Vec::with_capacity(d + 1);
    let mut b = Vec::with_capacity(d + 1);
    for k in 0..=d as i64 {
        a.push(vec![
            anti_diag(n + 1, k),
            -anti_diag(n + 1, k),
            anti_diag(n, k - 1),
        ]);
        b.push(if k == 0 { 1.0 } else { 0.0 });
    }
    Ok(SosProgram {
        d,
        moments: mv.clone(),
        gram_dims: dims,
        sdp: SdpProblem::new(dims.to_vec(), c, a, b)?,
    })
}

/// Solves a built program. Moment vectors violating the Hankel condition are
/// reported infeasible without running the solver.
pub fn solve_sdp(prog: &SosProgram, tol: f64, max_iter: usize) -> SdpSolution {
    if !prog.moments.hankel_psd() {
        return SdpSolution {
            status: SdpStatus::Infeasible,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            duality_gap: f64::NAN,
            x: Vec::new(),
            y: Vec::new(),
            iterations: 0,
        };
    }
    sdp::solve(&prog.sdp, tol, max_iter)
}

/// Coefficients `p_0..p_d` of the certificate polynomial read off its Gram
/// matrix.
pub fn certificate_coefficients(prog: &SosProgram, sol: &SdpSolution) -> Vec<f64> {
    let gram = &sol.x[0];
    (0..=prog.d)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..gram.nrows() {
                if k >= i && k - i < gram.ncols() {
                    s += gram[(i, k - i)];
                }
            }
            s
        })
        .collect()
}

/// Result of the SOS bound with solver diagnostics.
#[derive(Debug, Clone)]
pub struct SosOutcome {
    pub bound: RiskBound,
    pub status: SdpStatus,
    pub duality_gap: f64,
    /// Certificate in the normalized variable `g / scale`; empty on fallback.
    pub certificate: Vec<f64>,
    pub scale: f64,
}

/// Degree-`d` SOS bound on `P(x^T Q x <= 1)` with full diagnostics.
pub fn sos_bound_detailed(q: &Ellipsoid, x_moments: &MomentTable, d: usize) -> Result<SosOutcome> {
    let method = Method::Sos(d as u8);
    if !matches!(d, 2 | 4 | 6) {
        return Err(Error::InvalidArgument(format!(
            "SOS degree must be 2, 4 or 6, got {d}"
        )));
    }
    let raw = moments_of_g(q, x_moments, d)?;
    // g vanishes almost surely: the boundary itself, which counts as inside
    if raw.m[2] <= 0.0 {
        return Ok(SosOutcome {
            bound: RiskBound {
                value: 1.0,
                method,
                moments_used: 2 * d,
                fallback: false,
            },
            status: SdpStatus::Optimal,
            duality_gap: 0.0,
            certificate: vec![1.0],
            scale: 1.0,
        });
    }
    let mv = normalize_moments(&raw)?;
    let prog = build_sos_program(&mv)?;
    let sol = solve_sdp(&prog, SDP_TOL, SDP_MAX_ITER);
    if sol.status == SdpStatus::Optimal {
        let certificate = certificate_coefficients(&prog, &sol);
        return Ok(SosOutcome {
            bound: RiskBound {
                value: sol.primal_objective.clamp(0.0, 1.0),
                method,
                moments_used: 2 * d,
                fallback: false,
            },
            status: sol.status,
            duality_gap: sol.duality_gap,
            certificate,
            scale: mv.scale,
        });
    }
    let cheb = cheb_bound_quadratic(q, x_moments)?;
    Ok(SosOutcome {
        bound: RiskBound {
            value: cheb.value,
            method,
            moments_used: 4,
            fallback: true,
        },
        status: sol.status,
        duality_gap: sol.duality_gap,
        certificate: Vec::new(),
        scale: mv.scale,
    })
}

/// Degree-`d` SOS bound on `P(x^T Q x <= 1)`. Falls back to the Chebyshev
/// bound (flagged) when the solver does not certify optimality.
pub fn sos_risk_bound(q: &Ellipsoid, x_moments: &MomentTable, d: usize) -> Result<RiskBound> {
    sos_bound_detailed(q, x_moments, d).map(|o| o.bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Gaussian2D;
    use crate::linalg::Vec2;

    fn id() -> Ellipsoid {
        Ellipsoid::new(Mat2::identity()).unwrap()
    }

    fn std_normal(order: usize) -> MomentTable {
        Gaussian2D::new(Vec2::zeros(), Mat2::identity())
            .unwrap()
            .raw_moments(order)
            .unwrap()
    }

    #[test]
    fn cube_of_radius_squared() {
        // (x^2 + y^2)^3 = x^6 + 3 x^4 y^2 + 3 x^2 y^4 + y^6
        let e = expand_quad_power(&Mat2::identity(), 0.0, 3);
        let expect: BTreeMap<_, _> = [((6, 0), 1.0), ((4, 2), 3.0), ((2, 4), 3.0), ((0, 6), 1.0)]
            .into_iter()
            .collect();
        assert_eq!(e, expect);
    }

    #[test]
    fn moments_of_g_examples() {
        // E[(r - 1)^k] for r ~ chi^2_2 with E[r^k] = 2^k k!:
        // 48 - 3*8 + 3*2 - 1 = 29 (confirmed by quadrature of the density)
        let mv = moments_of_g(&id(), &std_normal(6), 3).unwrap();
        let expect = [1.0, 1.0, 5.0, 29.0];
        for (a, b) in mv.m.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{:?}", mv.m);
        }
        let pm = MomentTable::point_mass(Vec2::zeros(), 8);
        let mv = moments_of_g(&id(), &pm, 4).unwrap();
        assert_eq!(mv.m, vec![1.0, -1.0, 1.0, -1.0, 1.0]);
        let s2 = 0.7;
        let g = Gaussian2D::new(Vec2::zeros(), Mat2::identity() * s2).unwrap();
        let mv = moments_of_g(&id(), &g.raw_moments(6).unwrap(), 3).unwrap();
        assert!((mv.m[1] - (2.0 * s2 - 1.0)).abs() < 1e-15);
        assert!(moments_of_g(&id(), &std_normal(5), 3).is_err());
    }

    #[test]
    fn normalization_examples() {
        let mv = MomentVector::new(vec![1.0, 1.0, 5.0, 37.0]).unwrap();
        let n = normalize_moments(&mv).unwrap();
        let c = 5f64.sqrt();
        assert!((n.scale - c).abs() < 1e-15);
        let expect = [1.0, 1.0 / c, 1.0, 37.0 / 5f64.powf(1.5)];
        for (a, b) in n.m.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let again = normalize_moments(&n).unwrap();
        for (a, b) in again.m.iter().zip(&n.m) {
            assert!((a - b).abs() < 1e-15);
        }
        let det = MomentVector::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let nd = normalize_moments(&det).unwrap();
        assert_eq!((nd.m.clone(), nd.scale), (det.m.clone(), 1.0));
        assert!(normalize_moments(&MomentVector::new(vec![1.0, 0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn program_shapes() {
        for (d, dims) in [(2, [2, 2, 1]), (4, [3, 3, 2]), (6, [4, 4, 3])] {
            let mv = MomentVector::new(vec![1.0; d + 1]).unwrap();
            let p = build_sos_program(&mv).unwrap();
            assert_eq!(p.gram_dims, dims);
            assert_eq!(p.n_constraints(), d + 1);
        }
        assert!(build_sos_program(&MomentVector::new(vec![1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn degree_two_is_cantelli() {
        let mv = normalize_moments(&MomentVector::new(vec![1.0, 1.0, 5.0]).unwrap()).unwrap();
        let prog = build_sos_program(&mv).unwrap();
        let sol = solve_sdp(&prog, SDP_TOL, SDP_MAX_ITER);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 0.8).abs() < 1e-6, "{sol:?}");
    }

    #[test]
    fn jensen_violation_is_infeasible() {
        let mv = MomentVector::new(vec![1.0, 2.0, 1.0]).unwrap();
        let prog = build_sos_program(&mv).unwrap();
        assert_eq!(solve_sdp(&prog, SDP_TOL, SDP_MAX_ITER).status, SdpStatus::Infeasible);
    }

    #[test]
    fn risk_bound_examples() {
        let b2 = sos_risk_bound(&id(), &std_normal(12), 2).unwrap();
        assert!((b2.value - 0.8).abs() < 1e-3);
        let b4 = sos_risk_bound(&id(), &std_normal(12), 4).unwrap();
        let b6 = sos_risk_bound(&id(), &std_normal(12), 6).unwrap();
        assert!(!b6.fallback && !b4.fallback);
        let truth = 1.0 - (-0.5f64).exp();
        assert!(b6.value >= truth && b6.value <= 0.8, "{b6:?}");
        assert!(b6.value <= b4.value + 1e-6 && b4.value <= b2.value + 1e-6);

        let far = MomentTable::point_mass(Vec2::new(10.0, 0.0), 4);
        let b = sos_risk_bound(&id(), &far, 2).unwrap();
        assert!(b.value <= 0.013, "{b:?}");
    }
}
