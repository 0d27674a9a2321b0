//! Small fixed-size helpers for the 2×2 symmetric matrices that show up
//! everywhere in the planar setting.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Closed-form eigen-decomposition of a symmetric 2×2 matrix.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors (as columns of the returned matrix). Only the upper triangle
/// is read.
pub fn sym2_eigen(m: &Mat2) -> ([f64; 2], Mat2) {
    let a = m[(0, 0)];
    let b = m[(0, 1)];
    let d = m[(1, 1)];
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let r = half_diff.hypot(b);
    let l1 = half_tr + r;
    let l2 = half_tr - r;
    if b == 0.0 {
        // already diagonal; keep the axis ordering matching the eigenvalues
        return if a >= d {
            ([a, d], Mat2::identity())
        } else {
            ([d, a], Mat2::new(0.0, 1.0, 1.0, 0.0))
        };
    }
    // angle of the leading eigenvector
    let phi = 0.5 * b.atan2(half_diff);
    let (s, c) = phi.sin_cos();
    (
        [l1, l2],
        Mat2::new(c, -s, s, c), // columns (c, s) and (-s, c)
    )
}

/// Planar rotation matrix.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, -s, s, c)
}

pub fn is_symmetric(m: &Mat2, tol: f64) -> bool {
    (m[(0, 1)] - m[(1, 0)]).abs() <= tol
}

/// Minimum eigenvalue of the symmetric part.
pub fn min_eigenvalue(m: &Mat2) -> f64 {
    sym2_eigen(&symmetrize(m)).0[1]
}

pub fn symmetrize(m: &Mat2) -> Mat2 {
    0.5 * (m + m.transpose())
}

/// Symmetric square root of a PSD matrix (negative round-off eigenvalues are
/// clamped to zero).
pub fn sym2_sqrt(m: &Mat2) -> Mat2 {
    let (vals, vecs) = sym2_eigen(m);
    let d = Mat2::new(vals[0].max(0.0).sqrt(), 0.0, 0.0, vals[1].max(0.0).sqrt());
    vecs * d * vecs.transpose()
}
