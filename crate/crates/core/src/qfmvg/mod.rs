//! CDF of a quadratic form `x^T Q x` in a bivariate Gaussian `x`.
//!
//! Every problem is first reduced to a weighted sum of independent
//! noncentral chi-squares, `sum_r lambda_r chi^2_1(delta_r^2)`, against a
//! shifted threshold. Two evaluators sit on top of that form: Imhof's
//! inversion of the characteristic function (error-controlled) and the
//! Liu-Tang-Zhang noncentral chi-square surrogate (fast, approximate).

mod imhof;
mod ltz;
mod ncx2;

pub use imhof::imhof_cdf;
pub use ltz::ltz_cdf;
pub use ncx2::noncentral_chi2_cdf;

use serde::{Deserialize, Serialize};

use crate::distributions::Gaussian2D;
use crate::error::{Error, Result};
use crate::frames::Ellipsoid;
use crate::linalg::{sym2_eigen, sym2_sqrt, Mat2, Vec2};

/// Default tolerance when Imhof serves as ground truth.
pub const GROUND_TRUTH_TOL: f64 = 1e-10;

/// Covariance eigenvalues below this are treated as round-off.
const PSD_REJECT_TOL: f64 = 1e-9;
/// Form eigenvalues below this fraction of the largest are dropped.
const RANK_TOL: f64 = 1e-12;

/// `P(sum_r lambda_r chi^2_1(delta_r^2) <= threshold)` in reduced form.
///
/// Zero eigenvalues have been removed, so `eigenvalues` may hold fewer than
/// two entries; an empty form is the constant 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralForm {
    pub eigenvalues: Vec<f64>,
    pub noncentralities: Vec<f64>,
    pub threshold: f64,
}

impl SpectralForm {
    pub fn new(eigenvalues: Vec<f64>, noncentralities: Vec<f64>, threshold: f64) -> Result<Self> {
        if eigenvalues.len() != noncentralities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} eigenvalues but {} noncentralities",
                eigenvalues.len(),
                noncentralities.len()
            )));
        }
        if eigenvalues.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "form eigenvalues must be finite and positive: {eigenvalues:?}"
            )));
        }
        if noncentralities.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noncentralities must be finite and >= 0: {noncentralities:?}"
            )));
        }
        if threshold.is_nan() {
            return Err(Error::InvalidArgument("threshold is NaN".into()));
        }
        let mut pairs: Vec<(f64, f64)> = eigenvalues.into_iter().zip(noncentralities).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (eigenvalues, noncentralities) = pairs.into_iter().unzip();
        Ok(SpectralForm {
            eigenvalues,
            noncentralities,
            threshold,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Exact value of a constant (zero-rank) form.
    pub fn constant_cdf(&self) -> f64 {
        if self.threshold >= 0.0 {
            1.0
        } else {
            0.0
        }
    }

    /// Cumulant-like sums `c_k = sum lambda^k (1 + k delta^2)`.
    pub(crate) fn power_sum(&self, k: i32) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.noncentralities)
            .map(|(l, d)| l.powi(k) * (1.0 + k as f64 * d))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfMethod {
    Imhof,
    Ltz,
    /// Point-mass input, evaluated as an indicator.
    Exact,
}

/// Which Liu-Tang-Zhang case produced the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LtzBranch {
    /// `s1^2 > s2`: noncentral surrogate.
    Noncentral,
    /// `s1^2 <= s2`: central surrogate.
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfResult {
    pub probability: f64,
    /// Absolute error bound (Imhof and exact evaluations only).
    pub error_bound: Option<f64>,
    pub method: CdfMethod,
    pub ltz_branch: Option<LtzBranch>,
}

impl CdfResult {
    pub(crate) fn exact(probability: f64) -> Self {
        CdfResult {
            probability,
            error_bound: Some(0.0),
            method: CdfMethod::Exact,
            ltz_branch: None,
        }
    }
}

/// Reduces `P(x^T Q x <= q)`, `x ~ N(mu, sigma)`, to a [`SpectralForm`].
///
/// With `S = sigma^{1/2}` and `S Q S = P diag(lambda) P^T`,
/// `x^T Q x = sum_r lambda_r (w_r + b_r / lambda_r)^2 + d` for standard
/// normal `w`, `b = P^T S Q mu` and the constant
/// `d = mu^T Q mu - sum_r b_r^2 / lambda_r`, which moves into the threshold.
pub fn spectral_reduce(q: &Ellipsoid, mu: Vec2, sigma: Mat2, threshold: f64) -> Result<SpectralForm> {
    let (cov_vals, _) = sym2_eigen(&sigma);
    if cov_vals[1] < -PSD_REJECT_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: cov_vals[1],
        });
    }
    let qm = q.matrix();
    let s = sym2_sqrt(&sigma);
    let a = s * qm * s;
    let (vals, vecs) = sym2_eigen(&a);
    let b = vecs.transpose() * (s * (qm * mu));

    let scale = vals[0].max(0.0);
    let mut lambdas = Vec::with_capacity(2);
    let mut deltas = Vec::with_capacity(2);
    let mut offset = mu.dot(&(qm * mu));
    for r in 0..2 {
        if scale > 0.0 && vals[r] > RANK_TOL * scale {
            lambdas.push(vals[r]);
            deltas.push(b[r] * b[r] / (vals[r] * vals[r]));
            offset -= b[r] * b[r] / vals[r];
        }
    }
    // a repeated eigenvalue leaves the eigenbasis arbitrary; only the total
    // noncentrality is meaningful, so pin it to the first axis
    if lambdas.len() == 2 && (lambdas[0] - lambdas[1]).abs() <= 1e-14 * lambdas[0] {
        deltas[0] += deltas[1];
        deltas[1] = 0.0;
    }
    SpectralForm::new(lambdas, deltas, threshold - offset)
}

/// CDF evaluator selection for [`quad_form_cdf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QfMethod {
    Imhof { tol: f64 },
    Ltz,
}

/// `P(x^T Q x <= threshold)` for one Gaussian component. Point masses
/// bypass both evaluators and return the exact indicator.
pub fn quad_form_cdf(
    q: &Ellipsoid,
    g: &Gaussian2D,
    threshold: f64,
    method: QfMethod,
) -> Result<CdfResult> {
    if g.covariance() == Mat2::zeros() {
        let inside = q.form(&g.mean()) <= threshold;
        return Ok(CdfResult::exact(if inside { 1.0 } else { 0.0 }));
    }
    let form = spectral_reduce(q, g.mean(), g.covariance(), threshold)?;
    if form.is_constant() {
        return Ok(CdfResult::exact(form.constant_cdf()));
    }
    match method {
        QfMethod::Imhof { tol } => imhof_cdf(&form, tol),
        QfMethod::Ltz => ltz_cdf(&form),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn spectral_reduce_examples() {
        let id = Ellipsoid::new(Mat2::identity()).unwrap();
        let f = spectral_reduce(&id, Vec2::zeros(), Mat2::identity(), 1.0).unwrap();
        assert!(close(&f.eigenvalues, &[1.0, 1.0], 1e-15));
        assert!(close(&f.noncentralities, &[0.0, 0.0], 1e-15));
        assert_eq!(f.threshold, 1.0);

        let d41 = Ellipsoid::new(Mat2::new(4.0, 0.0, 0.0, 1.0)).unwrap();
        let f = spectral_reduce(&d41, Vec2::zeros(), Mat2::identity(), 1.0).unwrap();
        assert!(close(&f.eigenvalues, &[4.0, 1.0], 1e-15));
        assert!(close(&f.noncentralities, &[0.0, 0.0], 1e-15));

        let f = spectral_reduce(&id, Vec2::new(1.0, 0.0), Mat2::identity(), 1.0).unwrap();
        assert!(close(&f.eigenvalues, &[1.0, 1.0], 1e-15));
        assert!(close(&f.noncentralities, &[1.0, 0.0], 1e-15));
        assert!(f.threshold.abs() - 1.0 < 1e-15);
    }

    #[test]
    fn rank_one_covariance_moves_mass_into_offset() {
        // x = (1 + z, 2): form = (1+z)^2 + 4, threshold 5 -> P(chi^2_1(1) <= 1)
        let id = Ellipsoid::new(Mat2::identity()).unwrap();
        let f = spectral_reduce(&id, Vec2::new(1.0, 2.0), Mat2::new(1.0, 0.0, 0.0, 0.0), 5.0)
            .unwrap();
        assert_eq!(f.eigenvalues.len(), 1);
        assert!((f.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((f.noncentralities[0] - 1.0).abs() < 1e-15);
        assert!((f.threshold - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_psd_covariance() {
        let id = Ellipsoid::new(Mat2::identity()).unwrap();
        let r = spectral_reduce(&id, Vec2::zeros(), Mat2::new(1.0, 2.0, 2.0, 1.0), 1.0);
        assert!(matches!(r, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn point_mass_is_an_indicator() {
        let id = Ellipsoid::new(Mat2::identity()).unwrap();
        let inside = Gaussian2D::point_mass(Vec2::new(0.5, 0.5));
        let outside = Gaussian2D::point_mass(Vec2::new(1.0, 0.5));
        for m in [QfMethod::Ltz, QfMethod::Imhof { tol: 1e-8 }] {
            let a = quad_form_cdf(&id, &inside, 1.0, m).unwrap();
            assert_eq!((a.probability, a.method), (1.0, CdfMethod::Exact));
            assert_eq!(quad_form_cdf(&id, &outside, 1.0, m).unwrap().probability, 0.0);
        }
    }
}
