//! Imhof's inversion formula
//! `P(Q <= q) = 1/2 - (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du`.
//!
//! The integral is split at a point `A`. On `[0, A]` an adaptive
//! Gauss-Kronrod rule runs over panels about half an oscillation wide. The
//! tail `[A, inf)` is summed in closed form by two integrations by parts,
//! using that `theta'` tends to `-q/2` and so never vanishes past `A`:
//!
//! `int_A^inf a sin(theta) = a cos(theta)/theta' - b sin(theta)/theta' - R`,
//! with `a = 1/(u rho)`, `b = (a/theta')'` and `|R| <= |b/theta'|` at `A`.
//! The remainder is bounded by the total variation of `b/theta'`, which
//! decays monotonically once `theta'` has settled; a safety factor of two
//! is applied on top.
//!
//! Imhof's own truncation bound decays only like `U^{-r/2}`, which for
//! tight tolerances calls for billions of oscillations. The summed tail
//! decays like `U^{-2-r/2}` and keeps `A` modest.

use super::{CdfMethod, CdfResult, SpectralForm};
use crate::error::{Error, Result};
use std::f64::consts::PI;

const MAX_TOL: f64 = 0.1;
const MAX_SPLIT_POINT: f64 = 1e9;
const MAX_PANELS: usize = 2_000_000;
const MAX_BISECTIONS: usize = 40;
const TAIL_SAFETY: f64 = 2.0;

// Gauss-Kronrod 7-15 abscissae (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7-point weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Eigenvalues and threshold rescaled so the largest eigenvalue is 1.
struct Integrand<'a> {
    lam: Vec<f64>,
    nc: &'a [f64],
    q: f64,
}

struct Derivs {
    theta: f64,
    theta_p: f64,
    theta_pp: f64,
    /// `ln rho`
    log_rho: f64,
    log_rho_p: f64,
}

impl Integrand<'_> {
    fn theta_rho(&self, u: f64) -> (f64, f64) {
        let mut theta = -0.5 * self.q * u;
        let mut log_rho = 0.0;
        for (l, d) in self.lam.iter().zip(self.nc) {
            let lu = l * u;
            let w = lu * lu;
            theta += 0.5 * (lu.atan() + d * lu / (1.0 + w));
            log_rho += 0.25 * w.ln_1p() + 0.5 * d * w / (1.0 + w);
        }
        (theta, log_rho)
    }

    fn eval(&self, u: f64) -> f64 {
        let (theta, log_rho) = self.theta_rho(u);
        theta.sin() / (u * log_rho.exp())
    }

    fn derivs(&self, u: f64) -> Derivs {
        let (theta, log_rho) = self.theta_rho(u);
        let mut theta_p = -0.5 * self.q;
        let mut theta_pp = 0.0;
        let mut log_rho_p = 0.0;
        for (l, d) in self.lam.iter().zip(self.nc) {
            let w = l * l * u * u;
            let opw = 1.0 + w;
            theta_p += 0.5 * (l / opw + d * l * (1.0 - w) / (opw * opw));
            theta_pp += 0.5
                * (-2.0 * l * l * l * u / (opw * opw)
                    + d * l * 2.0 * l * l * u * (w - 3.0) / (opw * opw * opw));
            log_rho_p += 0.5 * l * l * u / opw + d * l * l * u / (opw * opw);
        }
        Derivs {
            theta,
            theta_p,
            theta_pp,
            log_rho,
            log_rho_p,
        }
    }

    /// Closed-form tail `int_A^inf sin(theta)/(u rho)` and its error bound.
    fn tail(&self, a_pt: f64) -> (f64, f64) {
        let dv = self.derivs(a_pt);
        let amp = 1.0 / (a_pt * dv.log_rho.exp());
        let amp_p = amp * (-1.0 / a_pt - dv.log_rho_p);
        let tp = dv.theta_p;
        let b = amp_p / tp - amp * dv.theta_pp / (tp * tp);
        let value = amp * dv.theta.cos() / tp - b * dv.theta.sin() / tp;
        (value, TAIL_SAFETY * (b / tp).abs())
    }
}

/// Gauss-Kronrod estimate on `[lo, hi]`: (Kronrod value, |K - G|, sum |w f|).
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = (WGK[7] * fc).abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Adaptive bisection of one panel. Returns (value, error estimate).
fn adapt<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: usize) -> Result<(f64, f64)> {
    let (k, err, abs) = gk15(f, lo, hi);
    // below this the difference is round-off, not truncation
    let floor = 50.0 * f64::EPSILON * abs;
    if err <= tol.max(floor) {
        return Ok((k, err));
    }
    if depth >= MAX_BISECTIONS {
        return Err(Error::NonConvergence { estimate: err });
    }
    let mid = 0.5 * (lo + hi);
    let (v1, e1) = adapt(f, lo, mid, 0.5 * tol, depth + 1)?;
    let (v2, e2) = adapt(f, mid, hi, 0.5 * tol, depth + 1)?;
    Ok((v1 + v2, e1 + e2))
}

/// `P(sum lambda_r chi^2_1(delta_r^2) <= q)` to within `tol`.
pub fn imhof_cdf(form: &SpectralForm, tol: f64) -> Result<CdfResult> {
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, {MAX_TOL}], got {tol}"
        )));
    }
    if form.is_constant() {
        return Ok(CdfResult::exact(form.constant_cdf()));
    }
    // every weight is positive, so the form is a.s. > 0
    if form.threshold <= 0.0 {
        return Ok(CdfResult::exact(0.0));
    }
    let lmax = form.eigenvalues[0];
    let f = Integrand {
        lam: form.eigenvalues.iter().map(|l| l / lmax).collect(),
        nc: &form.noncentralities,
        q: form.threshold / lmax,
    };

    // Past A0 the slope |theta'| stays above q/4.
    let spread: f64 = f
        .lam
        .iter()
        .zip(f.nc)
        .map(|(l, d)| (1.0 + d) / l)
        .sum();
    let mut split = (2.0 * spread / f.q).sqrt().max(1.0);
    let budget = PI * tol / 4.0;
    let (tail, tail_err) = loop {
        let (t, e) = f.tail(split);
        if e <= budget {
            break (t, e);
        }
        split *= 2.0;
        if split > MAX_SPLIT_POINT {
            return Err(Error::NonConvergence { estimate: e / PI });
        }
    };

    // panels of roughly half the fastest oscillation period;
    // |theta'| <= sum lambda (1 + delta^2) / 2 + q / 2
    let omega = 0.5 * f.lam.iter().zip(f.nc).map(|(l, d)| l * (1.0 + d)).sum::<f64>() + 0.5 * f.q;
    let width = PI / omega;
    let n_panels = (split / width).ceil().max(1.0) as usize;
    if n_panels > MAX_PANELS {
        return Err(Error::NonConvergence { estimate: tail_err / PI });
    }
    let h = split / n_panels as f64;
    let panel_tol = budget / n_panels as f64;
    let eval = |u: f64| f.eval(u);
    let mut integral = 0.0;
    let mut quad_err = 0.0;
    for i in 0..n_panels {
        let (v, e) = adapt(&eval, i as f64 * h, (i + 1) as f64 * h, panel_tol, 0)?;
        integral += v;
        quad_err += e;
    }

    let p = 0.5 - (integral + tail) / PI;
    Ok(CdfResult {
        probability: p.clamp(0.0, 1.0),
        error_bound: Some((quad_err + tail_err) / PI),
        method: CdfMethod::Imhof,
        ltz_branch: None,
    })
}
