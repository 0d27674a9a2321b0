//! Scalar and bivariate distributions with their raw moments and
//! characteristic functions.
//!
//! Mixtures reduce every quantity to their components: both raw moments and
//! characteristic functions of a mixture are the weight-weighted sums of the
//! component values. Trigonometric moments `E[cos^m X sin^n X]` are assembled
//! from the characteristic function at integer arguments.

mod bivariate;
mod moment_table;
mod scalar;

pub use bivariate::{gaussian2d_raw_moments, Gaussian2D, Gaussian2DMixture, MAX_GAUSSIAN_ORDER};
pub use moment_table::MomentTable;
pub use scalar::{
    char_fn_sum, ComponentKind, IndependentSum, ScalarComponent, ScalarMixture, WEIGHT_SUM_TOL,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::binomial;

/// Anything with a closed-form characteristic function `phi(t) = E[e^{itX}]`.
pub trait CharFn {
    fn char_fn(&self, t: f64) -> Complex64;
}

impl<T: CharFn + ?Sized> CharFn for &T {
    fn char_fn(&self, t: f64) -> Complex64 {
        (**self).char_fn(t)
    }
}

/// Free-function form of [`CharFn::char_fn`].
pub fn char_fn<D: CharFn + ?Sized>(dist: &D, t: f64) -> Complex64 {
    dist.char_fn(t)
}

/// Largest imaginary residual tolerated when assembling a trigonometric
/// moment. The exact value is real.
pub const TRIG_IMAG_TOL: f64 = 1e-10;

/// `E[cos^m(X) sin^n(X)]` through the characteristic function of `X`.
///
/// Substitutes `cos X = (e^{iX} + e^{-iX})/2` and
/// `sin X = (e^{iX} - e^{-iX})/(2i)`, expands both binomials and evaluates
/// `phi` at the integer frequencies `-(m+n)..=(m+n)`.
pub fn trig_moment<D: CharFn + ?Sized>(dist: &D, m: usize, n: usize) -> Result<f64> {
    if m + n == 0 {
        return Ok(1.0);
    }
    let top = (m + n) as i64;
    // coefficient of e^{ikX} collected per frequency k
    let mut coeff = vec![0.0f64; (2 * top + 1) as usize];
    for a in 0..=m {
        let ca = binomial(m, a);
        for b in 0..=n {
            let sign = if (n - b).is_multiple_of(2) { 1.0 } else { -1.0 };
            let k = (2 * a) as i64 - m as i64 + (2 * b) as i64 - n as i64;
            coeff[(k + top) as usize] += ca * binomial(n, b) * sign;
        }
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (idx, c) in coeff.iter().enumerate() {
        if *c != 0.0 {
            sum += *c * dist.char_fn((idx as i64 - top) as f64);
        }
    }
    // divide by i^n 2^{m+n}
    let i_pow = match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let value = sum / (i_pow * 2f64.powi((m + n) as i32));
    if value.im.abs() > TRIG_IMAG_TOL {
        return Err(Error::ImaginaryResidual {
            residual: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// `E[X^n]` of a scalar mixture.
pub fn mixture_moment(dist: &ScalarMixture, n: usize) -> f64 {
    dist.moment(n)
}

/// `E[x^i y^j]` of a bivariate Gaussian mixture.
pub fn mixture_moment_2d(dist: &Gaussian2DMixture, i: usize, j: usize) -> Result<f64> {
    dist.moment(i, j)
}
