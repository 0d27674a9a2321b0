use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CharFn;
use crate::error::{Error, Result};

/// Weight-sum tolerance shared by every mixture type.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Gaussian,
    PointMass,
}

/// A scalar Gaussian, or a point mass (a Gaussian with zero variance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarComponent {
    kind: ComponentKind,
    mean: f64,
    variance: f64,
}

impl ScalarComponent {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "gaussian needs finite mean and variance >= 0, got ({mean}, {variance})"
            )));
        }
        Ok(ScalarComponent {
            kind: if variance == 0.0 {
                ComponentKind::PointMass
            } else {
                ComponentKind::Gaussian
            },
            mean,
            variance,
        })
    }

    pub fn point_mass(at: f64) -> Self {
        ScalarComponent {
            kind: ComponentKind::PointMass,
            mean: at,
            variance: 0.0,
        }
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Raw moments `E[X^k]` for `k = 0..=order`.
    pub fn raw_moments(&self, order: usize) -> Vec<f64> {
        // E[X^k] = mu E[X^{k-1}] + (k-1) s2 E[X^{k-2}]
        let mut m = Vec::with_capacity(order + 1);
        m.push(1.0);
        if order >= 1 {
            m.push(self.mean);
        }
        for k in 2..=order {
            let v = self.mean * m[k - 1] + (k - 1) as f64 * self.variance * m[k - 2];
            m.push(v);
        }
        m
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.variance == 0.0 {
            return self.mean;
        }
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        self.mean + self.variance.sqrt() * z
    }
}

impl CharFn for ScalarComponent {
    fn char_fn(&self, t: f64) -> Complex64 {
        Complex64::from_polar((-0.5 * self.variance * t * t).exp(), self.mean * t)
    }
}

/// Finite mixture of scalar components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarMixture {
    components: Vec<ScalarComponent>,
    weights: Vec<f64>,
}

pub(crate) fn check_weights(weights: &[f64], n_components: usize) -> Result<()> {
    if n_components == 0 {
        return Err(Error::InvalidDistribution(
            "mixture needs at least one component".into(),
        ));
    }
    if weights.len() != n_components {
        return Err(Error::InvalidDistribution(format!(
            "{} weights for {} components",
            weights.len(),
            n_components
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "mixture weight {w} is negative or not finite"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "mixture weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

impl ScalarMixture {
    pub fn new(components: Vec<ScalarComponent>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, components.len())?;
        Ok(ScalarMixture {
            components,
            weights,
        })
    }

    pub fn single(component: ScalarComponent) -> Self {
        ScalarMixture {
            components: vec![component],
            weights: vec![1.0],
        }
    }

    pub fn components(&self) -> &[ScalarComponent] {
        &self.components
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[X^n]` as the weighted sum of component moments.
    pub fn moment(&self, n: usize) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.raw_moments(n)[n])
            .sum()
    }

    /// `E[X^k]` for `k = 0..=order`.
    pub fn raw_moments(&self, order: usize) -> Vec<f64> {
        let mut acc = vec![0.0; order + 1];
        for (c, w) in self.components.iter().zip(&self.weights) {
            for (a, m) in acc.iter_mut().zip(c.raw_moments(order)) {
                *a += w * m;
            }
        }
        acc
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = pick_mode(&self.weights, rng);
        self.components[k].sample(rng)
    }
}

impl CharFn for ScalarMixture {
    fn char_fn(&self, t: f64) -> Complex64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| *w * c.char_fn(t))
            .sum()
    }
}

/// Draws a mode index from categorical weights with one uniform variate.
pub(crate) fn pick_mode<R: rand::Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}

/// `X = c + sum_i Y_i` for mutually independent parts.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSum<D> {
    pub parts: Vec<D>,
    pub constant: f64,
}

impl<D: CharFn> CharFn for IndependentSum<D> {
    fn char_fn(&self, t: f64) -> Complex64 {
        char_fn_sum(&self.parts, self.constant, t)
    }
}

/// Characteristic function of `c + sum_i Y_i` for independent `Y_i`:
/// `e^{itc} prod_i phi_i(t)`.
pub fn char_fn_sum<D: CharFn>(parts: &[D], constant: f64, t: f64) -> Complex64 {
    parts
        .iter()
        .fold(Complex64::from_polar(1.0, t * constant), |acc, p| {
            acc * p.char_fn(t)
        })
}
