use super::moment_table::MomentTable;
use super::scalar::{check_weights, pick_mode};
use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, min_eigenvalue, sym2_sqrt, Mat2, Vec2};

/// Highest raw-moment order produced for Gaussian components. Order 12 is
/// what the degree-6 risk-bound program needs for a quadratic constraint.
pub const MAX_GAUSSIAN_ORDER: usize = 12;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian2D {
    mean: Vec2,
    covariance: Mat2,
}

impl Gaussian2D {
    pub fn new(mean: Vec2, covariance: Mat2) -> Result<Self> {
        if !mean.iter().chain(covariance.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidDistribution(
                "non-finite mean or covariance".into(),
            ));
        }
        if !is_symmetric(&covariance, SYMMETRY_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "covariance is not symmetric: {covariance}"
            )));
        }
        let min_eig = min_eigenvalue(&covariance);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Gaussian2D { mean, covariance })
    }

    pub fn point_mass(at: Vec2) -> Self {
        Gaussian2D {
            mean: at,
            covariance: Mat2::zeros(),
        }
    }

    pub fn mean(&self) -> Vec2 {
        self.mean
    }
    pub fn covariance(&self) -> Mat2 {
        self.covariance
    }

    /// Same covariance, shifted mean.
    pub fn translated(&self, offset: Vec2) -> Self {
        Gaussian2D {
            mean: self.mean + offset,
            covariance: self.covariance,
        }
    }

    pub fn raw_moments(&self, max_order: usize) -> Result<MomentTable> {
        gaussian2d_raw_moments(self, max_order)
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        let z = Vec2::new(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        );
        self.mean + sym2_sqrt(&self.covariance) * z
    }
}

/// Every raw moment `E[x^i y^j]`, `i + j <= max_order`, of a bivariate
/// Gaussian.
///
/// Uses Stein's identity on raw moments,
/// `E[X^i Y^j] = mu_x E[X^{i-1} Y^j] + (i-1) S_xx E[X^{i-2} Y^j] + j S_xy E[X^{i-1} Y^{j-1}]`,
/// which is exact and needs no differentiation of the generating function.
pub fn gaussian2d_raw_moments(g: &Gaussian2D, max_order: usize) -> Result<MomentTable> {
    if max_order > MAX_GAUSSIAN_ORDER {
        return Err(Error::OrderLimit {
            requested: max_order,
            limit: MAX_GAUSSIAN_ORDER,
        });
    }
    let (mx, my) = (g.mean.x, g.mean.y);
    let (sxx, sxy, syy) = (
        g.covariance[(0, 0)],
        g.covariance[(0, 1)],
        g.covariance[(1, 1)],
    );
    let n = max_order + 1;
    let mut m = vec![vec![0.0; n]; n];
    m[0][0] = 1.0;
    // pure y column first
    for j in 1..n {
        let prev2 = if j >= 2 { m[0][j - 2] } else { 0.0 };
        m[0][j] = my * m[0][j - 1] + (j - 1) as f64 * syy * prev2;
    }
    for k in 1..n {
        for i in 1..=k {
            let j = k - i;
            let prev2 = if i >= 2 { m[i - 2][j] } else { 0.0 };
            let cross = if j >= 1 { m[i - 1][j - 1] } else { 0.0 };
            m[i][j] = mx * m[i - 1][j] + (i - 1) as f64 * sxx * prev2 + j as f64 * sxy * cross;
        }
    }
    Ok(MomentTable::from_fn(max_order, |i, j| m[i][j]))
}

/// Finite mixture of bivariate Gaussians (one predicted position step).
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian2DMixture {
    components: Vec<Gaussian2D>,
    weights: Vec<f64>,
}

impl Gaussian2DMixture {
    pub fn new(components: Vec<Gaussian2D>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, components.len())?;
        Ok(Gaussian2DMixture {
            components,
            weights,
        })
    }

    pub fn single(component: Gaussian2D) -> Self {
        Gaussian2DMixture {
            components: vec![component],
            weights: vec![1.0],
        }
    }

    pub fn components(&self) -> &[Gaussian2D] {
        &self.components
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn modes(&self) -> impl Iterator<Item = (f64, &Gaussian2D)> {
        self.weights.iter().copied().zip(&self.components)
    }

    /// Mixture raw moments: weighted sum of component tables.
    pub fn raw_moments(&self, max_order: usize) -> Result<MomentTable> {
        let tables = self
            .components
            .iter()
            .map(|c| gaussian2d_raw_moments(c, max_order))
            .collect::<Result<Vec<_>>>()?;
        let weighted: Vec<(f64, &MomentTable)> = self.weights.iter().copied().zip(&tables).collect();
        MomentTable::mix(&weighted)
    }

    /// `E[x^i y^j]` of the mixture.
    pub fn moment(&self, i: usize, j: usize) -> Result<f64> {
        let mut acc = 0.0;
        for (w, c) in self.modes() {
            acc += w * gaussian2d_raw_moments(c, i + j)?.get(i, j);
        }
        Ok(acc)
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        let k = pick_mode(&self.weights, rng);
        self.components[k].sample(rng)
    }
}
