use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};

/// Raw bivariate moments `E[x^i y^j]` for every `i + j <= max_order`.
///
/// Stored densely in graded order: all indices of total degree `k` sit
/// contiguously, ordered by the power of `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    max_order: usize,
    values: Vec<f64>,
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    let k = i + j;
    k * (k + 1) / 2 + j
}

impl MomentTable {
    /// Builds a table from a moment oracle `f(i, j) = E[x^i y^j]`.
    pub fn from_fn(max_order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; slot(0, max_order) + 1];
        for k in 0..=max_order {
            for j in 0..=k {
                values[slot(k - j, j)] = f(k - j, j);
            }
        }
        MomentTable { max_order, values }
    }

    /// Moments of the deterministic point `p`.
    pub fn point_mass(p: Vec2, max_order: usize) -> Self {
        Self::from_fn(max_order, |i, j| p.x.powi(i as i32) * p.y.powi(j as i32))
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `E[x^i y^j]`. Panics when `i + j` exceeds the stored order; use
    /// [`MomentTable::try_get`] for a checked lookup.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(
            i + j <= self.max_order,
            "moment ({i},{j}) outside table of order {}",
            self.max_order
        );
        self.values[slot(i, j)]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<f64> {
        if i + j > self.max_order {
            return Err(Error::InsufficientOrder {
                requested: i + j,
                available: self.max_order,
            });
        }
        Ok(self.values[slot(i, j)])
    }

    /// Errors unless the table carries every moment up to `order`.
    pub fn require_order(&self, order: usize) -> Result<()> {
        if self.max_order < order {
            Err(Error::InsufficientOrder {
                requested: order,
                available: self.max_order,
            })
        } else {
            Ok(())
        }
    }

    /// Iterates `((i, j), value)` in graded order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        (0..=self.max_order)
            .flat_map(|k| (0..=k).map(move |j| (k - j, j)))
            .map(|(i, j)| ((i, j), self.values[slot(i, j)]))
    }

    /// The same moments restricted to a lower order.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        self.require_order(order)?;
        Ok(Self::from_fn(order, |i, j| self.get(i, j)))
    }

    pub fn mean(&self) -> Result<Vec2> {
        self.require_order(1)?;
        Ok(Vec2::new(self.get(1, 0), self.get(0, 1)))
    }

    /// Covariance derived from the raw second moments.
    pub fn covariance(&self) -> Result<Mat2> {
        self.require_order(2)?;
        let m = self.mean()?;
        let sxx = self.get(2, 0) - m.x * m.x;
        let syy = self.get(0, 2) - m.y * m.y;
        let sxy = self.get(1, 1) - m.x * m.y;
        Ok(Mat2::new(sxx, sxy, sxy, syy))
    }

    /// Central moment `E[(x - mx)^i (y - my)^j]`, derived on demand.
    pub fn central(&self, i: usize, j: usize) -> Result<f64> {
        self.require_order(i + j)?;
        let m = self.mean().unwrap_or_else(|_| Vec2::zeros());
        let mut acc = 0.0;
        for a in 0..=i {
            for b in 0..=j {
                acc += crate::math::binomial(i, a)
                    * crate::math::binomial(j, b)
                    * (-m.x).powi((i - a) as i32)
                    * (-m.y).powi((j - b) as i32)
                    * self.get(a, b);
            }
        }
        Ok(acc)
    }

    /// Weighted combination `sum_k w_k T_k` of tables (mixture moments).
    /// The result carries the smallest order among the inputs.
    pub fn mix(weighted: &[(f64, &MomentTable)]) -> Result<Self> {
        let order = weighted
            .iter()
            .map(|(_, t)| t.max_order)
            .min()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        Ok(Self::from_fn(order, |i, j| {
            weighted.iter().map(|(w, t)| w * t.get(i, j)).sum()
        }))
    }

    /// Checks the structural invariants of a valid moment table within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if (self.get(0, 0) - 1.0).abs() > tol {
            return bad(format!("zero-order moment is {}", self.get(0, 0)));
        }
        for ((i, j), v) in self.iter() {
            if !v.is_finite() {
                return bad(format!("moment ({i},{j}) is not finite"));
            }
            let even_pure = (i % 2 == 0 && j == 0) || (j % 2 == 0 && i == 0);
            if even_pure && v < -tol * v.abs().max(1.0) {
                return bad(format!("even moment ({i},{j}) is negative: {v}"));
            }
        }
        if self.max_order >= 2 {
            let scale = self.get(2, 0).abs().max(1.0);
            if self.get(2, 0) - self.get(1, 0).powi(2) < -tol * scale {
                return bad("E[x^2] < E[x]^2".into());
            }
            let scale = self.get(0, 2).abs().max(1.0);
            if self.get(0, 2) - self.get(0, 1).powi(2) < -tol * scale {
                return bad("E[y^2] < E[y]^2".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_round_trips_every_index() {
        let t = MomentTable::from_fn(6, |i, j| (10 * i + j) as f64);
        for ((i, j), v) in t.iter() {
            assert_eq!(v, (10 * i + j) as f64);
            assert_eq!(t.get(i, j), v);
        }
        assert_eq!(t.iter().count(), 28);
    }

    #[test]
    fn insufficient_order_is_reported() {
        let t = MomentTable::point_mass(Vec2::new(1.0, 2.0), 2);
        assert!(matches!(
            t.try_get(2, 1),
            Err(Error::InsufficientOrder {
                requested: 3,
                available: 2
            })
        ));
        assert!(t.truncate(3).is_err());
    }

    #[test]
    fn central_moments_of_point_mass_vanish() {
        let t = MomentTable::point_mass(Vec2::new(3.0, -4.0), 4);
        assert!((t.central(2, 0).unwrap()).abs() < 1e-12);
        assert!((t.central(1, 1).unwrap()).abs() < 1e-12);
        assert_eq!(t.central(0, 0).unwrap(), 1.0);
        t.validate(1e-12).unwrap();
    }

    #[test]
    fn validation_rejects_jensen_violation() {
        let t = MomentTable::from_fn(2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 0) => 2.0,
            (2, 0) => 1.0,
            _ => 0.0,
        });
        assert!(t.validate(1e-12).is_err());
    }
}
