//! Numerical evaluation of a moment recursion over a horizon.

use super::dynamics::MomentDynamics;
use super::poly::MultiIndex;
use crate::distributions::MomentTable;
use crate::error::{Error, Result};

/// Supplies known moments at each step.
pub trait BaseMoments {
    /// `E[b_t^alpha]` for a moment involving only known variables.
    fn base_moment(&self, t: usize, alpha: &MultiIndex) -> Result<f64>;
}

/// Values of the tracked moments at one time step, aligned with
/// [`MomentDynamics::tracked`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub values: Vec<f64>,
}

impl MomentState {
    pub fn from_fn(dyn_: &MomentDynamics, f: impl Fn(&MultiIndex) -> f64) -> Self {
        MomentState {
            values: dyn_.tracked().iter().map(f).collect(),
        }
    }

    /// Every tracked moment evaluated at a deterministic point.
    pub fn point(dyn_: &MomentDynamics, at: &[f64]) -> Self {
        Self::from_fn(dyn_, |m| m.eval(at))
    }

    /// Value of a tracked moment; the empty index is 1.
    pub fn get(&self, dyn_: &MomentDynamics, alpha: &MultiIndex) -> Option<f64> {
        if alpha.is_one() {
            return Some(1.0);
        }
        dyn_.index_of(alpha).map(|i| self.values[i])
    }

    /// Raw position moments `E[x^i y^j]`, `i + j <= order`.
    pub fn position_table(&self, dyn_: &MomentDynamics, order: usize) -> Result<MomentTable> {
        let (x, y) = (dyn_.var("x")?, dyn_.var("y")?);
        let mut missing = None;
        let table = MomentTable::from_fn(order, |i, j| {
            let m = MultiIndex::from_pairs([(x, i as u32), (y, j as u32)]);
            self.get(dyn_, &m).unwrap_or_else(|| {
                missing.get_or_insert(i + j);
                f64::NAN
            })
        });
        match missing {
            Some(_) => Err(Error::InsufficientOrder {
                requested: order,
                available: (0..=order)
                    .take_while(|n| {
                        (0..=*n).all(|a| {
                            let m = MultiIndex::from_pairs([(x, a as u32), (y, (*n - a) as u32)]);
                            self.get(dyn_, &m).is_some()
                        })
                    })
                    .last()
                    .unwrap_or(0),
            }),
            None => Ok(table),
        }
    }
}

/// States `0..=horizon`: state `t + 1` is every expression evaluated on
/// state `t` and the step-`t` known moments.
pub fn propagate(
    dyn_: &MomentDynamics,
    init: &MomentState,
    base: &dyn BaseMoments,
    horizon: usize,
) -> Result<Vec<MomentState>> {
    if init.values.len() != dyn_.len() {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} values for {} tracked moments",
            init.values.len(),
            dyn_.len()
        )));
    }
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(init.clone());
    let mut base_vals = vec![0.0; dyn_.base_moments().len()];
    for t in 0..horizon {
        for (slot, m) in base_vals.iter_mut().zip(dyn_.base_moments()) {
            *slot = base.base_moment(t, m)?;
        }
        let cur = &out[t].values;
        let next: Vec<f64> = dyn_
            .expressions()
            .iter()
            .map(|e| e.eval(cur, &base_vals))
            .collect();
        out.push(MomentState { values: next });
    }
    Ok(out)
}
