//! Dense primal-dual interior-point solver for small block-diagonal SDPs
//!
//! ```text
//! min <C, X>  s.t.  <A_k, X> = b_k,  X >= 0
//! max b^T y   s.t.  C - sum_k y_k A_k = Z >= 0
//! ```
//!
//! Infeasible-start path following with the HKM search direction and a
//! Mehrotra predictor-corrector step. Blocks are tiny (at most 4×4 for the
//! risk programs) so everything is dense.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block-diagonal matrix, one dense symmetric block per entry.
pub type Blocks = Vec<DMatrix<f64>>;

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub c: Blocks,
    /// One block-diagonal constraint matrix per equality.
    pub a: Vec<Blocks>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|<C,X> - b^T y|`.
    pub duality_gap: f64,
    pub x: Blocks,
    pub y: Vec<f64>,
    pub iterations: usize,
}

const STEP_FRACTION: f64 = 0.95;
const DIVERGENCE: f64 = 1e12;

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.component_mul(y).sum()).sum()
}

fn fro(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>, c: Blocks, a: Vec<Blocks>, b: Vec<f64>) -> Result<Self> {
        let shape_ok = |m: &Blocks| {
            m.len() == block_dims.len()
                && m.iter().zip(&block_dims).all(|(x, n)| x.nrows() == *n && x.ncols() == *n)
        };
        if !shape_ok(&c) || !a.iter().all(shape_ok) || a.len() != b.len() {
            return Err(Error::InvalidArgument("SDP data has inconsistent shapes".into()));
        }
        Ok(SdpProblem { block_dims, c, a, b })
    }

    fn a_op(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ak| inner(ak, x)))
    }

    fn at_op(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.block_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (ak, yk) in self.a.iter().zip(y.iter()) {
            for (o, m) in out.iter_mut().zip(ak) {
                *o += m * *yk;
            }
        }
        out
    }

    fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }
}

/// Largest `alpha <= 1` keeping `x + alpha dx` positive definite, shortened
/// by [`STEP_FRACTION`].
fn step_length(x: &Blocks, dx: &Blocks) -> Option<f64> {
    let mut alpha_max = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let l = xb.clone().cholesky()?.l();
        let linv = l.clone().try_inverse()?;
        let m = sym(&linv * db * linv.transpose());
        let lmin = m.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha_max = alpha_max.min(-1.0 / lmin);
        }
    }
    Some((STEP_FRACTION * alpha_max).min(1.0))
}

fn inverse_blocks(z: &Blocks) -> Option<Blocks> {
    z.iter().map(|b| b.clone().cholesky().map(|c| c.inverse())).collect()
}

fn mul3(a: &Blocks, b: &Blocks, c: &Blocks) -> Blocks {
    a.iter().zip(b).zip(c).map(|((x, y), z)| x * y * z).collect()
}

fn lin(a: &Blocks, sa: f64, b: &Blocks, sb: f64) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x * sa + y * sb).collect()
}

/// Solves the SDP to relative accuracy `tol` on gap and infeasibilities.
pub fn solve(prob: &SdpProblem, tol: f64, max_iter: usize) -> SdpSolution {
    let m = prob.a.len();
    let n_tot = prob.total_dim() as f64;
    let norm_c = fro(&prob.c);
    let norm_b = prob.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = DVector::from_column_slice(&prob.b);

    // standard scaled-identity starting point
    let max_a = prob.a.iter().map(fro).fold(0.0, f64::max);
    let xi = (n_tot.sqrt())
        .max(10.0)
        .max(prob.b.iter().zip(&prob.a).map(|(bk, ak)| (1.0 + bk.abs()) / (1.0 + fro(ak))).fold(0.0, f64::max));
    let eta = (n_tot.sqrt()).max(10.0).max(norm_c).max(max_a);
    let eye = |s: f64| -> Blocks { prob.block_dims.iter().map(|&n| DMatrix::identity(n, n) * s).collect() };
    let mut x = eye(xi);
    let mut z = eye(eta);
    let mut y = DVector::zeros(m);

    let mut best: Option<(f64, SdpSolution)> = None;
    let snapshot = |status, x: &Blocks, y: &DVector<f64>, iters| {
        let p = inner(&prob.c, x);
        let d = prob.b.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>();
        SdpSolution {
            status,
            primal_objective: p,
            dual_objective: d,
            duality_gap: (p - d).abs(),
            x: x.clone(),
            y: y.iter().copied().collect(),
            iterations: iters,
        }
    };

    for iter in 0..max_iter {
        let rp = &b - prob.a_op(&x);
        let at_y = prob.at_op(&y);
        let rd: Blocks = prob
            .c
            .iter()
            .zip(&z)
            .zip(&at_y)
            .map(|((c, zb), a)| c - zb - a)
            .collect();
        let pobj = inner(&prob.c, &x);
        let dobj = b.dot(&y);
        let mu = inner(&x, &z) / n_tot;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + norm_b);
        let dinf = fro(&rd) / (1.0 + norm_c);

        if rel_gap <= tol && pinf <= tol && dinf <= tol {
            return snapshot(SdpStatus::Optimal, &x, &y, iter);
        }
        if fro(&x) > DIVERGENCE || y.norm() > DIVERGENCE {
            return snapshot(SdpStatus::Infeasible, &x, &y, iter);
        }
        let merit = rel_gap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, snapshot(SdpStatus::MaxIter, &x, &y, iter)));
        }

        let Some(zinv) = inverse_blocks(&z) else { break };
        // Schur complement M_ij = <A_i, X A_j Z^-1>
        let g: Vec<Blocks> = prob.a.iter().map(|aj| mul3(&x, aj, &zinv)).collect();
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                schur[(i, j)] = inner(&prob.a[i], &g[j]);
            }
        }
        let lu = schur.lu();

        let x_rd_zinv = mul3(&x, &rd, &zinv);
        let base_rhs = &rp + prob.a_op(&x) + prob.a_op(&x_rd_zinv);

        // predictor (sigma = 0)
        let Some(dy_a) = lu.solve(&base_rhs) else { break };
        let dz_a: Blocks = rd.iter().zip(prob.at_op(&dy_a)).map(|(r, a)| r - a).collect();
        let dx_a: Blocks = x
            .iter()
            .zip(mul3(&x, &dz_a, &zinv))
            .map(|(xb, w)| sym(-xb - w))
            .collect();
        let (Some(ap), Some(ad)) = (step_length(&x, &dx_a), step_length(&z, &dz_a)) else { break };
        let mu_aff = inner(&lin(&x, 1.0, &dx_a, ap), &lin(&z, 1.0, &dz_a, ad)) / n_tot;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let cross: Blocks = dx_a.iter().zip(&dz_a).zip(&zinv).map(|((a, b), c)| a * b * c).collect();
        let rhs = &base_rhs - prob.a_op(&zinv) * (sigma * mu) + prob.a_op(&cross);
        let Some(dy) = lu.solve(&rhs) else { break };
        let dz: Blocks = rd.iter().zip(prob.at_op(&dy)).map(|(r, a)| r - a).collect();
        let x_dz_zinv = mul3(&x, &dz, &zinv);
        let dx: Blocks = (0..x.len())
            .map(|k| sym(&zinv[k] * (sigma * mu) - &x[k] - &cross[k] - &x_dz_zinv[k]))
            .collect();
        let (Some(ap), Some(ad)) = (step_length(&x, &dx), step_length(&z, &dz)) else { break };

        x = lin(&x, 1.0, &dx, ap);
        z = lin(&z, 1.0, &dz, ad);
        y += dy * ad;
    }
    best.map(|(_, s)| s)
        .unwrap_or_else(|| snapshot(SdpStatus::MaxIter, &x, &y, max_iter))
}
