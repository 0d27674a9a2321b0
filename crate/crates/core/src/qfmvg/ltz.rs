//! Liu-Tang-Zhang approximation: a noncentral chi-square whose skewness and
//! kurtosis match the weighted sum, evaluated at the standardized threshold.

use super::ncx2::noncentral_chi2_cdf;
use super::{CdfMethod, CdfResult, LtzBranch, SpectralForm};
use crate::error::{Error, Result};

pub fn ltz_cdf(form: &SpectralForm) -> Result<CdfResult> {
    if form.is_constant() {
        return Err(Error::InvalidArgument(
            "LTZ approximation needs at least one nonzero eigenvalue".into(),
        ));
    }
    let c1 = form.power_sum(1);
    let c2 = form.power_sum(2);
    let c3 = form.power_sum(3);
    let c4 = form.power_sum(4);
    let s1 = c3 / c2.powf(1.5);
    let s2 = c4 / (c2 * c2);

    let disc = s1 * s1 - s2;
    let (a, nc, dof, branch) = if disc > 1e-12 * s2 {
        let a = 1.0 / (s1 - disc.sqrt());
        let nc = s1 * a * a * a - a * a;
        (a, nc, a * a - 2.0 * nc, LtzBranch::Noncentral)
    } else {
        (1.0 / s1, 0.0, 1.0 / (s1 * s1), LtzBranch::Central)
    };

    let mean_q = c1;
    let sd_q = (2.0 * c2).sqrt();
    let mean_x = dof + nc;
    let sd_x = std::f64::consts::SQRT_2 * a;
    let x = (form.threshold - mean_q) / sd_q * sd_x + mean_x;
    let p = noncentral_chi2_cdf(x, dof, nc.max(0.0));
    Ok(CdfResult {
        probability: p.clamp(0.0, 1.0),
        error_bound: None,
        method: CdfMethod::Ltz,
        ltz_branch: Some(branch),
    })
}
