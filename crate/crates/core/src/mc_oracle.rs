//! Monte Carlo ground truth for position and control predictions.
//!
//! Particles are processed in fixed chunks of [`CHUNK`]; chunk `k` draws
//! from ChaCha8 stream `k` of the seeded generator. Counts and sums are
//! combined in chunk order, so estimates are bitwise identical for any
//! thread count and under both execution policies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{Gaussian2D, Gaussian2DMixture};
use crate::error::{Error, Result};
use crate::frames::{rotate_form, EgoPose, Ellipsoid};
use crate::linalg::Vec2;
use crate::par::{map_indexed, Execution};
use crate::treering::{DubinsInputs, DubinsState};

/// Particles per generator stream.
pub const CHUNK: usize = 4096;

/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub probability: f64,
    /// `sqrt(p (1 - p) / N)`.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_hits(hits: u64, samples: usize, seed: u64) -> Self {
        let p = hits as f64 / samples as f64;
        McEstimate {
            probability: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }
}

/// Per-step membership rates and the rate of ever entering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRisk {
    pub per_step: Vec<McEstimate>,
    pub trajectory: McEstimate,
}

/// Generator for one chunk of one experiment. `key` separates experiments
/// sharing a seed.
pub fn chunk_rng(seed: u64, key: u32, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((key as u64) << 32) | chunk as u64);
    rng
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

fn check_horizon(steps: usize, ego: &[EgoPose]) -> Result<()> {
    if steps == 0 {
        return Err(Error::EmptyHorizon);
    }
    if steps != ego.len() {
        return Err(Error::Validation(format!(
            "{steps} prediction steps for {} ego poses",
            ego.len()
        )));
    }
    Ok(())
}

fn chunk_sizes(n: usize) -> impl Fn(usize) -> usize {
    move |k| CHUNK.min(n - k * CHUNK)
}

/// Runs `body(rng, size)` for every chunk and adds the per-step hit counts
/// and union counts in chunk order.
fn count_hits<F>(exec: Execution, n: usize, steps: usize, seed: u64, key: u32, body: F) -> (Vec<u64>, u64)
where
    F: Fn(&mut ChaCha8Rng, usize, &mut [u64]) -> u64 + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let size = chunk_sizes(n);
    let partial = map_indexed(exec, n_chunks, |k| {
        let mut rng = chunk_rng(seed, key, k);
        let mut hits = vec![0u64; steps];
        let union = body(&mut rng, size(k), &mut hits);
        (hits, union)
    });
    let mut hits = vec![0u64; steps];
    let mut union = 0;
    for (h, u) in partial {
        for (a, b) in hits.iter_mut().zip(h) {
            *a += b;
        }
        union += u;
    }
    (hits, union)
}

fn ego_forms(q: &Ellipsoid, ego: &[EgoPose]) -> Vec<(Vec2, Ellipsoid)> {
    ego.iter().map(|e| (e.position(), rotate_form(q, e.theta))).collect()
}

/// Samples each step's mixture independently, tests membership of the
/// ego-frame ellipse, and reports per-step and union rates.
pub fn mc_position_risk(
    steps: &[Gaussian2DMixture],
    ego: &[EgoPose],
    q: &Ellipsoid,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<McRisk> {
    check_samples(n)?;
    check_horizon(steps.len(), ego)?;
    let forms = ego_forms(q, ego);
    let (hits, union) = count_hits(exec, n, steps.len(), seed, 0, |rng, size, hits| {
        let mut union = 0;
        for _ in 0..size {
            let mut any = false;
            for (t, mix) in steps.iter().enumerate() {
                let x = mix.sample(rng) - forms[t].0;
                if forms[t].1.contains(&x) {
                    hits[t] += 1;
                    any = true;
                }
            }
            union += any as u64;
        }
        union
    });
    Ok(McRisk {
        per_step: hits.iter().map(|h| McEstimate::from_hits(*h, n, seed)).collect(),
        trajectory: McEstimate::from_hits(union, n, seed),
    })
}

/// `P(x^T Q x <= 1)` for a single Gaussian, with generator key `key`.
pub fn mc_gaussian_probability(
    g: &Gaussian2D,
    q: &Ellipsoid,
    n: usize,
    seed: u64,
    key: u32,
    exec: Execution,
) -> Result<McEstimate> {
    check_samples(n)?;
    let (hits, _) = count_hits(exec, n, 1, seed, key, |rng, size, hits| {
        for _ in 0..size {
            if q.contains(&g.sample(rng)) {
                hits[0] += 1;
            }
        }
        0
    });
    Ok(McEstimate::from_hits(hits[0], n, seed))
}

/// Rolls particles through the Dubins update, sampling both controls at
/// every step. Step `t` of the report is the position after `t + 1`
/// controls, compared against ego pose `t`.
pub fn mc_control_risk(
    inputs: &DubinsInputs,
    ego: &[EgoPose],
    q: &Ellipsoid,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<McRisk> {
    check_samples(n)?;
    check_horizon(inputs.horizon(), ego)?;
    let forms = ego_forms(q, ego);
    let (hits, union) = count_hits(exec, n, inputs.horizon(), seed, 1, |rng, size, hits| {
        let mut union = 0;
        for _ in 0..size {
            let mut p = *inputs.initial();
            let mut any = false;
            for t in 0..inputs.horizon() {
                p = step_particle(&p, inputs, t, rng);
                let x = Vec2::new(p.x, p.y) - forms[t].0;
                if forms[t].1.contains(&x) {
                    hits[t] += 1;
                    any = true;
                }
            }
            union += any as u64;
        }
        union
    });
    Ok(McRisk {
        per_step: hits.iter().map(|h| McEstimate::from_hits(*h, n, seed)).collect(),
        trajectory: McEstimate::from_hits(union, n, seed),
    })
}

fn step_particle(p: &DubinsState, inputs: &DubinsInputs, t: usize, rng: &mut ChaCha8Rng) -> DubinsState {
    let wv = inputs.w_v()[t].sample(rng);
    let wt = inputs.w_theta()[t].sample(rng);
    p.step(wv, wt)
}

/// Sample estimates of `E[x]`, `E[y]`, `E[x^2]`, `E[y^2]`, `E[xy]` with
/// their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionMomentEstimate {
    pub mean: [f64; 5],
    pub std_error: [f64; 5],
}

fn monomials(p: &DubinsState) -> [f64; 5] {
    [p.x, p.y, p.x * p.x, p.y * p.y, p.x * p.y]
}

/// Per-step position moment estimates of the Dubins rollout, for the
/// states `0..=horizon`.
pub fn mc_control_moments(
    inputs: &DubinsInputs,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<PositionMomentEstimate>> {
    check_samples(n)?;
    let steps = inputs.horizon() + 1;
    let n_chunks = n.div_ceil(CHUNK);
    let size = chunk_sizes(n);
    let partial = map_indexed(exec, n_chunks, |k| {
        let mut rng = chunk_rng(seed, 2, k);
        let mut sums = vec![[0.0f64; 10]; steps];
        for _ in 0..size(k) {
            let mut p = *inputs.initial();
            for t in 0..steps {
                if t > 0 {
                    p = step_particle(&p, inputs, t - 1, &mut rng);
                }
                for (i, m) in monomials(&p).iter().enumerate() {
                    sums[t][i] += m;
                    sums[t][5 + i] += m * m;
                }
            }
        }
        sums
    });
    let mut total = vec![[0.0f64; 10]; steps];
    for sums in partial {
        for (acc, s) in total.iter_mut().zip(sums) {
            for (a, b) in acc.iter_mut().zip(s) {
                *a += b;
            }
        }
    }
    let nf = n as f64;
    Ok(total
        .iter()
        .map(|s| {
            let mut mean = [0.0; 5];
            let mut se = [0.0; 5];
            for i in 0..5 {
                mean[i] = s[i] / nf;
                let var = ((s[5 + i] - nf * mean[i] * mean[i]) / (nf - 1.0)).max(0.0);
                se[i] = (var / nf).sqrt();
            }
            PositionMomentEstimate { mean, std_error: se }
        })
        .collect())
}
