//! Synthetic workloads shaped like real prediction outputs.
//!
//! The ego drives straight along `+x` at a constant speed. Each agent is
//! placed so that, without noise, it would pass within a couple of metres
//! of the ego at a random time inside the horizon. Position agents carry
//! three modes (straight, curving left, curving right) with covariance
//! growing over time. Control agents carry three-mode speed and heading
//! noise for the Dubins model, in per-step units.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::cli_io::{AgentPrediction, Scenario};
use crate::distributions::{Gaussian2D, Gaussian2DMixture, ScalarComponent, ScalarMixture};
use crate::frames::{EgoPose, Ellipsoid};
use crate::linalg::{rotation, Mat2, Vec2};
use crate::treering::{DubinsInputs, DubinsState};

/// Seconds per step.
pub const DT: f64 = 0.1;

/// Random ellipse, mean and covariance for single-Gaussian experiments:
/// semi-axes in `[1, 3]`, mean within radius 6, covariance eigenvalues
/// log-uniform in `[0.05, 4]`, all orientations uniform.
pub fn gaussian_instance<R: Rng + ?Sized>(rng: &mut R) -> (Ellipsoid, Gaussian2D) {
    let a: f64 = rng.random_range(1.0..3.0);
    let b: f64 = rng.random_range(1.0..3.0);
    let r = rotation(rng.random_range(0.0..std::f64::consts::TAU));
    let q = r * Mat2::new(1.0 / (a * a), 0.0, 0.0, 1.0 / (b * b)) * r.transpose();
    let q = Ellipsoid::new(symmetric(q)).expect("positive definite by construction");

    let radius = 6.0 * rng.random::<f64>().sqrt();
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mean = Vec2::new(radius * phi.cos(), radius * phi.sin());
    let log_uniform = |rng: &mut R| (rng.random_range(0.05f64.ln()..4f64.ln())).exp();
    let (l1, l2) = (log_uniform(rng), log_uniform(rng));
    let r = rotation(rng.random_range(0.0..std::f64::consts::TAU));
    let cov = symmetric(r * Mat2::new(l1, 0.0, 0.0, l2) * r.transpose());
    (q, Gaussian2D::new(mean, cov).expect("valid by construction"))
}

fn symmetric(m: Mat2) -> Mat2 {
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Mat2::new(m[(0, 0)], off, off, m[(1, 1)])
}

fn weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    // exact unit sum
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    w
}

struct Encounter {
    ego: Vec<EgoPose>,
    ellipsoid: Ellipsoid,
    start: Vec2,
    heading: f64,
    speed: f64,
}

fn encounter<R: Rng + ?Sized>(rng: &mut R, steps: usize) -> Encounter {
    let ego_speed: f64 = rng.random_range(5.0..15.0);
    let ego = (0..steps)
        .map(|t| EgoPose::new(ego_speed * DT * (t + 1) as f64, 0.0, 0.0).expect("finite"))
        .collect();
    let ellipsoid = Ellipsoid::axis_aligned(
        3.5 * rng.random_range(0.9..1.1),
        2.0 * rng.random_range(0.9..1.1),
    )
    .expect("positive axes");
    let speed: f64 = rng.random_range(3.0..12.0);
    let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let horizon = steps as f64 * DT;
    let meet: f64 = rng.random_range(0.3..0.85) * horizon;
    let jitter = Normal::new(0.0, 1.5).expect("positive scale");
    let offset = Vec2::new(jitter.sample(rng), jitter.sample(rng));
    let dir = Vec2::new(heading.cos(), heading.sin());
    let start = Vec2::new(ego_speed * meet, 0.0) + offset - dir * (speed * meet);
    Encounter { ego, ellipsoid, start, heading, speed }
}

/// One position-form agent with `modes` modes over `steps` steps.
pub fn position_scenario<R: Rng + ?Sized>(rng: &mut R, steps: usize, modes: usize) -> Scenario {
    let enc = encounter(rng, steps);
    let dir = Vec2::new(enc.heading.cos(), enc.heading.sin());
    let normal = Vec2::new(-dir.y, dir.x);
    let lateral: f64 = rng.random_range(0.5..2.5);
    let mode_params: Vec<(f64, f64)> = (0..modes)
        .map(|k| {
            let side = match k % 3 {
                0 => 0.0,
                1 => 1.0,
                _ => -1.0,
            };
            (side * lateral, rng.random_range(-1.0..1.0))
        })
        .collect();
    let w = weights(rng, modes);
    let sigma0: f64 = rng.random_range(0.1..0.3);
    let growth_long: f64 = rng.random_range(0.3..1.5);
    let growth_lat: f64 = rng.random_range(0.2..1.0);
    let rot = rotation(enc.heading);
    let steps_v = (0..steps)
        .map(|t| {
            let tau = (t + 1) as f64 * DT;
            let cov = symmetric(
                rot * Mat2::new(
                    sigma0 * sigma0 + (growth_long * tau).powi(2),
                    0.0,
                    0.0,
                    sigma0 * sigma0 + (growth_lat * tau).powi(2),
                ) * rot.transpose(),
            );
            let comps = mode_params
                .iter()
                .map(|(a_lat, a_long)| {
                    let mean = enc.start
                        + dir * (enc.speed * tau + 0.5 * a_long * tau * tau)
                        + normal * (0.5 * a_lat * tau * tau);
                    Gaussian2D::new(mean, cov).expect("valid by construction")
                })
                .collect();
            Gaussian2DMixture::new(comps, w.clone()).expect("weights sum to one")
        })
        .collect();
    Scenario {
        ego_trajectory: enc.ego,
        ellipsoid: enc.ellipsoid,
        agents: vec![AgentPrediction::Position { mode_persistence: false, steps: steps_v }],
    }
}

fn three_mode_noise<R: Rng + ?Sized>(rng: &mut R, spread: f64, sd: f64) -> ScalarMixture {
    let comps = [0.0, 1.0, -1.0]
        .iter()
        .map(|s| ScalarComponent::gaussian(s * spread, sd * sd).expect("valid"))
        .collect();
    ScalarMixture::new(comps, weights(rng, 3)).expect("weights sum to one")
}

/// One control-form agent (Dubins, per-step units) over `steps` steps.
pub fn control_scenario<R: Rng + ?Sized>(rng: &mut R, steps: usize) -> Scenario {
    let enc = encounter(rng, steps);
    let accel: f64 = rng.random_range(0.5..2.0);
    let accel_sd: f64 = rng.random_range(0.5..2.0);
    let yaw: f64 = rng.random_range(0.05..0.3);
    let yaw_sd: f64 = rng.random_range(0.05..0.3);
    let w_v = (0..steps)
        .map(|_| three_mode_noise(rng, accel * DT * DT, accel_sd * DT * DT))
        .collect();
    let w_theta = (0..steps)
        .map(|_| three_mode_noise(rng, yaw * DT, yaw_sd * DT))
        .collect();
    let initial = DubinsState {
        x: enc.start.x,
        y: enc.start.y,
        v: enc.speed * DT,
        theta: enc.heading,
    };
    Scenario {
        ego_trajectory: enc.ego,
        ellipsoid: enc.ellipsoid,
        agents: vec![AgentPrediction::Control {
            mode_persistence: false,
            inputs: DubinsInputs::new(initial, w_v, w_theta).expect("matching lengths"),
        }],
    }
}

/// Gaussian control noise (single mode) for propagation checks.
pub fn gaussian_control_inputs<R: Rng + ?Sized>(rng: &mut R, steps: usize) -> DubinsInputs {
    let g = |m: f64, sd: f64| ScalarMixture::single(ScalarComponent::gaussian(m, sd * sd).expect("valid"));
    let initial = DubinsState {
        x: rng.random_range(-10.0..10.0),
        y: rng.random_range(-10.0..10.0),
        v: rng.random_range(0.3..1.2),
        theta: rng.random_range(-3.1..3.1),
    };
    let w_v = (0..steps)
        .map(|_| g(rng.random_range(-0.02..0.02), rng.random_range(0.005..0.03)))
        .collect();
    let w_theta = (0..steps)
        .map(|_| g(rng.random_range(-0.03..0.03), rng.random_range(0.005..0.05)))
        .collect();
    DubinsInputs::new(initial, w_v, w_theta).expect("matching lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sc = position_scenario(&mut rng, 30, 3);
        sc.validate().unwrap();
        match &sc.agents[0] {
            AgentPrediction::Position { steps, .. } => {
                assert_eq!(steps.len(), 30);
                assert!(steps.iter().all(|m| m.components().len() == 3));
            }
            _ => unreachable!(),
        }
        let sc = control_scenario(&mut rng, 30);
        sc.validate().unwrap();
        assert_eq!(sc.horizon(), 30);
        let (_, g) = gaussian_instance(&mut rng);
        assert!(g.mean().norm() <= 6.0);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = position_scenario(&mut ChaCha8Rng::seed_from_u64(4), 5, 3);
        let b = position_scenario(&mut ChaCha8Rng::seed_from_u64(4), 5, 3);
        assert_eq!(crate::cli_io::write_scenario(&a), crate::cli_io::write_scenario(&b));
    }
}
