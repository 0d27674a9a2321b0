use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use trajrisk::cli_io::{
    compare_methods, comparison_text, load_scenario, parse_scenario, report_csv, report_json, run_assess,
    run_oracle, save_scenario, write_scenario, AgentPrediction, AssessOptions, RiskReport, Scenario,
};
use trajrisk::error::Error;
use trajrisk::method::Method;
use trajrisk::risk_engine::RiskConfig;
use trajrisk::synth;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-15 * a.abs().max(1.0)
}

fn assert_same(a: &Scenario, b: &Scenario) {
    assert_eq!(a.ego_trajectory.len(), b.ego_trajectory.len());
    for (p, r) in a.ego_trajectory.iter().zip(&b.ego_trajectory) {
        assert!(close(p.x, r.x) && close(p.y, r.y) && close(p.theta, r.theta));
    }
    let (qa, qb) = (a.ellipsoid.matrix(), b.ellipsoid.matrix());
    assert!(qa.iter().zip(qb.iter()).all(|(x, y)| close(*x, *y)));
    assert_eq!(a.agents.len(), b.agents.len());
    for (x, y) in a.agents.iter().zip(&b.agents) {
        assert_eq!(x.mode_persistence(), y.mode_persistence());
        match (x, y) {
            (AgentPrediction::Position { steps: s1, .. }, AgentPrediction::Position { steps: s2, .. }) => {
                for (m1, m2) in s1.iter().zip(s2) {
                    for ((w1, g1), (w2, g2)) in m1.modes().zip(m2.modes()) {
                        assert!(close(w1, w2));
                        assert!(g1.mean().iter().zip(g2.mean().iter()).all(|(u, v)| close(*u, *v)));
                        assert!(g1.covariance().iter().zip(g2.covariance().iter()).all(|(u, v)| close(*u, *v)));
                    }
                }
            }
            (AgentPrediction::Control { inputs: i1, .. }, AgentPrediction::Control { inputs: i2, .. }) => {
                let (s1, s2) = (i1.initial(), i2.initial());
                assert!(close(s1.x, s2.x) && close(s1.y, s2.y) && close(s1.v, s2.v) && close(s1.theta, s2.theta));
                for (a1, a2) in i1.w_v().iter().chain(i1.w_theta()).zip(i2.w_v().iter().chain(i2.w_theta())) {
                    for ((c1, w1), (c2, w2)) in a1.components().iter().zip(a1.weights()).zip(a2.components().iter().zip(a2.weights())) {
                        assert!(close(*w1, *w2) && close(c1.mean(), c2.mean()) && close(c1.variance(), c2.variance()));
                    }
                }
            }
            _ => panic!("agent form changed"),
        }
    }
}

fn mixed_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sc = synth::position_scenario(&mut rng, 8, 3);
    let control = synth::control_scenario(&mut rng, 8);
    sc.agents.extend(control.agents);
    sc
}

#[test]
fn scenarios_round_trip() {
    for seed in 0..20 {
        let sc = mixed_scenario(seed);
        let text = write_scenario(&sc);
        let back = parse_scenario(&text).unwrap();
        assert_same(&sc, &back);
        assert_eq!(write_scenario(&back), text);
    }
}

#[test]
fn scenario_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let sc = mixed_scenario(99);
    save_scenario(&sc, &path).unwrap();
    assert_same(&sc, &load_scenario(&path).unwrap());
}

#[test]
fn malformed_json_reports_its_position() {
    let e = parse_scenario("{\n  \"ego_trajectory\": [\n    {\"x\": 1, }\n  ]\n}").unwrap_err();
    assert!(matches!(e, Error::Parse(_)), "{e}");
    assert!(e.to_string().contains("line 3"), "{e}");
}

#[test]
fn invalid_fields_name_their_location() {
    let sc = mixed_scenario(3);
    let text = write_scenario(&sc).replacen("\"weight\": ", "\"weight\": 7.0e0, \"ignored\": ", 1);
    let e = parse_scenario(&text).unwrap_err();
    assert!(matches!(e, Error::Validation(_)), "{e}");
    assert!(e.to_string().contains("agents[0]"), "{e}");
}

#[test]
fn reports_render_consistently() {
    let sc = mixed_scenario(5);
    let opts = AssessOptions {
        config: RiskConfig { mc_samples: 2_000, ..RiskConfig::default() },
        ..AssessOptions::default()
    };
    let methods = [Method::ChebyshevHalfspace, Method::Sos(4), Method::Mc];
    let r = run_assess(&sc, &methods, &opts).unwrap();
    let back: RiskReport = serde_json::from_str(&report_json(&r)).unwrap();
    assert_eq!(back, r);

    let csv = report_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("agent,t,method,value,is_upper_bound,std_error"));
    assert_eq!(lines.count(), 2 * 8 * methods.len());

    let c = compare_methods(&r);
    assert_eq!(c.reference, Some(Method::Mc));
    assert_eq!(c.rows.len(), methods.len());
    assert_eq!(comparison_text(&c).lines().count(), methods.len() + 1);

    let o = run_oracle(&sc, &opts).unwrap();
    assert!(o.agents.iter().all(|a| a.oracle.is_some() && a.results.is_empty()));
    assert!(report_csv(&o).contains(",mc-oracle,"));
}

#[test]
fn empty_method_list_is_rejected() {
    let sc = mixed_scenario(6);
    assert!(matches!(run_assess(&sc, &[], &AssessOptions::default()), Err(Error::Validation(_))));
}
