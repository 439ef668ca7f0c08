mod common;

use ccvp_core::certify::{search_kkt_multipliers, verify_akkt_certificate, AkktCertificate, VerifyConfig};
use ccvp_core::cq::{distance_to_k0, probe_akkt_regularity, ProbeConfig};
use ccvp_core::fixtures;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn perturbation_map_scales_with_r() {
    common::k_scaling_suite().unwrap();
}

#[test]
fn rcq_and_mfcq_agree_on_orthants() {
    let holding = common::rcq_mfcq_agreement_suite().unwrap();
    assert!(holding > 0 && holding < 50, "{holding}");
}

#[test]
fn lp_solve_is_deterministic() {
    common::lp_determinism_suite().unwrap();
}

#[test]
fn admissible_k0_elements_have_zero_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for id in 1..=3 {
        let fx = fixtures::example(id).unwrap();
        let ev = fx.problem.evaluate(&fx.x_bar).unwrap();
        for _ in 0..100 {
            let mut mu = vec![0.0; fx.problem.p()];
            for b in fx.problem.cone().blocks() {
                for j in b.range() {
                    mu[j] = match b.kind {
                        ccvp_core::cone::BlockKind::Zero => rng.gen_range(-10.0..10.0),
                        // complementarity: inactive orthant rows carry no weight
                        _ if ev.g[j] < 0.0 => 0.0,
                        _ => rng.gen_range(0.0..10.0),
                    };
                }
            }
            let w = ev.adjoint(&mu);
            let d = distance_to_k0(&fx.problem, &fx.x_bar, &w).unwrap();
            assert!(d <= 1e-9, "example {id}: {d:e}");
        }
    }
}

#[test]
fn regular_points_with_akkt_certificates_are_kkt() {
    // examples 2 and 3: no probe violation, a verified certificate exists
    let cases = [(2, vec![1.0], vec![1.0, 0.0, 0.0]), (3, vec![1.0], vec![0.0, 0.0])];
    for (id, lambda, mu) in cases {
        let fx = fixtures::example(id).unwrap();
        let rep = probe_akkt_regularity(&fx.problem, &fx.x_bar, &ProbeConfig::default()).unwrap();
        assert!(!rep.violation);
        let cert = AkktCertificate::constant(lambda, fx.x_bar.clone(), mu, 10);
        assert!(verify_akkt_certificate(&fx.problem, &cert, &VerifyConfig::default()).unwrap().akkt_holds());
        let s = search_kkt_multipliers(&fx.problem, &cert.limit, 1e-6).unwrap();
        assert!(s.kkt_holds, "example {id}: {}", s.min_residual);
    }
}
