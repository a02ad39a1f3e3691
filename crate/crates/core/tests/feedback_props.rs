//! Hybrid and all-quantum feedback loops.

use nalgebra::dmatrix;

use qembed_core::feedback::{
    build_hybrid_loop, build_quantum_loop, conditional_filter, consistency_check, consistency_check_with,
    filter_asymmetry, settling_time, CavityPlant,
};
use qembed_core::foundation::{eigenvalues, is_hurwitz, RealMatrix};

#[test]
fn grid_consistency() {
    for gamma in [0.5, 1.0, 2.0] {
        for omega in [0.0, 0.5, 1.0] {
            let p = CavityPlant::new(omega, gamma).unwrap();
            let r = consistency_check(&p).unwrap();
            assert!(r.stationary, "gamma {gamma}, omega {omega}");
            assert!(r.max_abs_diff < 1e-8);
            assert!((r.e_q_xi - r.e_q_x1).abs() < 1e-8);
        }
    }
}

#[test]
fn stationarity_matches_eigenvalues() {
    for gamma in [0.5, 1.0, 2.0] {
        for omega in [0.0, 0.5, 1.0] {
            let p = CavityPlant::new(omega, gamma).unwrap();
            let h = build_hybrid_loop(&p);
            let stable = eigenvalues(&h.drift).unwrap().iter().all(|z| z.re < 0.0);
            assert_eq!(stable, is_hurwitz(&h.drift).unwrap());
            if stable {
                assert!(h.steady_covariance().is_ok());
            }
        }
    }
}

#[test]
fn finite_time_moments_approach_steady_values() {
    let p = CavityPlant::new(0.5, 2.0).unwrap();
    let h = build_hybrid_loop(&p);
    let t = settling_time(&h).unwrap();
    let at_t = h.covariance_at(&RealMatrix::zeros(3, 3), t, 1e-2).unwrap();
    let steady = h.steady_covariance().unwrap();
    assert!((at_t - &steady).abs().max() < 1e-6);

    let q = build_quantum_loop(&p);
    let short = consistency_check_with(&p, 5.0, 1e-3).unwrap();
    assert!(short.stationary);
    let transient = q.covariance_at(&RealMatrix::zeros(4, 4), 5.0, 1e-3).unwrap();
    let hybrid_transient = h.covariance_at(&RealMatrix::zeros(3, 3), 5.0, 1e-3).unwrap();
    assert!((transient.view((0, 0), (3, 3)) - hybrid_transient).abs().max() < 1e-12);
}

#[test]
fn filter_flow_stays_symmetric_and_bounded() {
    let p = CavityPlant::new(0.8, 1.0).unwrap();
    let run = conditional_filter(&p, &dmatrix![2.0, 0.3; 0.3, 1.5], (0.0, 20.0), 1e-2).unwrap();
    assert_eq!(filter_asymmetry(&run), 0.0);
    assert!(run.covs.iter().all(|m| m.iter().all(|x| x.is_finite() && x.abs() < 10.0)));
    // The flow settles on the vacuum covariance.
    assert!((run.covs.last().unwrap() - RealMatrix::identity(2, 2)).abs().max() < 1e-6);
    let csv = run.to_csv(true);
    assert!(csv.starts_with("t,P_qq,P_qp,P_pp,K_q,K_p,G_q,G_p\n"));
    assert_eq!(csv.lines().count(), run.times.len() + 1);
}
