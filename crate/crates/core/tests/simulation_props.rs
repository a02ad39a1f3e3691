//! Moments and sample paths of embedded systems.

use nalgebra::{dmatrix, dvector, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qembed_core::classical::classical_steady_covariance;
use qembed_core::fixtures::{
    scalar_classical, scalar_quantum, gaussian_matrix, random_free_parameters, random_stable_system,
};
use qembed_core::foundation::{eigenvalues, spectral_abscissa, RealMatrix};
use qembed_core::quantum::QuantumSystem;
use qembed_core::realization::construct;
use qembed_core::simulation::{
    augment_state, ensemble_xi_covariance, propagate_moments, sample_paths, skew_flow_check,
    steady_block_difference, steady_covariance, GaussianState, NoiseRealization,
};
use qembed_core::ClassicalSystem;

fn random_pair(seed: u64) -> (ClassicalSystem, QuantumSystem) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = random_stable_system(&mut rng);
    let q = construct(&sys, &random_free_parameters(&mut rng, &sys)).unwrap();
    (sys, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augmentation_is_admissible(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian_matrix(&mut rng, n, n);
        let cov = &x * x.transpose() + RealMatrix::identity(n, n) * 1e-3;
        let g = augment_state(&DVector::zeros(n), &cov).unwrap();
        prop_assert!(g.admissibility() >= -1e-10);
        prop_assert_eq!(g.cov.view((0, 0), (n, n)).into_owned(), cov);
    }

    #[test]
    fn embedded_paths_are_bitwise_equal(seed in any::<u64>()) {
        let (sys, q) = random_pair(seed);
        let noise = NoiseRealization::for_grid(seed, q.n_w(), (0.0, 1.0), 1e-3).unwrap();
        let xi0 = DVector::from_element(sys.n(), -0.3);
        let paths = sample_paths(&q, &sys, &xi0, &noise, (0.0, 1.0), 1e-3).unwrap();
        prop_assert!(paths.bitwise_equal());
    }

    #[test]
    fn steady_blocks_agree(seed in any::<u64>()) {
        let (sys, q) = random_pair(seed);
        let d = steady_block_difference(&sys, &q).unwrap();
        // The quantum solve runs on the full 2n system, so its rounding
        // error scales with the whole covariance, which can be large when
        // the θ block is driven hard.
        let scale = steady_covariance(&q).unwrap().abs().max().max(1.0);
        prop_assert!(d < 1e-10 * scale, "difference {}", d);
    }

    #[test]
    fn constructed_systems_keep_commutators(seed in any::<u64>()) {
        let (_, q) = random_pair(seed);
        let rho = eigenvalues(q.atil()).unwrap().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let d = skew_flow_check(&q, (0.0, 10.0), (1.0 / rho).min(0.01)).unwrap();
        let scale = q.atil().abs().max().max(q.btil().abs().max()).max(1.0);
        prop_assert!(d < 1e-12 * scale * scale, "deviation {}", d);
    }
}

#[test]
fn flow_reaches_lyapunov_steady_state() {
    let (_, q) = random_pair(11);
    let abscissa = spectral_abscissa(q.atil()).unwrap();
    let rho = eigenvalues(q.atil()).unwrap().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let t_end = 40.0 / abscissa.abs();
    let flow = propagate_moments(&q, &GaussianState::vacuum(q.n()), (0.0, t_end), (0.5 / rho).min(0.01)).unwrap();
    let steady = steady_covariance(&q).unwrap();
    assert!((flow.last_cov() - &steady).abs().max() < 1e-6 * steady.abs().max().max(1.0));
    for s in &flow.covs {
        assert_eq!(s, &s.transpose());
    }
    assert!(flow.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn seeds_control_paths() {
    let (sys, q) = (scalar_classical(), scalar_quantum());
    let run = |seed| {
        let noise = NoiseRealization::for_grid(seed, q.n_w(), (0.0, 1.0), 0.01).unwrap();
        sample_paths(&q, &sys, &dvector![0.0], &noise, (0.0, 1.0), 0.01).unwrap()
    };
    assert_eq!(run(5).to_csv(), run(5).to_csv());
    assert_ne!(run(5).classical, run(6).classical);
    let noise = NoiseRealization::for_grid(1, q.n_w(), (0.0, 1.0), 0.01).unwrap();
    assert!(sample_paths(&q, &sys, &dvector![0.0], &noise, (0.0, 1.0), 0.0).is_err());
}

#[test]
fn ensemble_covariance_matches_lyapunov() {
    let q = scalar_quantum();
    let oracle = classical_steady_covariance(&scalar_classical()).unwrap()[(0, 0)];
    let cov = ensemble_xi_covariance(&q, &dvector![0.0], 10_000, 42, (0.0, 5.0), 0.01).unwrap();
    assert!((cov[(0, 0)] - oracle).abs() < 0.05 * oracle, "{} vs {oracle}", cov[(0, 0)]);
    let again = ensemble_xi_covariance(&q, &dvector![0.0], 10_000, 42, (0.0, 5.0), 0.01).unwrap();
    assert_eq!(cov, again);
}

#[test]
fn transient_covariance_of_scalar_system() {
    // Σ(t) = e^{-2t} + 0.5(1 - e^{-2t}) for dξ = -ξdt + dv from unit variance.
    let q = scalar_quantum();
    let flow = propagate_moments(&q, &GaussianState::vacuum(1), (0.0, 2.0), 1e-3).unwrap();
    let t = 2.0f64;
    let exact = (-2.0 * t).exp() + 0.5 * (1.0 - (-2.0 * t).exp());
    assert!((flow.last_cov()[(0, 0)] - exact).abs() < 1e-10);
    let _ = dmatrix![0.0];
}
