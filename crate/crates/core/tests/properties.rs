use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dicke_core::measurement::{expval, probabilities, sample, Observable};
use dicke_core::noise::depolarize;
use dicke_core::oracle::random_circuit;
use dicke_core::squeezing::squeezing;
use dicke_core::state::InvariantTolerance;
use dicke_core::{apply_circuit, apply_gate, Circuit, CollectiveState, Error, GateSpec};

fn loose() -> InvariantTolerance {
    InvariantTolerance { trace: 1e-10, hermiticity: 1e-10, min_eigenvalue: -1e-10 }
}

/// Output of a random catalog circuit, or `None` when a pair of
/// non-unitary gates cancelled beyond double precision and the engine
/// refused to renormalize. Any other error fails the test.
fn random_state(n: u32, seed: u64, noise: f64) -> Option<CollectiveState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match random_circuit(n, 4, noise, &mut rng).run() {
        Ok(state) => Some(state),
        Err(Error::Numeric(msg)) if msg.contains("lost precision") => None,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn circuits_keep_states_physical(n in 1u32..24, seed in any::<u64>(), noise in 0.0f64..0.5) {
        let Some(state) = random_state(n, seed, noise) else { return Ok(()) };
        prop_assert!(state.check_invariants(InvariantTolerance::default()).is_ok());
        let table = probabilities(&state).unwrap();
        prop_assert!((table.total() - 1.0).abs() < 1e-10);
        prop_assert!(table.entries.iter().all(|e| e.p >= 0.0));
    }

    #[test]
    fn channel_preserves_trace_and_positivity(n in 1u32..30, seed in any::<u64>(), eps in 0.0f64..=1.0) {
        let Some(state) = random_state(n, seed, 0.1) else { return Ok(()) };
        let out = depolarize(&state, eps).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.check_invariants(loose()).is_ok());
    }

    #[test]
    fn channel_commutes_with_collective_rotations(
        n in 2u32..16,
        seed in any::<u64>(),
        theta in -3.0f64..3.0,
        phi in 0.0f64..std::f64::consts::TAU,
        eps in 0.0f64..=1.0,
    ) {
        let Some(state) = random_state(n, seed, 0.0) else { return Ok(()) };
        let rot = GateSpec::rn(theta, phi);
        let a = depolarize(&apply_gate(&state, &rot).unwrap(), eps).unwrap();
        let b = apply_gate(&depolarize(&state, eps).unwrap(), &rot).unwrap();
        prop_assert!(a.distance(&b) < 1e-10, "distance {}", a.distance(&b));
    }

    #[test]
    fn inverse_rotations_cancel(n in 1u32..40, seed in any::<u64>(), theta in -3.2f64..3.2) {
        let Some(state) = random_state(n, seed, 0.05) else { return Ok(()) };
        let mut back = Circuit::new(n);
        back.push(GateSpec::rx(theta)).push(GateSpec::rx(-theta));
        back.push(GateSpec::oat(theta, "y")).push(GateSpec::oat(-theta, "y"));
        let out = apply_circuit(&back, &state).unwrap();
        prop_assert!(out.distance(&state) < 1e-10);
    }

    #[test]
    fn wineland_bounds_kitagawa_ueda(n in 2u32..40, theta in 0.01f64..0.4) {
        let mut c = Circuit::new(n);
        c.push(GateSpec::rn(std::f64::consts::FRAC_PI_2, 0.0)).push(GateSpec::oat(theta, "z"));
        let s = squeezing(&c.run().unwrap()).unwrap();
        prop_assert!(s.xi2_r >= s.xi2_s * (1.0 - 1e-12));
        prop_assert!(s.xi2_s > 0.0);
    }

    #[test]
    fn casimir_bounds_moments(n in 1u32..24, seed in any::<u64>()) {
        let Some(state) = random_state(n, seed, 0.2) else { return Ok(()) };
        let total: f64 = [Observable::Jx2, Observable::Jy2, Observable::Jz2]
            .iter()
            .map(|&o| expval(&state, o).re)
            .sum();
        let j = n as f64 / 2.0;
        prop_assert!(total <= j * (j + 1.0) + 1e-9);
        // odd N has no singlet, so j >= 1/2
        let floor = if n % 2 == 0 { 0.0 } else { 0.75 };
        prop_assert!(total >= floor - 1e-9);
    }

    #[test]
    fn sampling_is_reproducible(n in 1u32..12, seed in any::<u64>(), sample_seed in any::<u64>()) {
        let Some(state) = random_state(n, seed, 0.1) else { return Ok(()) };
        let a = sample(&state, 200, sample_seed).unwrap();
        let b = sample(&state, 200, sample_seed).unwrap();
        prop_assert_eq!(&a.counts, &b.counts);
        prop_assert_eq!(a.counts.iter().map(|c| c.1).sum::<u64>(), 200);
    }
}
