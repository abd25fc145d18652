//! Property tests for the structural invariants: channel trace/positivity
//! preservation, spectral completeness, probability completeness, and the
//! agreement laws between the two postulates.
//!
//! Random structures are generated from proptest-supplied seeds through the
//! crate's own seeded samplers, so failures shrink to a (dim, seed) pair.

use luders::hilbert::{
    max_abs_diff, partial_trace, pure_to_density, tensor, trace_distance, DensityOperator,
};
use luders::measurement::{
    bayes_check, born_probabilities, build_refinement, diagonalizing_block_bases,
    luders_nonselective, vn_refined_nonselective, GammaStrategy,
};
use luders::random::{
    random_density, random_hermitian, random_observable, random_ranks, random_refinement_bases,
    random_state, seeded_rng,
};
use luders::spectral::spectral_decompose;
use luders::tol::Tolerances;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn density_from_pure_state_is_idempotent_projection(dim in 2usize..10, seed: u64) {
        let psi = random_state(dim, &mut seeded_rng(seed));
        let rho = pure_to_density(&psi);
        let m = rho.matrix();
        prop_assert!(max_abs_diff(&(m * m), m) < 1e-12);
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_is_associative(seed: u64) {
        let mut rng = seeded_rng(seed);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let c = random_hermitian(2, &mut rng);
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!(max_abs_diff(&left, &right) < 1e-14);
    }

    #[test]
    fn partial_trace_inverts_tensor_product(da in 2usize..5, db in 2usize..5, seed: u64) {
        let mut rng = seeded_rng(seed);
        let rho_a = random_density(da, &mut rng);
        let rho_b = random_density(db, &mut rng);
        let joint = DensityOperator::new(tensor(rho_a.matrix(), rho_b.matrix())).unwrap();
        let back_a = partial_trace(&joint, &[da, db], 0).unwrap();
        let back_b = partial_trace(&joint, &[da, db], 1).unwrap();
        prop_assert!(max_abs_diff(back_a.matrix(), rho_a.matrix()) < 1e-10);
        prop_assert!(max_abs_diff(back_b.matrix(), rho_b.matrix()) < 1e-10);
    }

    #[test]
    fn projection_norm_is_a_probability(dim in 2usize..10, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, dim, &mut rng);
        let obs = random_observable(dim, &ranks, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng);
        for i in 0..obs.outcome_count() {
            let p = obs.projection_norm_sq(i, &psi).unwrap();
            let projected = obs.projector(i).project(&psi).unwrap();
            let expect = psi.amplitudes().dotc(&projected).re;
            prop_assert!((p - expect).abs() < 1e-12);
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&p));
        }
    }

    #[test]
    fn spectral_round_trip_and_completeness(dim in 2usize..=16, seed: u64) {
        let mut rng = seeded_rng(seed);
        // half the cases get planted degeneracies through a known partition
        let m = if seed % 2 == 0 {
            random_hermitian(dim, &mut rng)
        } else {
            let ranks = random_ranks(dim, 8, &mut rng);
            random_observable(dim, &ranks, &mut rng).unwrap().matrix()
        };
        let obs = spectral_decompose(&m, 1e-8).unwrap();
        prop_assert!(obs.reconstruction_error(&m) <= 1e-9);
        obs.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn planted_degeneracies_are_recovered(dim in 4usize..=12, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, 4, &mut rng);
        let planted = random_observable(dim, &ranks, &mut rng).unwrap();
        let recovered = spectral_decompose(&planted.matrix(), 1e-8).unwrap();
        prop_assert_eq!(recovered.outcome_count(), planted.outcome_count());
        for i in 0..planted.outcome_count() {
            prop_assert_eq!(recovered.rank(i), planted.rank(i));
            prop_assert!((recovered.eigenvalue(i) - planted.eigenvalue(i)).abs() < 1e-9);
            prop_assert!(max_abs_diff(
                recovered.projector(i).matrix(),
                planted.projector(i).matrix()
            ) < 1e-8);
        }
    }

    #[test]
    fn born_probabilities_are_complete(dim in 2usize..=10, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, dim, &mut rng);
        let obs = random_observable(dim, &ranks, &mut rng).unwrap();
        let rho = if seed % 2 == 0 {
            pure_to_density(&random_state(dim, &mut rng))
        } else {
            random_density(dim, &mut rng)
        };
        let probs = born_probabilities(&obs, &rho).unwrap();
        let total: f64 = probs.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for (_, p) in probs {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&p));
        }
    }

    #[test]
    fn luders_channel_is_idempotent_and_trace_preserving(dim in 2usize..=10, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, dim, &mut rng);
        let obs = random_observable(dim, &ranks, &mut rng).unwrap();
        let rho = random_density(dim, &mut rng);
        let once = luders_nonselective(&obs, &rho).unwrap();
        let twice = luders_nonselective(&obs, &once).unwrap();
        prop_assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-10);
        prop_assert!((once.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(once.eigenvalues().first().copied().unwrap() > -1e-10);
    }

    #[test]
    fn refinement_does_not_change_parent_statistics(dim in 3usize..=8, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, dim - 1, &mut rng);
        let obs = random_observable(dim, &ranks, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng);
        let reference = born_probabilities(&obs, &pure_to_density(&psi)).unwrap();
        let bases = random_refinement_bases(&obs, &mut rng);
        let d = build_refinement(&obs, Some(bases), GammaStrategy::IndexFraction).unwrap();
        let after = vn_refined_nonselective(&d, &psi).unwrap();
        let probs = born_probabilities(&obs, &after).unwrap();
        for ((_, a), (_, b)) in reference.iter().zip(&probs) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn aligned_refinement_reproduces_luders_channel(dim in 3usize..=8, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, dim - 1, &mut rng);
        let obs = random_observable(dim, &ranks, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng);
        let rho = pure_to_density(&psi);
        let bases = diagonalizing_block_bases(&obs, &rho).unwrap();
        let d = build_refinement(&obs, Some(bases), GammaStrategy::IndexFraction).unwrap();
        let refined = vn_refined_nonselective(&d, &psi).unwrap();
        let luders = luders_nonselective(&obs, &rho).unwrap();
        prop_assert!(max_abs_diff(refined.matrix(), luders.matrix()) < 1e-10);
    }

    #[test]
    fn bayes_identity_holds_for_block_probes(dim in 3usize..=12, seed: u64) {
        let mut rng = seeded_rng(seed);
        let ranks = random_ranks(dim, dim - 1, &mut rng);
        let obs = random_observable(dim, &ranks, &mut rng).unwrap();
        let psi = random_state(dim, &mut rng);
        let d = build_refinement(&obs, None, GammaStrategy::IndexFraction).unwrap();
        let block = rng.gen_range(0..obs.outcome_count());
        if obs.projection_norm_sq(block, &psi).unwrap() <= 1e-12 {
            return Ok(());
        }
        let coeffs = random_state(obs.rank(block), &mut rng);
        let phi = luders::StateVector::normalized(obs.basis(block) * coeffs.amplitudes()).unwrap();
        let chk = bayes_check(&d, &psi, block, &phi).unwrap();
        prop_assert!(chk.residual <= 1e-12, "residual {}", chk.residual);
    }
}

// Deterministic instance of the averaging law: equality holds exactly when
// every block basis diagonalizes Pᵢ ρ Pᵢ, and a generic rotation breaks it
// by a visible margin. (The inequality direction is generic rather than
// universal, so it is pinned to fixed seeds.)
#[test]
fn averaging_agrees_only_in_the_diagonalizing_case() {
    let mut rng = seeded_rng(2024);
    let obs = random_observable(6, &[3, 2, 1], &mut rng).unwrap();
    let psi = random_state(6, &mut rng);
    let rho = pure_to_density(&psi);
    let luders = luders_nonselective(&obs, &rho).unwrap();

    let aligned = diagonalizing_block_bases(&obs, &rho).unwrap();
    let d = build_refinement(&obs, Some(aligned), GammaStrategy::IndexFraction).unwrap();
    let refined = vn_refined_nonselective(&d, &psi).unwrap();
    assert!(max_abs_diff(refined.matrix(), luders.matrix()) < 1e-10);

    let rotated = random_refinement_bases(&obs, &mut rng);
    let d = build_refinement(&obs, Some(rotated), GammaStrategy::IndexFraction).unwrap();
    let refined = vn_refined_nonselective(&d, &psi).unwrap();
    let dist = trace_distance(&refined, &luders).unwrap();
    assert!(dist > 1e-3, "generic rotation should break the equality, got {dist}");
}
