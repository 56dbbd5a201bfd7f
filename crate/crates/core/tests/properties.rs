//! Randomized properties over seeded states. Seeds are drawn by proptest so
//! a failure shrinks to the smallest offending seed.

use proptest::prelude::*;

use corrclass::correlations::{
    discord, extract_cc_decomposition, extract_cq_decomposition, is_classical_quantum, mutual_information,
    von_neumann_entropy, Direction, DiscordConfig,
};
use corrclass::lhv::{
    build_from_separable, build_tight_from_cc, is_tight, kernel_geometry, reconstruct_state,
    riesz_from_response, verify_against_state,
};
use corrclass::operator::{hs_inner, partial_trace, partial_transpose_matrix, tensor, trace_distance, HermitianOperator};
use corrclass::quasiprob::{qubit_sic_frame, reconstruct, represent_state};
use corrclass::states::{
    from_cc_decomposition, from_separable_decomposition, partial_transpose, random_bipartite,
    random_cc_decomposition, random_density, random_separable_decomposition, random_unitary, BipartiteState,
    DensityMatrix,
};
use corrclass::Side;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 2)), Just((2, 3)), Just((3, 2)), Just((3, 3))]
}

fn local_rotation(s: &BipartiteState, seed: u64) -> BipartiteState {
    let (da, db) = s.dims();
    let u = random_unitary(da, seed).kronecker(&random_unitary(db, seed.wrapping_add(1)));
    BipartiteState::new(DensityMatrix::new(s.op().conjugate_by(&u)).unwrap(), (da, db)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_trace_of_product_recovers_factor(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let a = random_density(da, seed);
        let b = random_density(db, seed ^ 1);
        let ab = tensor(a.op(), b.op());
        let back_a = partial_trace(&ab, (da, db), Side::B).unwrap();
        let back_b = partial_trace(&ab, (da, db), Side::A).unwrap();
        prop_assert!(trace_distance(&back_a, a.op()).unwrap() < 1e-12);
        prop_assert!(trace_distance(&back_b, b.op()).unwrap() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involutive_and_trace_preserving(d in dims(), seed in any::<u64>()) {
        let s = random_bipartite(d, seed);
        let pt = partial_transpose(&s, Side::A);
        prop_assert!((pt.trace() - 1.0).abs() < 1e-12);
        let twice = partial_transpose_matrix(&pt, d, Side::A).unwrap();
        prop_assert!(trace_distance(&twice, s.op()).unwrap() < 1e-14);
        let pta = partial_transpose(&s, Side::A);
        let ptb = partial_transpose(&s, Side::B);
        // full transpose has the same spectrum, so PT_a and PT_b are isospectral
        let (ea, eb) = (pta.eigenvalues(), ptb.eigenvalues());
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn entropies_are_invariant_under_local_unitaries(d in dims(), seed in any::<u64>()) {
        let s = random_bipartite(d, seed);
        let r = local_rotation(&s, seed.wrapping_add(7));
        prop_assert!((von_neumann_entropy(s.rho()) - von_neumann_entropy(r.rho())).abs() < 1e-9);
        let (i_s, i_r) = (mutual_information(&s), mutual_information(&r));
        prop_assert!(i_s >= -1e-12);
        prop_assert!((i_s - i_r).abs() < 1e-9);
    }

    #[test]
    fn discord_is_bounded_by_mutual_information(seed in any::<u64>()) {
        let s = random_bipartite((2, 2), seed);
        let cfg = DiscordConfig { grid_resolution: 16, ..DiscordConfig::default() };
        for dir in [Direction::BGivenA, Direction::AGivenB] {
            let r = discord(&s, dir, &cfg).unwrap();
            prop_assert!(r.value >= -cfg.tolerance);
            prop_assert!(r.value <= r.mutual_information + 1e-12);
            prop_assert!((r.value - (r.mutual_information - r.j_value)).abs() < 2.0 * cfg.tolerance);
        }
    }

    #[test]
    fn cc_states_are_certified_and_extracted(d in dims(), seed in any::<u64>()) {
        let s = from_cc_decomposition(&random_cc_decomposition(d, seed));
        prop_assert!(is_classical_quantum(&s, Side::A, 1e-9));
        prop_assert!(is_classical_quantum(&s, Side::B, 1e-9));
        let cc = extract_cc_decomposition(&s, 1e-9).unwrap();
        prop_assert!(s.trace_distance(&from_cc_decomposition(&cc)).unwrap() < 1e-10);
        let cq = extract_cq_decomposition(&s, Side::B, 1e-9).unwrap();
        prop_assert!(s.trace_distance(&cq.to_state()).unwrap() < 1e-10);
    }

    #[test]
    fn cc_models_are_tight_on_both_sides(d in dims(), seed in any::<u64>()) {
        let m = build_tight_from_cc(&random_cc_decomposition(d, seed));
        for side in [Side::A, Side::B] {
            let report = is_tight(&m, side).unwrap();
            prop_assert!(report.tight);
            prop_assert_eq!(report.tight, kernel_geometry(&m, side).predicts_tight());
        }
    }

    #[test]
    fn separable_models_reproduce_their_state(d in dims(), terms in 1usize..5, seed in any::<u64>()) {
        let dec = random_separable_decomposition(d, terms, seed);
        let s = from_separable_decomposition(&dec);
        let m = build_from_separable(&dec);
        prop_assert!(verify_against_state(&m, &s, 50, seed).unwrap().max_abs_deviation < 1e-10);
        prop_assert!(reconstruct_state(&m).trace_distance(&s).unwrap() < 1e-10);
        for side in [Side::A, Side::B] {
            prop_assert_eq!(is_tight(&m, side).unwrap().tight, kernel_geometry(&m, side).predicts_tight());
        }
    }

    #[test]
    fn riesz_recovers_the_pairing_operator(d in 2usize..4, seed in any::<u64>()) {
        let f = random_density(d, seed);
        let recovered = riesz_from_response(d, |e: &HermitianOperator| hs_inner(f.op(), e).unwrap()).unwrap();
        prop_assert!(trace_distance(&recovered, f.op()).unwrap() < 1e-12);
    }

    #[test]
    fn sic_representation_reconstructs_the_state(seed in any::<u64>()) {
        let s = random_bipartite((2, 2), seed);
        let f = qubit_sic_frame();
        let w = represent_state(&s, &f, &f).unwrap();
        prop_assert!((w.weights().sum() - 1.0).abs() < 1e-12);
        prop_assert!(trace_distance(&reconstruct(&w, &f, &f), s.op()).unwrap() < 1e-12);
    }
}
