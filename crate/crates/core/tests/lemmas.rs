mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qdel::codes::{build_highrate_partition, HighRateParams};
use qdel::delsets::DeletionCellIndex;
use qdel::partition::{check_conditions, FamilySet};
use qdel::quantum::{delete_qubit, encode, random_message, CodeInstance, SparseState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn valid_codes() -> Vec<CodeInstance> {
    let mut out = vec![CodeInstance::new(shortest_family()).unwrap()];
    for (e, n) in [(1, 4), (2, 4)] {
        let fam = build_highrate_partition(&HighRateParams::new(e, n).unwrap()).unwrap();
        out.push(CodeInstance::new(fam).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn structural_lemmas_hold(seed in any::<u64>()) {
        let fam = random_family(&mut ChaCha8Rng::seed_from_u64(seed));
        let (bad, _) = lemma_violations(&fam);
        prop_assert!(bad.is_empty(), "{fam:?}: {bad:?}");
    }

    #[test]
    fn brs_stability_ignores_cell_order(seed in any::<u64>()) {
        let fam = random_family(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut cells = fam.cells().to_vec();
        cells.reverse();
        let rev = FamilySet::new(fam.n(), cells).unwrap();
        prop_assert_eq!(
            qdel::partition::is_brs_stable(&fam).stable,
            qdel::partition::is_brs_stable(&rev).stable
        );
        prop_assert_eq!(check_conditions(&fam).all_hold(), check_conditions(&rev).all_hold());
    }

    #[test]
    fn deletion_matches_dense_partial_trace(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(n, &mut rng);
        let dense = dense_vector(&psi);
        for i in 1..=n {
            let ens = delete_qubit(&psi, i).unwrap();
            let diff = max_abs_diff(&dense_density(&ens), &dense_partial_trace(&dense, n, i));
            prop_assert!(diff <= 1e-12, "i={} diff={}", i, diff);
        }
    }

    #[test]
    fn encoder_is_isometric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for code in valid_codes() {
            let (m, q) = (code.dimension(), code.message_qubits());
            let a = random_message(m, q, &mut rng).unwrap();
            let b = random_message(m, q, &mut rng).unwrap();
            let lhs = encode(&code, &a).unwrap().inner(&encode(&code, &b).unwrap());
            prop_assert!((lhs - a.inner(&b)).norm() <= 1e-12);
        }
    }

    #[test]
    fn valid_random_families_round_trip(seed in any::<u64>()) {
        let fam = random_family(&mut ChaCha8Rng::seed_from_u64(seed));
        if let Ok(code) = CodeInstance::new(fam) {
            let report = qdel::quantum::roundtrip_verify(&code, 3, seed).unwrap();
            prop_assert!(report.passed(), "{}", report.to_tsv());
        }
    }
}

#[test]
fn basis_states_are_orthonormal() {
    for code in valid_codes() {
        for label in code.reachable_outcomes() {
            for m1 in 0..code.dimension() {
                for m2 in 0..code.dimension() {
                    let a = code.basis_state(label, m1).unwrap();
                    let b = code.basis_state(label, m2).unwrap();
                    let expect = if m1 == m2 { 1.0 } else { 0.0 };
                    assert!((a.inner(b) - Complex64::new(expect, 0.0)).norm() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn random_generator_reaches_every_hypothesis() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = Coverage::default();
    for _ in 0..400 {
        let (_, cov) = lemma_violations(&random_family(&mut rng));
        seen.c1 |= cov.c1;
        seen.c2 |= cov.c2;
        seen.c3 |= cov.c3;
        seen.dense |= cov.dense;
    }
    assert!(seen.c1 && seen.c2 && seen.c3 && seen.dense, "{seen:?}");
}

#[test]
fn code_states_match_dense_partial_trace() {
    let code = CodeInstance::new(shortest_family()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut messages: Vec<SparseState> = (0..2)
        .map(|m| SparseState::message_basis(m, 1).unwrap())
        .collect();
    messages.extend((0..10).map(|_| random_message(2, 1, &mut rng).unwrap()));
    for msg in messages {
        let psi = encode(&code, &msg).unwrap();
        let dense = dense_vector(&psi);
        for i in 1..=4 {
            let ens = delete_qubit(&psi, i).unwrap();
            assert!(
                max_abs_diff(&dense_density(&ens), &dense_partial_trace(&dense, 4, i)) <= 1e-12
            );
        }
    }
}

#[test]
fn unreachable_label_has_no_basis_state() {
    let code = CodeInstance::new(shortest_family()).unwrap();
    let idx = DeletionCellIndex::new(
        qdel::delsets::PositionSet::new([1]).unwrap(),
        qdel::Bit::Zero,
    );
    assert!(code.basis_state(&idx, 0).is_none());
}
