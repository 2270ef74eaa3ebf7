use ffrt_core::sl2_characters::{char_weyl, WeightCharacter};
use ffrt_core::summand_catalog::{catalog_s_gr, Params, SummandKind};
use ffrt_core::verifier::*;
use proptest::prelude::*;

const D: u64 = 14;

fn params() -> Params {
    Params { n: 4, p: 3, r: 1, ..Params::default() }
}

/// Sum of shifted summands `(kind, twist in own grading, multiplicity)`.
fn synthesize(parts: &[(SummandKind, u64, u64)]) -> Vec<WeightCharacter> {
    let mut out = vec![WeightCharacter::zero(); D as usize + 1];
    for &(kind, twist, mult) in parts {
        let own = summand_graded_character(kind, 1, 4, 3, D).unwrap();
        for d in twist..=D {
            out[d as usize] = out[d as usize].add(&own[(d - twist) as usize].scale(mult));
        }
    }
    out
}

fn parts() -> impl Strategy<Value = Vec<(SummandKind, u64, u64)>> {
    let kind = prop::sample::select(vec![SummandKind::TiltFree(0), SummandKind::TiltFree(1), SummandKind::K(1, 1)]);
    prop::collection::vec((kind, 0u64..6, 1u64..4), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthetic_targets_are_consistent(parts in parts()) {
        let target = synthesize(&parts);
        let report = verify_target(Scenario::SGr, &params(), &target, &catalog_s_gr(4, 3, 1).unwrap(), DEFAULT_BUDGET).unwrap();
        prop_assert!(report.consistent);
        prop_assert!(report.residual_degrees.is_empty());
        for e in &report.entries {
            if let EntryStatus::Confirmed { at } = e.status {
                prop_assert!(at <= D);
                prop_assert!(e.multiplicity.unwrap_or(0) > 0);
            }
        }
    }

    #[test]
    fn truncation_keeps_consistency(parts in parts(), cut in 0u64..D) {
        let target = synthesize(&parts);
        let catalog = catalog_s_gr(4, 3, 1).unwrap();
        let short = verify_target(Scenario::SGr, &params(), &target[..=cut as usize], &catalog, DEFAULT_BUDGET).unwrap();
        prop_assert!(short.consistent);
    }

    #[test]
    fn confirmation_is_monotone(parts in parts(), cut in 0u64..D) {
        let target = synthesize(&parts);
        let catalog = catalog_s_gr(4, 3, 1).unwrap();
        let full = verify_target(Scenario::SGr, &params(), &target, &catalog, DEFAULT_BUDGET).unwrap();
        let short = verify_target(Scenario::SGr, &params(), &target[..=cut as usize], &catalog, DEFAULT_BUDGET).unwrap();
        for (a, b) in short.entries.iter().zip(&full.entries) {
            if let EntryStatus::Confirmed { at } = a.status {
                prop_assert_eq!(b.status, EntryStatus::Confirmed { at });
            }
        }
    }

    #[test]
    fn foreign_weight_is_rejected(parts in parts(), degree in 0u64..=D, weight in 3u64..8) {
        let mut target = synthesize(&parts);
        target[degree as usize] = target[degree as usize].add(&char_weyl(weight as i64).unwrap());
        let report = verify_target(Scenario::SGr, &params(), &target, &catalog_s_gr(4, 3, 1).unwrap(), DEFAULT_BUDGET).unwrap();
        prop_assert!(!report.consistent);
        let failure = report.failure.unwrap();
        prop_assert!(failure.degree <= degree);
        prop_assert!(report.residual_degrees.contains(&degree));
    }
}

#[test]
fn s_invariants_n4_truncations() {
    let at12 = verify_decomposition(Scenario::SGr, &params(), 12, DEFAULT_BUDGET).unwrap();
    assert!(at12.consistent);
    assert_eq!(at12.entry(SummandKind::TiltFree(0)).unwrap().status, EntryStatus::Confirmed { at: 0 });
    assert_eq!(at12.entry(SummandKind::TiltFree(1)).unwrap().status, EntryStatus::Confirmed { at: 7 });
    assert_eq!(at12.entry(SummandKind::K(1, 1)).unwrap().status, EntryStatus::Unreached);

    let at13 = verify_decomposition(Scenario::SGr, &params(), 13, DEFAULT_BUDGET).unwrap();
    let k = at13.entry(SummandKind::K(1, 1)).unwrap();
    assert_eq!(k.status, EntryStatus::Confirmed { at: 13 });
    assert_eq!(k.twist, Some(1));
}

#[test]
fn tilting_tensor_scenarios() {
    for (j, forced_k) in [(1u64, true), (2, false), (3, false), (5, false)] {
        let ps = Params { j: Some(j), ..params() };
        let report = verify_decomposition(Scenario::TjsG1, &ps, 12, DEFAULT_BUDGET).unwrap();
        assert!(report.consistent, "j={j}");
        if forced_k {
            assert_eq!(report.entry(SummandKind::K(1, 1)).unwrap().status, EntryStatus::Confirmed { at: 12 });
        }
    }
}

#[test]
fn syzygy_invariants_scenario() {
    let ps = Params { j: Some(1), k: Some(1), ..params() };
    let report = verify_decomposition(Scenario::KjkG1, &ps, 12, DEFAULT_BUDGET).unwrap();
    assert!(report.consistent);
}

#[test]
fn predictor_scenario_n4() {
    let report = verify_decomposition(Scenario::B1Predictor, &params(), 0, DEFAULT_BUDGET).unwrap();
    assert!(report.consistent);
    assert!(report.entries.iter().all(|e| e.status != EntryStatus::Falsified));
}
