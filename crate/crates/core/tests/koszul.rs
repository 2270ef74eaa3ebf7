use ffrt_core::koszul_catalog::*;
use ffrt_core::sl2_characters::WeightCharacter;
use ffrt_core::verifier::check_b1_predictor;
use proptest::prelude::*;

#[test]
fn structural_checks_small_n() {
    for n in 4..=6u64 {
        let table = KCharacters::new(n, (n + 6) as usize);
        for j in 1..=n - 3 {
            for k in 1..=n - 3 {
                let checks = check_kjk(&table, j, k, (n + 6) as i64).unwrap();
                assert!(checks.all(), "n={n} j={j} k={k}: {checks:?}");
            }
        }
    }
}

#[test]
fn resolution_lengths() {
    for n in 4..=8u64 {
        for j in 1..=n - 3 {
            let terms = resolution_spec(n, j).unwrap();
            let deepest = terms.iter().map(|t| -t.position).max().unwrap();
            assert_eq!(deepest as u64, n - 1, "n={n} j={j}");
        }
    }
}

#[test]
fn predictor_agrees_with_bicomplex_n4() {
    for l in 1..=3 {
        let check = check_b1_predictor(4, 3, 1, 1, l).unwrap();
        assert!(check.mismatches.is_empty(), "l={l}: {:?}", check.mismatches);
        assert!(check.union_matches_interval(), "l={l}: {:?} vs {:?}", check.observed, check.interval);
    }
}

#[test]
fn predictor_agrees_with_bicomplex_n5() {
    for j in 1..=2 {
        for k in 1..=2 {
            for l in 1 + u64::from(k > j)..=4 {
                let check = check_b1_predictor(5, 3, j, k, l).unwrap();
                assert!(check.passed(), "j={j} k={k} l={l}: {check:?}");
            }
        }
    }
}

proptest! {
    #[test]
    fn syzygy_characters_are_symmetric(n in 4u64..8, j in 1u64..5, k in 1u64..5, d in 0i64..12) {
        prop_assume!(j <= n - 3 && k <= n - 3);
        let table = KCharacters::new(n, 12);
        let c = table.char_kjk(j, k, d).unwrap();
        prop_assert!(c.is_symmetric());
        let (bottom, _, _) = bottom_piece(j, k);
        if d < bottom {
            prop_assert_eq!(c, WeightCharacter::zero());
        }
    }
}
