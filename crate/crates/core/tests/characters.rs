use ffrt_core::sl2_characters::*;
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

fn recompose(m: &TiltingMultiset, p: u64) -> WeightCharacter {
    m.iter()
        .fold(WeightCharacter::zero(), |acc, (&l, &c)| acc.add(&char_tilting(l, p).unwrap().scale(c)))
}

proptest! {
    #[test]
    fn tilting_characters_are_weyl_filtered(j in 0u64..60, p in prime()) {
        let t = char_tilting(j, p).unwrap();
        prop_assert!(t.is_symmetric());
        prop_assert_eq!(t.highest_weight(), Some(j as i64));
        let weyl = weyl_expand(&t).unwrap();
        prop_assert_eq!(weyl.get(&j).copied(), Some(1));
        prop_assert!(weyl.values().all(|&c| c >= 0));
        prop_assert!(weyl.keys().all(|&m| m <= j && (j - m) % 2 == 0));
    }

    #[test]
    fn tensor_products_decompose_exactly(a in 0u64..25, b in 0u64..25, p in prime()) {
        let c = char_tilting(a, p).unwrap().tensor(&char_tilting(b, p).unwrap());
        let dec = decompose_into_tiltings(&c, p).unwrap();
        prop_assert_eq!(recompose(&dec, p), c);
    }

    #[test]
    fn pieri_matches_peeling(p in prop::sample::select(vec![3u64, 5, 7]), offset in 0u64..19) {
        let a = p - 1 + offset % (2 * p - 1);
        let c = char_tilting(1, p).unwrap().tensor(&char_tilting(a, p).unwrap());
        prop_assert_eq!(tilting_pieri(a, p).unwrap(), decompose_into_tiltings(&c, p).unwrap());
    }

    #[test]
    fn fusion_is_commutative_with_unit(p in prop::sample::select(vec![3u64, 5, 7, 11]), a in 0u64..10, b in 0u64..10) {
        prop_assume!(a + 2 <= p && b + 2 <= p);
        prop_assert_eq!(fusion_product(&[a, b], p).unwrap(), fusion_product(&[b, a], p).unwrap());
        let alone: TiltingMultiset = [(a, 1)].into_iter().collect();
        prop_assert_eq!(fusion_product(&[0, a], p).unwrap(), alone);
    }

    #[test]
    fn weyl_expansion_roundtrip(ms in prop::collection::vec((0u64..12, 1u64..4), 1..5)) {
        let mut c = WeightCharacter::zero();
        for &(m, k) in &ms {
            c = c.add(&char_weyl(m as i64).unwrap().scale(k));
        }
        let back = weyl_expand(&c).unwrap();
        let rebuilt = back.iter().fold(WeightCharacter::zero(), |acc, (&m, &k)| {
            acc.add(&char_weyl(m as i64).unwrap().scale(k as u64))
        });
        prop_assert_eq!(rebuilt, c);
    }

    #[test]
    fn polynomial_ring_dimensions(n in 1usize..6, d in 0usize..8) {
        let chars = polynomial_ring_characters(n, d);
        prop_assert_eq!(chars[d].dim(), binomial((2 * n + d - 1) as u64, d as u64));
        prop_assert!(chars[d].is_symmetric());
    }
}

#[test]
fn steinberg_modules_are_simple_tiltings() {
    for p in [2u64, 3, 5, 7] {
        let st = char_tilting(p - 1, p).unwrap();
        assert_eq!(st, char_weyl(p as i64 - 1).unwrap());
        assert_eq!(st.dim(), p);
    }
}
