//! Frozen oracle outputs, cross-checked against the character formulas
//! where an independent formula exists.

use ffrt_core::koszul_catalog::KCharacters;
use ffrt_core::polynomial_oracle::*;
use ffrt_core::sl2_characters::WeightCharacter;
use ffrt_core::verifier::cell_decomposition;

fn chi(pairs: &[(i64, u64)]) -> WeightCharacter {
    WeightCharacter::from_pairs(pairs.iter().copied())
}

#[test]
fn g1_invariant_cells_n4_p3() {
    let target: Vec<_> = (0..=16).map(|d| gr_invariants_s(4, 3, 1, d).unwrap()).collect();
    let cells: Vec<_> = cell_decomposition(&target, 4, 3).unwrap().into_iter().collect();
    let frozen = vec![
        ((0, 0), 1),
        ((2, 0), 6),
        ((4, 0), 20),
        ((6, 0), 44),
        ((7, 1), 4),
        ((8, 0), 69),
        ((9, 1), 4),
        ((10, 0), 60),
        ((12, 0), 36),
        ((13, 1), -4),
        ((14, 0), 6),
        ((15, 1), -4),
        ((16, 0), 1),
    ];
    assert_eq!(cells, frozen);
}

#[test]
fn kernel_invariants_k11_n4() {
    let res = build_equivariant_resolution(4, 1, 3, 10).unwrap();
    let got = kernel_invariants(&res, 1, 1, 10).unwrap();
    let frozen = [
        chi(&[]),
        chi(&[]),
        chi(&[]),
        chi(&[(0, 4)]),
        chi(&[]),
        chi(&[(0, 20)]),
        chi(&[(-1, 16), (1, 16)]),
        chi(&[(0, 60)]),
        chi(&[(-1, 81), (1, 81)]),
        chi(&[(-2, 40), (0, 180), (2, 40)]),
        chi(&[(-1, 246), (1, 246)]),
    ];
    assert_eq!(got, frozen);
}

#[test]
fn resolution_kernels_match_syzygy_characters_n4() {
    let res = build_equivariant_resolution(4, 1, 3, 8).unwrap();
    let table = KCharacters::new(4, 8);
    for (d, c) in res.kernels[0].iter().enumerate() {
        assert_eq!(*c, table.char_kjk(1, 1, d as i64).unwrap(), "degree {d}");
    }
}

#[test]
fn tilting_tensor_cells_n4_j2() {
    let module = realize_tilting(2, 3, 1).unwrap();
    let target: Vec<_> = (0..=12).map(|d| graded_invariants_of_tensor(&module, 4, 1, d).unwrap()).collect();
    let cells: Vec<_> = cell_decomposition(&target, 4, 3).unwrap().into_iter().collect();
    let frozen = vec![
        ((2, 0), 10),
        ((4, 0), 45),
        ((5, 1), 16),
        ((6, 0), 126),
        ((7, 1), 36),
        ((8, 0), 156),
        ((8, 2), 1),
        ((9, 1), 36),
        ((10, 0), 126),
        ((11, 1), 16),
        ((12, 0), 45),
    ];
    assert_eq!(cells, frozen);
}
