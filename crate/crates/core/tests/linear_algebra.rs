use ffrt_core::fp_linear::{binom_mod, inv_mod, FpMatrix};
use proptest::prelude::*;

fn matrix(max_dim: usize) -> impl Strategy<Value = (u64, Vec<Vec<i64>>)> {
    (prop::sample::select(vec![2u64, 3, 5, 7, 101]), 1..=max_dim, 1..=max_dim).prop_flat_map(|(p, r, c)| {
        let entries = prop::collection::vec(prop::collection::vec(-3i64..=3, c), r);
        (Just(p), entries)
    })
}

proptest! {
    #[test]
    fn sparse_rank_matches_dense_rank((p, rows) in matrix(7)) {
        let m = FpMatrix::from_dense(p, &rows).unwrap();
        prop_assert_eq!(m.rank(), m.dense_rank());
    }

    #[test]
    fn kernel_basis_is_annihilated_and_complete((p, rows) in matrix(7)) {
        let m = FpMatrix::from_dense(p, &rows).unwrap();
        let kernel = m.kernel_basis();
        prop_assert_eq!(kernel.len(), m.cols() - m.rank());
        for v in &kernel {
            prop_assert!(m.mul_vec(v).iter().all(|&x| x == 0));
        }
        if !kernel.is_empty() {
            let basis = FpMatrix::from_columns(m.p(), m.cols(), &kernel);
            prop_assert_eq!(basis.rank(), kernel.len());
        }
    }

    #[test]
    fn inverse_is_two_sided((p, rows) in matrix(6)) {
        let n = rows.len().min(rows[0].len());
        let square: Vec<Vec<i64>> = rows.iter().take(n).map(|r| r[..n].to_vec()).collect();
        let m = FpMatrix::from_dense(p, &square).unwrap();
        match m.inverse() {
            Ok(inv) => {
                let id = FpMatrix::identity(p, n).unwrap();
                prop_assert_eq!(m.mul(&inv).unwrap(), id.clone());
                prop_assert_eq!(inv.mul(&m).unwrap(), id);
            }
            Err(_) => prop_assert!(m.rank() < n),
        }
    }

    #[test]
    fn transpose_preserves_rank((p, rows) in matrix(7)) {
        let m = FpMatrix::from_dense(p, &rows).unwrap();
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn lucas_agrees_with_exact_binomials(n in 0u64..40, k in 0u64..40, p in prop::sample::select(vec![2u32, 3, 5, 7, 11])) {
        let exact = if k > n { 0 } else { ffrt_core::sl2_characters::binomial(n, k) };
        prop_assert_eq!(binom_mod(n, k, p) as u64, exact % p as u64);
    }

    #[test]
    fn modular_inverse(a in 1u32..1000, p in prop::sample::select(vec![3u32, 5, 7, 101, 65521])) {
        prop_assume!(a % p != 0);
        prop_assert_eq!((a as u64 % p as u64) * inv_mod(a % p, p) as u64 % p as u64, 1);
    }
}
