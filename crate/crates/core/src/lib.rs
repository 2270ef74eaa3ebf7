//! Exact computations for Frobenius-twisted invariants of `SL2` acting on
//! `S = Sym(F (x) V)` in characteristic `p`: tilting characters, a brute-force
//! F_p oracle for invariants and B_1-cohomology, the syzygy modules `K_jk`,
//! catalogs of indecomposable summands, and a verifier that matches oracle
//! data against catalogs.
#![cfg_attr(not(feature = "std"), no_std)]
extern crate alloc;

pub mod fp_linear;
pub mod koszul_catalog;
pub mod sl2_characters;
pub mod polynomial_oracle;
pub mod summand_catalog;
pub mod verifier;

/// Map over independent work items, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> alloc::vec::Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R>(items: &[T], f: impl Fn(&T) -> R) -> alloc::vec::Vec<R> {
    items.iter().map(f).collect()
}
