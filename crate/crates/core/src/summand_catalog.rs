//! Catalogs of indecomposable Frobenius summands, as lists of labelled entries
//! with nonzero/possible flags, plus the interval dynamics for `(T(j) (x) S)^{G_1}`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::fp_linear::is_prime;
use crate::koszul_catalog::weight_interval;
use crate::sl2_characters::{
    char_tilting, decompose_into_tiltings, g1_invariants_tilting, tilting_normal_form, CharacterError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Character(#[from] CharacterError),
}

/// Kind of an indecomposable summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SummandKind {
    /// `T(l)^Fr (x) S^{p^r}`, tilt-free over the Frobenius image.
    TiltFree(u64),
    /// Frobenius twist of the syzygy module `K_jk`.
    K(u64, u64),
    /// Module of covariants `S{l} = (S^l V (x) S)^G`.
    Cov(u64),
    /// Invariants `K_jk^G`, the R-level counterpart of `K(j, k)`.
    CovK(u64, u64),
    /// Sheaf label `S^l Q` on the Grassmannian.
    SheafSymQ(u64),
    /// Sheaf label for the extension sheaf indexed by `(j, k)`.
    SheafK(u64, u64),
}

impl SummandKind {
    pub fn name(&self) -> &'static str {
        match self {
            SummandKind::TiltFree(_) => "TiltFree",
            SummandKind::K(..) => "K",
            SummandKind::Cov(_) => "Cov",
            SummandKind::CovK(..) => "CovK",
            SummandKind::SheafSymQ(_) => "SheafSymQ",
            SummandKind::SheafK(..) => "SheafK",
        }
    }

    pub fn indices(&self) -> Vec<u64> {
        match *self {
            SummandKind::TiltFree(l) | SummandKind::Cov(l) | SummandKind::SheafSymQ(l) => alloc::vec![l],
            SummandKind::K(j, k) | SummandKind::CovK(j, k) | SummandKind::SheafK(j, k) => alloc::vec![j, k],
        }
    }

    /// Inverse of (`name`, `indices`).
    pub fn from_parts(name: &str, indices: &[u64]) -> Option<SummandKind> {
        Some(match (name, indices) {
            ("TiltFree", [l]) => SummandKind::TiltFree(*l),
            ("K", [j, k]) => SummandKind::K(*j, *k),
            ("Cov", [l]) => SummandKind::Cov(*l),
            ("CovK", [j, k]) => SummandKind::CovK(*j, *k),
            ("SheafSymQ", [l]) => SummandKind::SheafSymQ(*l),
            ("SheafK", [j, k]) => SummandKind::SheafK(*j, *k),
            _ => return None,
        })
    }
}

impl fmt::Display for SummandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(|i| alloc::format!("{i}")).collect();
        write!(f, "{}({})", self.name(), idx.join(","))
    }
}

/// How much the catalog asserts about a multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Multiplicity {
    Exact(u64),
    UnknownPositive,
    Possible,
}

impl Multiplicity {
    pub fn flag(&self) -> &'static str {
        match self {
            Multiplicity::Possible => "possible",
            _ => "nonzero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummandInstance {
    pub kind: SummandKind,
    pub frobenius_level: u32,
    /// Degree shift; `None` when the catalog only holds up to degree.
    pub twist: Option<i64>,
    pub multiplicity: Multiplicity,
}

impl SummandInstance {
    fn new(kind: SummandKind, r: u32, nonzero: bool) -> Self {
        SummandInstance {
            kind,
            frobenius_level: r,
            twist: None,
            multiplicity: if nonzero { Multiplicity::UnknownPositive } else { Multiplicity::Possible },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params {
    pub n: u64,
    pub p: u64,
    pub r: u32,
    pub j: Option<u64>,
    pub k: Option<u64>,
    /// Primes below `max(n - 2, 3)` were admitted; catalog results are not guaranteed.
    pub allow_small_p: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub params: Params,
    pub catalog: Vec<SummandInstance>,
    pub notes: Vec<String>,
}

/// Check that `p` is prime and `p >= max(n - 2, 3)`, with `n >= 4`.
pub fn check_hypotheses(n: u64, p: u64) -> Result<(), CatalogError> {
    if !is_prime(p) {
        return Err(CatalogError::NotPrime(p));
    }
    if n < 4 {
        return Err(CatalogError::Hypothesis(alloc::format!("n >= 4 (got n = {n})")));
    }
    if p < (n - 2).max(3) {
        return Err(CatalogError::Hypothesis(alloc::format!("p >= max(n - 2, 3) (got n = {n}, p = {p})")));
    }
    Ok(())
}

fn admissible(n: u64, p: u64, allow_small_p: bool) -> Result<(), CatalogError> {
    if !allow_small_p {
        return check_hypotheses(n, p);
    }
    if !is_prime(p) {
        return Err(CatalogError::NotPrime(p));
    }
    if n < 4 {
        return Err(CatalogError::Hypothesis(alloc::format!("n >= 4 (got n = {n})")));
    }
    Ok(())
}

/// Summands of `S` over `S^{p^r}` after taking `G_r`-invariants.
pub fn catalog_s_gr(n: u64, p: u64, r: u32) -> Result<Vec<SummandInstance>, CatalogError> {
    catalog_s_gr_unchecked(n, p, r, false)
}

/// [`catalog_s_gr`] with the bound on `p` optionally waived (primality and `n >= 4` still required).
pub fn catalog_s_gr_unchecked(n: u64, p: u64, r: u32, allow_small_p: bool) -> Result<Vec<SummandInstance>, CatalogError> {
    admissible(n, p, allow_small_p)?;
    if r == 0 {
        return Err(CatalogError::Hypothesis("r >= 1".into()));
    }
    let mut out: Vec<SummandInstance> = (0..=n - 3).map(|l| SummandInstance::new(SummandKind::TiltFree(l), r, true)).collect();
    for j in 1..=n - 3 {
        if r == 1 {
            out.push(SummandInstance::new(SummandKind::K(j, j), r, true));
        } else {
            for k in 1..=n - 3 {
                out.push(SummandInstance::new(SummandKind::K(j, k), r, true));
            }
        }
    }
    Ok(out)
}

/// The same list on the level of the invariant ring `R = S^G`.
pub fn catalog_r(n: u64, p: u64, r: u32) -> Result<Vec<SummandInstance>, CatalogError> {
    catalog_r_unchecked(n, p, r, false)
}

pub fn catalog_r_unchecked(n: u64, p: u64, r: u32, allow_small_p: bool) -> Result<Vec<SummandInstance>, CatalogError> {
    Ok(catalog_s_gr_unchecked(n, p, r, allow_small_p)?
        .into_iter()
        .map(|mut s| {
            s.kind = match s.kind {
                SummandKind::TiltFree(l) => SummandKind::Cov(l),
                SummandKind::K(j, k) => SummandKind::CovK(j, k),
                other => other,
            };
            s
        })
        .collect())
}

/// `m = floor(((n - 2)(p - 1) + j) / p)`, the top tilt-free index in `(T(j) (x) S)^{G_1}`.
pub fn top_tilt_free_index(n: u64, p: u64, j: u64) -> u64 {
    ((n - 2) * (p - 1) + j) / p
}

/// Summands of `(T(j) (x) S)^{G_1}` over `S^p`.
pub fn decompose_tjs_g1(n: u64, p: u64, j: u64) -> Result<DecompositionReport, CatalogError> {
    decompose_tjs_g1_unchecked(n, p, j, false)
}

pub fn decompose_tjs_g1_unchecked(n: u64, p: u64, j: u64, allow_small_p: bool) -> Result<DecompositionReport, CatalogError> {
    admissible(n, p, allow_small_p)?;
    let m = top_tilt_free_index(n, p, j);
    let mut catalog = Vec::new();
    let mut notes = Vec::new();
    if j + 1 < p {
        catalog.extend((0..=m).map(|l| SummandInstance::new(SummandKind::TiltFree(l), 1, true)));
        catalog.extend((1..=n - 3).map(|l| SummandInstance::new(SummandKind::K(l, l), 1, true)));
        notes.push("K(l,l) twist witnesses: bottom at degree p(l+2)+d_t".into());
    } else {
        let (_, j2) = tilting_normal_form(j, p);
        catalog.extend((0..=m).map(|l| SummandInstance::new(SummandKind::TiltFree(l), 1, l >= j2)));
        notes.push(alloc::format!("nonzero range [{j2}, {m}]"));
    }
    Ok(DecompositionReport { params: Params { n, p, r: 1, j: Some(j), k: None, allow_small_p }, catalog, notes })
}

/// Lower end of the tilt-free range after one step of the interval map.
pub fn interval_lower(p: u64, j: u64) -> u64 {
    (j + 1).saturating_sub(p) / p
}

/// Upper end of the tilt-free range after one step of the interval map.
pub fn interval_upper(n: u64, p: u64, j: u64) -> u64 {
    let v = (j as i64 - n as i64 + 2).div_euclid(p as i64);
    (n as i64 - 2 + v) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitResult {
    pub limit: (u64, u64),
    pub iterations: usize,
    pub trajectory: Vec<(u64, u64)>,
}

/// Iterate `[a, b] -> [a(a), b(b)]` starting from `[a(j), b(j)]` until it is stationary.
pub fn iterate_limit(n: u64, p: u64, j: u64) -> LimitResult {
    let mut cur = (interval_lower(p, j), interval_upper(n, p, j));
    let mut trajectory = alloc::vec![cur];
    loop {
        let next = (interval_lower(p, cur.0), interval_upper(n, p, cur.1));
        if next == cur {
            return LimitResult { limit: cur, iterations: trajectory.len(), trajectory };
        }
        trajectory.push(next);
        cur = next;
    }
}

/// `G_1`-invariants of `K_jk`: `K(r, l)` for `r` in the interval attached to
/// `(l, k)`, plus tilt-free summands of possibly zero multiplicity.
pub fn decompose_kjk_g1(n: u64, p: u64, j: u64, k: u64) -> Result<DecompositionReport, CatalogError> {
    decompose_kjk_g1_unchecked(n, p, j, k, false)
}

pub fn decompose_kjk_g1_unchecked(
    n: u64,
    p: u64,
    j: u64,
    k: u64,
    allow_small_p: bool,
) -> Result<DecompositionReport, CatalogError> {
    admissible(n, p, allow_small_p)?;
    if !(1..=n - 3).contains(&j) || !(1..=n - 3).contains(&k) {
        return Err(CatalogError::Hypothesis(alloc::format!("1 <= j, k <= n - 3 (got j = {j}, k = {k})")));
    }
    let mut catalog = Vec::new();
    for l in 1..=n - 3 {
        if let Some((lo, hi)) = weight_interval(n, p, j, l, k, false) {
            for r in lo.max(1)..=hi.min(n as i64 - 3) {
                catalog.push(SummandInstance::new(SummandKind::K(r as u64, l), 1, true));
            }
        }
    }
    catalog.extend((0..=n - 3).map(|l| SummandInstance::new(SummandKind::TiltFree(l), 1, false)));
    Ok(DecompositionReport {
        params: Params { n, p, r: 1, j: Some(j), k: Some(k), allow_small_p },
        catalog,
        notes: alloc::vec!["K(r,l) appears with twist d_t for some t".into()],
    })
}

/// The tilt-free support of `(T(j) (x) S)^{G_1}` for `j = p - 1 + (3p - 2) p`,
/// which is a union of two separated intervals.
pub fn noninterval_example(n: u64, p: u64) -> Result<BTreeSet<u64>, CatalogError> {
    if !is_prime(p) {
        return Err(CatalogError::NotPrime(p));
    }
    if p < n {
        return Err(CatalogError::Hypothesis(alloc::format!("example assumes p >= n (got n = {n}, p = {p})")));
    }
    let c = (n - 1) * (p - 1) / p;
    Ok((p - 1..=p - 2 + c).chain(3 * p - 2 - c..=3 * p - 2 + c).collect())
}

/// The `j` of [`noninterval_example`].
pub fn noninterval_j(p: u64) -> u64 {
    p - 1 + (3 * p - 2) * p
}

/// Exact set of `l` such that `T(l)^Fr (x) S^p` is a summand of
/// `(T(j) (x) S)^{G_1}`, from the tilting decompositions of `T(j) (x) T(q)`.
pub fn tilt_summand_scan(n: u64, p: u64, j: u64) -> Result<BTreeSet<u64>, CatalogError> {
    let tj = char_tilting(j, p)?;
    let qs: Vec<u64> = (0..=n * (p - 1)).collect();
    let parts = crate::par_map(&qs, |&q| -> Result<BTreeSet<u64>, CatalogError> {
        let mut found = BTreeSet::new();
        for (l, _) in decompose_into_tiltings(&tj.tensor(&char_tilting(q, p)?), p)? {
            found.extend(g1_invariants_tilting(l, p)?.keys());
        }
        Ok(found)
    });
    let mut out = BTreeSet::new();
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Sheaf-level summands of the Frobenius pushforward on the Grassmannian.
pub fn pushforward_catalog(n: u64, p: u64, r: u32) -> Result<Vec<SummandInstance>, CatalogError> {
    if !is_prime(p) {
        return Err(CatalogError::NotPrime(p));
    }
    if n < 4 || r == 0 {
        return Err(CatalogError::Hypothesis("n >= 4 and r >= 1".into()));
    }
    let nonzero = if r == 1 { p + 1 >= n } else { p >= n };
    let mut out = Vec::new();
    for j in 1..=n - 3 {
        if r == 1 {
            out.push(SummandInstance::new(SummandKind::SheafK(j, j), r, nonzero));
        } else {
            for k in 1..=n - 3 {
                out.push(SummandInstance::new(SummandKind::SheafK(j, k), r, nonzero));
            }
        }
    }
    out.extend((0..=n - 3).map(|l| SummandInstance::new(SummandKind::SheafSymQ(l), r, nonzero)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kinds(v: &[SummandInstance]) -> Vec<SummandKind> {
        v.iter().map(|s| s.kind).collect()
    }

    #[test]
    fn s_level_catalogs() {
        use SummandKind::*;
        assert_eq!(kinds(&catalog_s_gr(4, 3, 2).unwrap()), vec![TiltFree(0), TiltFree(1), K(1, 1)]);
        assert_eq!(
            kinds(&catalog_s_gr(5, 3, 1).unwrap()),
            vec![TiltFree(0), TiltFree(1), TiltFree(2), K(1, 1), K(2, 2)]
        );
        assert_eq!(catalog_s_gr(6, 5, 3).unwrap().len(), 9 + 4);
        assert!(matches!(catalog_s_gr(6, 3, 1), Err(CatalogError::Hypothesis(_))));
    }

    #[test]
    fn r_level_catalogs() {
        use SummandKind::*;
        assert_eq!(kinds(&catalog_r(4, 3, 2).unwrap()), vec![Cov(0), Cov(1), CovK(1, 1)]);
        assert_eq!(kinds(&catalog_r(5, 3, 1).unwrap()), vec![Cov(0), Cov(1), Cov(2), CovK(1, 1), CovK(2, 2)]);
    }

    #[test]
    fn tilting_tensor_catalogs() {
        let rep = decompose_tjs_g1(5, 3, 1).unwrap();
        assert_eq!(rep.catalog.len(), 3 + 2);
        assert!(rep.catalog.iter().all(|s| s.multiplicity == Multiplicity::UnknownPositive));

        let rep = decompose_tjs_g1(4, 3, 5).unwrap();
        let flags: Vec<_> = rep.catalog.iter().map(|s| (s.kind, s.multiplicity.flag())).collect();
        assert_eq!(
            flags,
            vec![
                (SummandKind::TiltFree(0), "possible"),
                (SummandKind::TiltFree(1), "nonzero"),
                (SummandKind::TiltFree(2), "nonzero"),
                (SummandKind::TiltFree(3), "nonzero"),
            ]
        );
        assert_eq!(decompose_tjs_g1(4, 3, 2).unwrap().catalog.len(), 3);
    }

    #[test]
    fn limits() {
        let r = iterate_limit(5, 3, 7);
        assert_eq!(r.limit, (0, 3));
        assert_eq!(r.trajectory.iter().map(|t| t.1).collect::<Vec<_>>(), vec![4, 3]);
        assert_eq!(iterate_limit(4, 3, 1).limit, (0, 1));
        assert_eq!(iterate_limit(6, 5, 0).limit, (0, 3));
        assert_eq!(iterate_limit(6, 5, 0).iterations, 1);
    }

    #[test]
    fn kjk_catalogs() {
        let rep = decompose_kjk_g1(4, 3, 1, 1).unwrap();
        assert_eq!(rep.catalog[0].kind, SummandKind::K(1, 1));
        // The raw interval may leave [1, n - 3]; the catalog keeps valid indices only.
        assert_eq!(weight_interval(6, 5, 2, 4, 1, false), Some((3, 4)));
        let rep = decompose_kjk_g1(6, 5, 2, 1).unwrap();
        let l3: Vec<_> = rep
            .catalog
            .iter()
            .filter_map(|s| match s.kind {
                SummandKind::K(r, 3) => Some(r),
                _ => None,
            })
            .collect();
        assert_eq!(l3, vec![3]);
        assert_eq!(weight_interval(6, 5, 1, 2, 4, false), None);
        assert!(decompose_kjk_g1(6, 5, 1, 4).is_err());
    }

    #[test]
    fn separated_intervals() {
        let set = noninterval_example(4, 5).unwrap();
        assert_eq!(set.iter().copied().collect::<Vec<_>>(), vec![4, 5, 11, 12, 13, 14, 15]);
        assert!(![7, 8, 9].iter().any(|x| set.contains(x)));
        let set = noninterval_example(5, 5).unwrap();
        assert_eq!(set.iter().copied().collect::<Vec<_>>(), vec![4, 5, 6, 10, 11, 12, 13, 14, 15, 16]);
        assert!(noninterval_example(6, 5).is_err());
    }

    #[test]
    fn scan_matches_example() {
        assert_eq!(tilt_summand_scan(4, 5, noninterval_j(5)).unwrap(), noninterval_example(4, 5).unwrap());
        let zero: Vec<u64> = tilt_summand_scan(4, 5, 0).unwrap().into_iter().collect();
        assert_eq!(zero, (0..=(2 * 4) / 5).collect::<Vec<_>>());
        assert!(tilt_summand_scan(4, 5, 8).unwrap().contains(&0));
    }

    #[test]
    fn pushforward_flags() {
        let c = pushforward_catalog(4, 5, 2).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|s| s.multiplicity.flag() == "nonzero"));
        assert_eq!(pushforward_catalog(5, 5, 1).unwrap().len(), 5);
        assert!(pushforward_catalog(5, 3, 2).unwrap().iter().all(|s| s.multiplicity.flag() == "possible"));
    }
}
