//! The tilting resolutions of the modules `M_j`, the syzygy modules `K_jk`
//! they produce, and closed-form predictions for B_1-cohomology.
//!
//! `S = Sym(F (x) V)` with `dim F = n`. Degrees are internal (polynomial)
//! degrees; weights are in units of the fundamental weight.

use alloc::vec::Vec;
use thiserror::Error;

use crate::sl2_characters::{
    binomial, char_tilting, polynomial_ring_characters, CharacterError, VirtualCharacter, WeightCharacter,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KoszulError {
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: i64, lo: i64, hi: i64 },
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error("alternating sum has negative multiplicity at weight {weight} in degree {degree}")]
    NegativeCharacter { degree: i64, weight: i64 },
}

fn in_range(what: &'static str, value: i64, lo: i64, hi: i64) -> Result<(), KoszulError> {
    if value < lo || value > hi {
        return Err(KoszulError::OutOfRange { what, value, lo, hi });
    }
    Ok(())
}

/// One free module `T(tilting) (x) wedge^wedge F (x) S(twist)` sitting in
/// homological position `position <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolutionTerm {
    pub tilting: u64,
    pub wedge: u64,
    pub twist: i64,
    pub position: i64,
}

/// Terms of the resolution of `M_j`, position 0 first.
///
/// Positions `0..=-j` carry `S^{j-i} V (x) wedge^i F (x) S(-i)`; after that the
/// wedge degree jumps by two and divided powers `D^i V` take over.
pub fn resolution_spec(n: u64, j: u64) -> Result<Vec<ResolutionTerm>, KoszulError> {
    in_range("n", n as i64, 4, i64::MAX)?;
    in_range("j", j as i64, 1, n as i64 - 3)?;
    let mut terms = Vec::with_capacity(n as usize);
    for i in 0..=j {
        terms.push(ResolutionTerm { tilting: j - i, wedge: i, twist: -(i as i64), position: -(i as i64) });
    }
    for i in 0..=(n - j - 2) {
        terms.push(ResolutionTerm {
            tilting: i,
            wedge: j + 2 + i,
            twist: -((j + 2 + i) as i64),
            position: -((j + 1 + i) as i64),
        });
    }
    Ok(terms)
}

/// Lowest internal degree of `K_jk` together with the generators living there:
/// `(degree, tilting index, wedge degree)`.
pub fn bottom_piece(j: u64, k: u64) -> (i64, u64, u64) {
    if k < j {
        ((k + 1) as i64, j - k - 1, k + 1)
    } else {
        ((k + 2) as i64, k - j, k + 2)
    }
}

/// Characters of `K_jk = Omega^{k+1} M_j`, degree by degree.
///
/// Works for any characteristic in which `T(l) = S^l V = D^l V` for
/// `l <= n - 3`, which is what the resolution needs.
#[derive(Debug, Clone)]
pub struct KCharacters {
    n: u64,
    poly: Vec<WeightCharacter>,
    /// Any prime above `n` gives the characteristic-free characters `S^l V`.
    char_prime: u64,
}

impl KCharacters {
    pub fn new(n: u64, max_degree: usize) -> Self {
        let char_prime = (n + 1..).find(|&q| crate::fp_linear::is_prime(q)).expect("primes are unbounded");
        KCharacters { n, poly: polynomial_ring_characters(n as usize, max_degree + 1), char_prime }
    }

    pub fn max_degree(&self) -> usize {
        self.poly.len() - 2
    }

    fn poly_char(&self, d: i64) -> Result<WeightCharacter, KoszulError> {
        if d < 0 {
            return Ok(WeightCharacter::zero());
        }
        self.poly.get(d as usize).cloned().ok_or(KoszulError::OutOfRange {
            what: "degree",
            value: d,
            lo: 0,
            hi: self.poly.len() as i64 - 1,
        })
    }

    fn term_char(&self, t: &ResolutionTerm, degree: i64) -> Result<WeightCharacter, KoszulError> {
        let base = char_tilting(t.tilting, self.char_prime)?.scale(binomial(self.n, t.wedge));
        Ok(base.tensor(&self.poly_char(degree + t.twist)?))
    }

    /// Character of `(K_jk)_degree`.
    pub fn char_kjk(&self, j: u64, k: u64, degree: i64) -> Result<WeightCharacter, KoszulError> {
        let terms = resolution_spec(self.n, j)?;
        in_range("k", k as i64, 1, self.n as i64 - 3)?;
        let mut acc = VirtualCharacter::zero();
        for t in terms.iter().filter(|t| t.position <= -(k as i64 + 1)) {
            let sign = if (t.position + k as i64 + 1).rem_euclid(2) == 0 { 1 } else { -1 };
            acc.add_scaled(&self.term_char(t, degree)?, sign);
        }
        acc.to_effective().map_err(|weight| KoszulError::NegativeCharacter { degree, weight })
    }

    /// Character of the S-dual `Hom_S(K_jk, S)` in `degree`, computed from the
    /// head of the resolution of `M_j` (positions `0..=-k`).
    pub fn char_kjk_dual(&self, j: u64, k: u64, degree: i64) -> Result<WeightCharacter, KoszulError> {
        let terms = resolution_spec(self.n, j)?;
        let mut acc = VirtualCharacter::zero();
        for t in terms.iter().filter(|t| t.position >= -(k as i64)) {
            let sign = if (t.position + k as i64).rem_euclid(2) == 0 { 1 } else { -1 };
            let dual = ResolutionTerm { twist: -t.twist, ..*t };
            acc.add_scaled(&self.term_char(&dual, degree)?, sign);
        }
        acc.to_effective().map_err(|weight| KoszulError::NegativeCharacter { degree, weight })
    }

    /// Character of `(K_jk)_d` shifted so the bottom sits in degree 0.
    pub fn char_normalized(&self, j: u64, k: u64, degree: i64) -> Result<WeightCharacter, KoszulError> {
        self.char_kjk(j, k, degree + bottom_piece(j, k).0)
    }
}

/// Character of `(K_jk)_d`.
#[allow(non_snake_case)]
pub fn char_Kjk(n: u64, j: u64, k: u64, d: i64) -> Result<WeightCharacter, KoszulError> {
    KCharacters::new(n, d.max(0) as usize).char_kjk(j, k, d)
}

/// Outcome of the structural checks on one `K_jk`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KjkChecks {
    pub duality: bool,
    pub projective_dimension: bool,
    pub bottom_degree: bool,
    pub bottom_character: bool,
    pub kj_is_diagonal_shift: bool,
}

impl KjkChecks {
    pub fn all(&self) -> bool {
        self.duality
            && self.projective_dimension
            && self.bottom_degree
            && self.bottom_character
            && self.kj_is_diagonal_shift
    }
}

/// Structural checks for `K_jk` through internal degree `max_degree`:
/// character-level duality with `K_{n-j-2, n-k-2}(n)`, projective dimension
/// `n - k - 2`, the bottom degree and bottom character, and that `K_j`
/// (the diagonal case shifted by `j + 2`) starts in degree 0 with `wedge^{j+2} F`.
pub fn check_kjk(table: &KCharacters, j: u64, k: u64, max_degree: i64) -> Result<KjkChecks, KoszulError> {
    let n = table.n;
    let terms = resolution_spec(n, j)?;
    in_range("k", k as i64, 1, n as i64 - 3)?;

    let (jd, kd) = (n - j - 2, n - k - 2);
    let mut duality = true;
    for d in -(n as i64)..=(max_degree - n as i64) {
        if table.char_kjk_dual(j, k, d)? != table.char_kjk(jd, kd, d + n as i64)? {
            duality = false;
        }
    }

    let tail = terms.iter().filter(|t| t.position <= -(k as i64 + 1)).count() as i64;
    let projective_dimension = tail - 1 == n as i64 - k as i64 - 2;

    let (bottom, w, a) = bottom_piece(j, k);
    let mut bottom_degree = table.char_kjk(j, k, bottom)?.dim() > 0;
    for d in 0..bottom {
        bottom_degree &= table.char_kjk(j, k, d)?.is_zero();
    }
    let expected = char_tilting(w, table.char_prime)?.scale(binomial(n, a));
    let bottom_character = table.char_kjk(j, k, bottom)? == expected;

    let kj_is_diagonal_shift = if j == k {
        table.char_normalized(j, j, 0)? == WeightCharacter::trivial().scale(binomial(n, j + 2))
            && table.char_kjk(j, j, j as i64 + 1)?.is_zero()
    } else {
        true
    };

    Ok(KjkChecks { duality, projective_dimension, bottom_degree, bottom_character, kj_is_diagonal_shift })
}

/// The two candidate exponents attached to a tuple with `d_t = sum t_i`:
/// `q0 = (j + d_t) / p` and `q1 = (j + d_t - p + 2) / p`, each when integral.
pub fn q_values(p: u64, j: u64, d_t: u64) -> (Option<i64>, Option<i64>) {
    let (p, s) = (p as i64, (j + d_t) as i64);
    let q0 = (s % p == 0).then(|| s / p);
    let q1 = ((s - p + 2).rem_euclid(p) == 0).then(|| (s - p + 2) / p);
    (q0, q1)
}

/// Tate cohomology `H^l(B_1, L(i) (x) (a))` for `0 <= i <= p - 2`: the single
/// weight it is concentrated in, or `None` when it vanishes.
pub fn tate_char_b1(i: i64, a: i64, l: i64, p: i64) -> Option<i64> {
    let even = l.rem_euclid(2) == 0;
    if even && (i - a).rem_euclid(p) == 0 {
        Some(l * p - (i - a))
    } else if !even && (i - (p - 2 - a)).rem_euclid(p) == 0 {
        Some(l * p + (i - (p - 2 - a)))
    } else {
        None
    }
}

/// Ordinary cohomology of a one-dimensional module: Tate for `l >= 0`, zero below.
pub fn cohomology_b1_character(a: i64, l: i64, p: i64) -> Option<i64> {
    if l < 0 {
        None
    } else {
        tate_char_b1(0, a, l, p)
    }
}

/// Predicted shape of `H^l(B_1, C_jk^(t))`: a part concentrated in weight
/// `r1_weight` with unspecified multiplicity, plus at most one extra weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohomologyPrediction {
    pub r1_weight: i64,
    pub r2_weight: Option<i64>,
}

pub fn predict_cohomology(p: u64, j: u64, k: u64, l: u64, d_t: u64) -> CohomologyPrediction {
    let (p, j, k, l) = (p as i64, j as i64, k as i64, l as i64);
    let eps = i64::from(k > j);
    let (q0, q1) = q_values(p as u64, j as u64, d_t);
    let q = |parity: i64| if parity == 0 { q0 } else { q1 };
    let parity = (l - k).rem_euclid(2);
    let r2_weight = match (q(parity), q(1 - parity)) {
        (Some(qa), _) if l >= k && qa <= k - eps => Some((qa + l - k) * p),
        (_, Some(qb)) if l <= k && qb > k - eps => Some((qb + l - k - 1) * p),
        _ => None,
    };
    CohomologyPrediction { r1_weight: (l - eps) * p, r2_weight }
}

/// Correction term deciding whether the interval endpoints move by one.
pub fn interval_correction(n: u64, p: u64, j: u64, l: u64, k: u64) -> i64 {
    let same_parity = (l as i64 - k as i64).rem_euclid(2) == 0;
    let small_p = p + 2 == n;
    i64::from(same_parity || (l > k && j + 3 == n && small_p) || (l < k && j == 1 && small_p))
}

/// Range of `r` for which the weight `r p` occurs in `H^l(B_1, C_jk^(t))` for
/// some tuple `t`; `None` when empty.
/// `shifted` selects the variant that subtracts `[k > j]` from the `l` endpoint.
pub fn weight_interval(n: u64, p: u64, j: u64, l: u64, k: u64, shifted: bool) -> Option<(i64, i64)> {
    let m = interval_correction(n, p, j, l, k);
    let eps = if shifted { i64::from(k > j) } else { 0 };
    let (n, l, k) = (n as i64, l as i64, k as i64);
    let (lo, hi) = match l.cmp(&k) {
        core::cmp::Ordering::Greater => (l - k + m, l - eps),
        core::cmp::Ordering::Equal => (1, n - 3),
        core::cmp::Ordering::Less => (l - eps, l - k + n - 2 - m),
    };
    (lo <= hi).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn resolution_terms_n4_j1() {
        let t = resolution_spec(4, 1).unwrap();
        let tuples: Vec<_> = t.iter().map(|t| (t.tilting, t.wedge, t.twist, t.position)).collect();
        assert_eq!(tuples, vec![(1, 0, 0, 0), (0, 1, -1, -1), (0, 3, -3, -2), (1, 4, -4, -3)]);
        assert!(resolution_spec(4, 2).is_err());
    }

    #[test]
    fn k11_characters_n4() {
        assert_eq!(char_Kjk(4, 1, 1, 3).unwrap(), WeightCharacter::from_pairs([(0, 4)]));
        assert_eq!(char_Kjk(4, 1, 1, 4).unwrap(), WeightCharacter::from_pairs([(1, 15), (-1, 15)]));
        assert!(char_Kjk(4, 1, 1, 2).unwrap().is_zero());
    }

    #[test]
    fn q_value_examples() {
        assert_eq!(q_values(3, 1, 8), (Some(3), None));
        assert_eq!(q_values(3, 1, 3), (None, Some(1)));
    }

    #[test]
    fn prediction_examples() {
        let full = predict_cohomology(3, 1, 1, 1, 8);
        assert_eq!(full, CohomologyPrediction { r1_weight: 3, r2_weight: None });
        let odd = predict_cohomology(3, 1, 1, 2, 3);
        assert_eq!(odd.r2_weight, Some(6));
    }

    #[test]
    fn interval_examples() {
        assert_eq!(interval_correction(6, 5, 2, 4, 1), 0);
        assert_eq!(weight_interval(6, 5, 2, 4, 1, true), Some((3, 4)));
        assert_eq!(interval_correction(6, 5, 1, 3, 1), 1);
        assert_eq!(weight_interval(6, 5, 1, 3, 1, true), Some((3, 3)));
    }

    #[test]
    fn tate_trivial_module() {
        assert_eq!(tate_char_b1(0, 0, 0, 3), Some(0));
        assert_eq!(tate_char_b1(0, 0, 2, 3), Some(6));
        assert_eq!(tate_char_b1(0, -2, 1, 3), Some(0));
        assert_eq!(tate_char_b1(0, 1, 0, 3), None);
    }
}
