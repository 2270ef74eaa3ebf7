//! Formal characters of SL2 and its tilting modules in characteristic p.
//!
//! Weights are integers counting multiples of the fundamental weight, so the
//! natural module `V` has weights `{1, -1}`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use thiserror::Error;

use crate::fp_linear::check_prime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharacterError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("negative highest weight {0}")]
    NegativeWeight(i64),
    #[error("not a tilting character: multiplicity of T({index}) would be {multiplicity}")]
    NotTilting { index: i64, multiplicity: i64 },
    #[error("character is not symmetric under w -> -w")]
    NotSymmetric,
    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: i64, lo: i64, hi: i64 },
    #[error("negative multiplicity {0} of the trivial Weyl module")]
    NegativeInvariants(i64),
}

fn prime(p: u64) -> Result<u64, CharacterError> {
    check_prime(p).map(u64::from).map_err(|_| CharacterError::NotPrime(p))
}

/// Finite multiset of weights with positive multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightCharacter(BTreeMap<i64, u64>);

impl WeightCharacter {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn trivial() -> Self {
        Self::from_pairs([(0, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, u64)>) -> Self {
        let mut c = Self::zero();
        for (w, m) in pairs {
            c.add_weight(w, m);
        }
        c
    }

    pub fn add_weight(&mut self, w: i64, m: u64) {
        if m > 0 {
            *self.0.entry(w).or_insert(0) += m;
        }
    }

    pub fn multiplicity(&self, w: i64) -> u64 {
        self.0.get(&w).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.0.iter().map(|(&w, &m)| (w, m))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn highest_weight(&self) -> Option<i64> {
        self.0.keys().next_back().copied()
    }

    pub fn is_symmetric(&self) -> bool {
        self.0.iter().all(|(&w, &m)| self.multiplicity(-w) == m)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, m) in other.iter() {
            out.add_weight(w, m);
        }
        out
    }

    pub fn scale(&self, k: u64) -> Self {
        Self::from_pairs(self.iter().map(|(w, m)| (w, m * k)))
    }

    /// Character of the tensor product.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, m) in self.iter() {
            for (b, n) in other.iter() {
                out.add_weight(a + b, m * n);
            }
        }
        out
    }

    /// Shift every weight by `s`, i.e. tensor with the one-dimensional `(s)`.
    pub fn shift(&self, s: i64) -> Self {
        Self::from_pairs(self.iter().map(|(w, m)| (w + s, m)))
    }

    pub fn to_virtual(&self) -> VirtualCharacter {
        VirtualCharacter(self.0.iter().map(|(&w, &m)| (w, m as i64)).collect())
    }
}

/// Integer combination of weights; differences of genuine characters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct VirtualCharacter(BTreeMap<i64, i64>);

impl VirtualCharacter {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_weight(&mut self, w: i64, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.0.entry(w).or_insert(0);
        *e += m;
        if *e == 0 {
            self.0.remove(&w);
        }
    }

    /// `self += k * c`.
    pub fn add_scaled(&mut self, c: &WeightCharacter, k: i64) {
        for (w, m) in c.iter() {
            self.add_weight(w, k * m as i64);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.0.iter().map(|(&w, &m)| (w, m))
    }

    pub fn multiplicity(&self, w: i64) -> i64 {
        self.0.get(&w).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn highest_weight(&self) -> Option<i64> {
        self.0.keys().next_back().copied()
    }

    /// The genuine character, or the first weight with negative multiplicity.
    pub fn to_effective(&self) -> Result<WeightCharacter, i64> {
        let mut out = WeightCharacter::zero();
        for (w, m) in self.iter() {
            if m < 0 {
                return Err(w);
            }
            out.add_weight(w, m as u64);
        }
        Ok(out)
    }
}

/// Multiset of indices `l` standing for `T(l)` (or `L(l)` for fusion results).
pub type TiltingMultiset = BTreeMap<u64, u64>;

/// Character of the Weyl module of highest weight `m`.
pub fn char_weyl(m: i64) -> Result<WeightCharacter, CharacterError> {
    if m < 0 {
        return Err(CharacterError::NegativeWeight(m));
    }
    Ok(WeightCharacter::from_pairs((0..=m).map(|i| (m - 2 * i, 1))))
}

/// Split `j >= p - 1` as `j1 + p * j2` with `p - 1 <= j1 <= 2p - 2`.
/// For `j < p - 1` the split is `(j, 0)`.
pub fn tilting_normal_form(j: u64, p: u64) -> (u64, u64) {
    if j + 1 < p {
        return (j, 0);
    }
    let j1 = p - 1 + (j - (p - 1)) % p;
    (j1, (j - j1) / p)
}

/// Character of the indecomposable tilting module `T(j)`.
pub fn char_tilting(j: u64, p: u64) -> Result<WeightCharacter, CharacterError> {
    let p = prime(p)?;
    Ok(tilting_char_unchecked(j, p))
}

fn tilting_char_unchecked(j: u64, p: u64) -> WeightCharacter {
    let weyl = |m: u64| WeightCharacter::from_pairs((0..=m).map(|i| (m as i64 - 2 * i as i64, 1)));
    if j < p {
        return weyl(j);
    }
    if j <= 2 * p - 2 {
        return weyl(j).add(&weyl(2 * p - 2 - j));
    }
    let (j1, j2) = tilting_normal_form(j, p);
    tilting_char_unchecked(j1, p).tensor(&frobenius_scale_unchecked(&tilting_char_unchecked(j2, p), p))
}

/// Character of the `r`-th Frobenius twist: every weight multiplied by `p^r`.
pub fn frobenius_scale(c: &WeightCharacter, r: u32, p: u64) -> Result<WeightCharacter, CharacterError> {
    let p = prime(p)?;
    let f = p.pow(r) as i64;
    Ok(WeightCharacter::from_pairs(c.iter().map(|(w, m)| (w * f, m))))
}

fn frobenius_scale_unchecked(c: &WeightCharacter, p: u64) -> WeightCharacter {
    WeightCharacter::from_pairs(c.iter().map(|(w, m)| (w * p as i64, m)))
}

/// Decompose a character into tilting characters by peeling off the highest weight.
pub fn decompose_into_tiltings(c: &WeightCharacter, p: u64) -> Result<TiltingMultiset, CharacterError> {
    let signed = decompose_virtual_into_tiltings(&c.to_virtual(), p)?;
    let mut out = TiltingMultiset::new();
    for (l, m) in signed {
        if m < 0 {
            return Err(CharacterError::NotTilting { index: l as i64, multiplicity: m });
        }
        out.insert(l, m as u64);
    }
    Ok(out)
}

/// Signed decomposition of a symmetric virtual character in the tilting basis.
pub fn decompose_virtual_into_tiltings(
    c: &VirtualCharacter,
    p: u64,
) -> Result<BTreeMap<u64, i64>, CharacterError> {
    let p = prime(p)?;
    let mut rest = c.clone();
    let mut out = BTreeMap::new();
    while let Some(h) = rest.highest_weight() {
        if h < 0 {
            return Err(CharacterError::NotSymmetric);
        }
        let m = rest.multiplicity(h);
        rest.add_scaled(&tilting_char_unchecked(h as u64, p), -m);
        out.insert(h as u64, m);
    }
    Ok(out)
}

/// `T(a) (x) V` for `p - 1 <= a <= 3p - 3`, in closed form.
pub fn tilting_pieri(a: u64, p: u64) -> Result<TiltingMultiset, CharacterError> {
    let p = prime(p)?;
    if a + 1 < p || a > 3 * p - 3 {
        return Err(CharacterError::OutOfRange {
            what: "a",
            value: a as i64,
            lo: p as i64 - 1,
            hi: 3 * p as i64 - 3,
        });
    }
    let mut out = TiltingMultiset::new();
    out.insert(a + 1, 1);
    if a == p - 1 || a == 2 * p - 1 {
        return Ok(out);
    }
    let low = if a == p || a == 2 * p { 2 } else { 1 };
    out.insert(a - 1, low);
    Ok(out)
}

/// Tensor product of simple modules `L(i)`, `i <= p - 2`, modulo the tilting
/// summands `T(l)` with `l >= p - 1`.
pub fn fusion_product(indices: &[u64], p: u64) -> Result<TiltingMultiset, CharacterError> {
    let p = prime(p)?;
    let mut c = WeightCharacter::trivial();
    for &i in indices {
        if i + 2 > p {
            return Err(CharacterError::OutOfRange { what: "fusion index", value: i as i64, lo: 0, hi: p as i64 - 2 });
        }
        c = c.tensor(&tilting_char_unchecked(i, p));
    }
    let mut out = decompose_into_tiltings(&c, p)?;
    out.retain(|&l, _| l + 1 < p);
    Ok(out)
}

/// `T(l)^{G_1}` as a module for the Frobenius-twisted group: `T(l2)` when
/// `l = 2p - 2 + p * l2` (or `l = 0`), and zero otherwise.
pub fn g1_invariants_tilting(l: u64, p: u64) -> Result<TiltingMultiset, CharacterError> {
    let p = prime(p)?;
    let mut out = TiltingMultiset::new();
    if l == 0 {
        out.insert(0, 1);
        return Ok(out);
    }
    let (l1, l2) = tilting_normal_form(l, p);
    if l1 == 2 * p - 2 {
        out.insert(l2, 1);
    }
    Ok(out)
}

/// Expansion in Weyl characters, `c = sum_m a_m chi(m)`.
pub fn weyl_expand(c: &WeightCharacter) -> Result<BTreeMap<u64, i64>, CharacterError> {
    if !c.is_symmetric() {
        return Err(CharacterError::NotSymmetric);
    }
    let mut out = BTreeMap::new();
    for (w, m) in c.iter().filter(|&(w, _)| w >= 0) {
        let a = m as i64 - c.multiplicity(w + 2) as i64;
        if a != 0 {
            out.insert(w as u64, a);
        }
    }
    Ok(out)
}

/// Dimension of the G-invariants of a module with a good filtration and character `c`.
pub fn invariant_multiplicity(c: &WeightCharacter) -> Result<u64, CharacterError> {
    let a = weyl_expand(c)?.get(&0).copied().unwrap_or(0);
    if a < 0 {
        return Err(CharacterError::NegativeInvariants(a));
    }
    Ok(a as u64)
}

/// Characters of the graded pieces `S_d` of `S = Sym(V^n)`, `d = 0..=max_degree`.
pub fn polynomial_ring_characters(n: usize, max_degree: usize) -> Vec<WeightCharacter> {
    let weyl: Vec<WeightCharacter> =
        (0..=max_degree).map(|m| char_weyl(m as i64).expect("nonnegative")).collect();
    let mut table = weyl.clone();
    for _ in 1..n {
        let next = (0..=max_degree)
            .map(|d| {
                let mut acc = WeightCharacter::zero();
                for a in 0..=d {
                    acc = acc.add(&table[d - a].tensor(&weyl[a]));
                }
                acc
            })
            .collect();
        table = next;
    }
    if n == 0 {
        table = (0..=max_degree)
            .map(|d| if d == 0 { WeightCharacter::trivial() } else { WeightCharacter::zero() })
            .collect();
    }
    table
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(pairs: &[(i64, u64)]) -> WeightCharacter {
        WeightCharacter::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn small_tilting_characters() {
        assert_eq!(char_tilting(3, 3).unwrap(), ch(&[(3, 1), (1, 2), (-1, 2), (-3, 1)]));
        assert_eq!(char_tilting(4, 3).unwrap(), ch(&[(4, 1), (2, 1), (0, 2), (-2, 1), (-4, 1)]));
        assert_eq!(char_tilting(2, 3).unwrap(), char_weyl(2).unwrap());
    }

    #[test]
    fn steinberg_tensor_v_peels() {
        let c = char_tilting(4, 5).unwrap().tensor(&char_weyl(1).unwrap());
        let d = decompose_into_tiltings(&c, 5).unwrap();
        assert_eq!(d, TiltingMultiset::from([(5, 1)]));
    }

    #[test]
    fn pieri_examples() {
        assert_eq!(tilting_pieri(5, 5).unwrap(), TiltingMultiset::from([(6, 1), (4, 2)]));
        assert_eq!(tilting_pieri(4, 5).unwrap(), TiltingMultiset::from([(5, 1)]));
        assert!(tilting_pieri(13, 5).is_err());
    }

    #[test]
    fn fusion_examples() {
        assert_eq!(fusion_product(&[1, 1], 3).unwrap(), TiltingMultiset::from([(0, 1)]));
        assert_eq!(fusion_product(&[], 5).unwrap(), TiltingMultiset::from([(0, 1)]));
    }

    #[test]
    fn g1_invariants_examples() {
        assert_eq!(g1_invariants_tilting(4, 3).unwrap(), TiltingMultiset::from([(0, 1)]));
        assert_eq!(g1_invariants_tilting(7, 3).unwrap(), TiltingMultiset::from([(1, 1)]));
        assert!(g1_invariants_tilting(3, 3).unwrap().is_empty());
        assert!(g1_invariants_tilting(5, 3).unwrap().is_empty());
    }

    #[test]
    fn weyl_expansion_of_v_tensor_v() {
        let v = char_weyl(1).unwrap();
        let e = weyl_expand(&v.tensor(&v)).unwrap();
        assert_eq!(e, BTreeMap::from([(0, 1), (2, 1)]));
        assert_eq!(invariant_multiplicity(&v.tensor(&v)).unwrap(), 1);
    }

    #[test]
    fn non_tilting_rejected() {
        let c = ch(&[(3, 1), (1, 1), (-1, 1), (-3, 1)]);
        assert!(matches!(decompose_into_tiltings(&c, 3), Err(CharacterError::NotTilting { .. })));
    }

    #[test]
    fn polynomial_ring_dimensions() {
        let t = polynomial_ring_characters(4, 3);
        assert_eq!(t[2].dim(), 36);
        assert_eq!(t[2].multiplicity(0), 16);
        assert_eq!(t[3].dim(), binomial(3 + 7, 7));
    }
}
