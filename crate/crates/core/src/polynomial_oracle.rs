//! Brute-force F_p computations that the closed-form catalogs are checked against.
//!
//! `S = k[x_1, y_1, ..., x_n, y_n]` with `x_i` of weight 1 and `y_i` of weight -1.
//! The raising operator is `e = sum x_i d/dy_i`, the lowering operator
//! `f = sum y_i d/dx_i`. Both preserve the multidegree `(deg_{x_i,y_i})_i`, so
//! every computation splits into blocks indexed by multidegree and weight.
//! Blocks whose multidegrees differ by a permutation of `1..n` have equal
//! dimensions, so only sorted multidegrees are computed.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fp_linear::{binom_mod, check_prime, inv_mod, Echelon, FpMatrix, LinAlgError, SparseRow};
use crate::koszul_catalog::{resolution_spec, KoszulError, ResolutionTerm};
use crate::par_map;
use crate::sl2_characters::{char_tilting, tilting_normal_form, CharacterError, WeightCharacter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Koszul(#[from] KoszulError),
    #[error("invalid argument: {0}")]
    Argument(&'static str),
    #[error("could not split T({j}) off its ambient module after {attempts} attempts")]
    Split { j: u64, attempts: usize },
    #[error("equivariant maps out of position {position}: solution space has dimension {dim}, expected 1")]
    Equivariance { position: i64, dim: usize },
    #[error("differentials out of position {position} and the next one do not compose to zero")]
    NotAComplex { position: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    /// Divided powers of `e`, raising weights by 2.
    Raise,
    /// Divided powers of `f`, lowering weights by 2.
    Lower,
}

fn prime32(p: u64) -> Result<u32, OracleError> {
    Ok(check_prime(p)?)
}

fn pow_u64(p: u64, e: u32) -> u64 {
    p.pow(e)
}

// ---------------------------------------------------------------------------
// Monomials and divided powers

/// All vectors `a` with `0 <= a_i <= bounds_i` and `sum a_i = total`, in lexicographic order.
pub(crate) fn compositions_bounded(bounds: &[u32], total: u32) -> Vec<Vec<u32>> {
    fn rec(bounds: &[u32], suffix_cap: &[u32], total: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let i = cur.len();
        if i == bounds.len() {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest_cap = suffix_cap[i + 1];
        let lo = total.saturating_sub(rest_cap);
        for a in lo..=bounds[i].min(total) {
            cur.push(a);
            rec(bounds, suffix_cap, total - a, cur, out);
            cur.pop();
        }
    }
    let mut suffix_cap = vec![0u32; bounds.len() + 1];
    for i in (0..bounds.len()).rev() {
        suffix_cap[i] = suffix_cap[i + 1] + bounds[i];
    }
    let mut out = Vec::new();
    if total <= suffix_cap[0] {
        rec(bounds, &suffix_cap, total, &mut Vec::with_capacity(bounds.len()), &mut out);
    }
    out
}

/// Exponent vectors `(a_1, b_1, ..., a_n, b_n)` of the monomials
/// `prod x_i^{a_i} y_i^{b_i}` of degree `d`, in lexicographic order.
pub fn monomial_basis(n: usize, d: u32) -> Vec<Vec<u32>> {
    compositions_bounded(&vec![d; 2 * n], d)
}

/// Ways of writing `m = sum m_i` with `m_i <= caps_i`, with coefficient `prod C(caps_i, m_i)` mod p.
fn distribute(caps: &[u32], m: u32, p: u32) -> Vec<(Vec<u32>, u32)> {
    compositions_bounded(caps, m)
        .into_iter()
        .filter_map(|ms| {
            let c = ms
                .iter()
                .zip(caps)
                .fold(1u64, |acc, (&mi, &cap)| acc * binom_mod(cap as u64, mi as u64, p) as u64 % p as u64);
            (c != 0).then_some((ms, c as u32))
        })
        .collect()
}

/// Matrix of `e^(m)` or `f^(m)` on `S_d` in the basis [`monomial_basis`].
pub fn divided_power_matrix(op: Operator, m: u32, n: usize, d: u32, p: u64) -> Result<FpMatrix, OracleError> {
    let p32 = prime32(p)?;
    let basis = monomial_basis(n, d);
    let index: BTreeMap<&[u32], usize> = basis.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let mut t = FpMatrix::zeros(p, basis.len(), basis.len())?;
    for (col, mono) in basis.iter().enumerate() {
        let caps: Vec<u32> = (0..n).map(|i| if op == Operator::Raise { mono[2 * i + 1] } else { mono[2 * i] }).collect();
        for (ms, c) in distribute(&caps, m, p32) {
            let mut target = mono.clone();
            for i in 0..n {
                match op {
                    Operator::Raise => {
                        target[2 * i] += ms[i];
                        target[2 * i + 1] -= ms[i];
                    }
                    Operator::Lower => {
                        target[2 * i] -= ms[i];
                        target[2 * i + 1] += ms[i];
                    }
                }
            }
            t.set(col, index[target.as_slice()], c);
        }
    }
    Ok(t.transpose())
}

/// Monomials of a fixed multidegree `bounds` and fixed total `x`-degree, indexed
/// by their `x`-exponent vectors.
struct XBlock {
    xs: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
}

impl XBlock {
    fn new(bounds: &[u32], x_total: u32) -> Self {
        let xs = compositions_bounded(bounds, x_total);
        let index = xs.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        XBlock { xs, index }
    }

    fn len(&self) -> usize {
        self.xs.len()
    }
}

/// Images of the monomial with `x`-exponents `x` (multidegree `bounds`) under
/// `e^(m)` or `f^(m)`, as `(new x-exponents, coefficient)`.
fn block_images(op: Operator, bounds: &[u32], x: &[u32], m: u32, p: u32) -> Vec<(Vec<u32>, u32)> {
    let caps: Vec<u32> = match op {
        Operator::Raise => bounds.iter().zip(x).map(|(b, a)| b - a).collect(),
        Operator::Lower => x.to_vec(),
    };
    distribute(&caps, m, p)
        .into_iter()
        .map(|(ms, c)| {
            let t = match op {
                Operator::Raise => x.iter().zip(&ms).map(|(a, d)| a + d).collect(),
                Operator::Lower => x.iter().zip(&ms).map(|(a, d)| a - d).collect(),
            };
            (t, c)
        })
        .collect()
}

/// Non-increasing multidegrees of total `d` with `n` parts, with the number of
/// distinct permutations of each.
fn sorted_multidegrees(n: usize, d: u32) -> Vec<(Vec<u32>, u64)> {
    fn rec(n: usize, left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in (0..=max.min(left)).rev() {
            cur.push(a);
            rec(n, left - a, a, cur, out);
            cur.pop();
        }
    }
    let mut parts = Vec::new();
    rec(n, d, d, &mut Vec::new(), &mut parts);
    parts
        .into_iter()
        .map(|v| {
            let mut count = (1..=n as u64).product::<u64>();
            let mut i = 0;
            while i < v.len() {
                let run = v[i..].iter().take_while(|&&x| x == v[i]).count();
                count /= (1..=run as u64).product::<u64>();
                i += run;
            }
            (v, count)
        })
        .collect()
}

fn all_multidegrees(n: usize, d: u32) -> Vec<(Vec<u32>, u64)> {
    compositions_bounded(&vec![d; n], d).into_iter().map(|v| (v, 1)).collect()
}

// ---------------------------------------------------------------------------
// G_r-invariants of S

/// Character of `(S_d)^{G_r}` as a module for the `r`-fold Frobenius twist:
/// weights are those of the invariants divided by `p^r`.
pub fn gr_invariants_s(n: usize, p: u64, r: u32, d: u32) -> Result<WeightCharacter, OracleError> {
    invariants_of_s(n, p, r, d, true)
}

/// Same as [`gr_invariants_s`] but enumerating every multidegree and weight
/// without using symmetry; used to cross-check the reduced computation.
pub fn gr_invariants_s_exhaustive(n: usize, p: u64, r: u32, d: u32) -> Result<WeightCharacter, OracleError> {
    invariants_of_s(n, p, r, d, false)
}

fn invariants_of_s(n: usize, p: u64, r: u32, d: u32, symmetric: bool) -> Result<WeightCharacter, OracleError> {
    let p32 = prime32(p)?;
    if r == 0 || n == 0 {
        return Err(OracleError::Argument("need r >= 1 and n >= 1"));
    }
    let q = pow_u64(p, r) as i64;
    let degrees = if symmetric { sorted_multidegrees(n, d) } else { all_multidegrees(n, d) };
    let weights: Vec<i64> = (-(d as i64)..=d as i64)
        .filter(|w| (w + d as i64) % 2 == 0 && w % q == 0 && (!symmetric || *w >= 0))
        .collect();
    let mut tasks = Vec::new();
    for (bounds, count) in &degrees {
        for &w in &weights {
            tasks.push((bounds.clone(), *count, w));
        }
    }
    let dims = par_map(&tasks, |(bounds, _, w)| {
        invariant_block_dim(bounds, ((w + d as i64) / 2) as u32, p32, r)
    });
    let mut out = WeightCharacter::zero();
    for ((_, count, w), dim) in tasks.iter().zip(dims) {
        let m = dim as u64 * count;
        out.add_weight(w / q, m);
        if symmetric && *w > 0 {
            out.add_weight(-w / q, m);
        }
    }
    Ok(out)
}

/// Dimension of the joint kernel of `e^(p^s)`, `f^(p^s)` (`s < r`) on one block.
fn invariant_block_dim(bounds: &[u32], x_total: u32, p: u32, r: u32) -> usize {
    let src = XBlock::new(bounds, x_total);
    let deg: u32 = bounds.iter().sum();
    let mut ech = Echelon::new(p, src.len());
    for s in 0..r {
        let step = (p as u64).pow(s);
        if step > deg as u64 {
            break;
        }
        let step = step as u32;
        for op in [Operator::Raise, Operator::Lower] {
            let target_total = match op {
                Operator::Raise if x_total + step <= deg => x_total + step,
                Operator::Lower if x_total >= step => x_total - step,
                _ => continue,
            };
            let tgt = XBlock::new(bounds, target_total);
            let mut rows: Vec<SparseRow> = vec![Vec::new(); tgt.len()];
            for (col, x) in src.xs.iter().enumerate() {
                for (t, c) in block_images(op, bounds, x, step, p) {
                    rows[tgt.index[&t]].push((col, c));
                }
            }
            for row in &rows {
                if ech.rank() == src.len() {
                    return 0;
                }
                ech.insert(row);
            }
        }
    }
    src.len() - ech.rank()
}

// ---------------------------------------------------------------------------
// Explicit G-modules

/// A finite-dimensional `SL2`-module given by a weight basis and the matrices of
/// `e^(p^s)`, `f^(p^s)` for `s < levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitModule {
    p: u32,
    weights: Vec<i64>,
    raise: Vec<FpMatrix>,
    lower: Vec<FpMatrix>,
}

impl ExplicitModule {
    pub fn new(p: u64, weights: Vec<i64>, raise: Vec<FpMatrix>, lower: Vec<FpMatrix>) -> Result<Self, OracleError> {
        let p = prime32(p)?;
        let dim = weights.len();
        if raise.len() != lower.len()
            || raise.iter().chain(&lower).any(|m| m.rows() != dim || m.cols() != dim || m.p() != p)
        {
            return Err(OracleError::Argument("operator matrices do not match the basis"));
        }
        Ok(ExplicitModule { p, weights, raise, lower })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
    pub fn p(&self) -> u64 {
        self.p as u64
    }
    pub fn levels(&self) -> usize {
        self.raise.len()
    }
    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn generator(&self, op: Operator, s: usize) -> &FpMatrix {
        match op {
            Operator::Raise => &self.raise[s],
            Operator::Lower => &self.lower[s],
        }
    }

    pub fn character(&self) -> WeightCharacter {
        WeightCharacter::from_pairs(self.weights.iter().map(|&w| (w, 1)))
    }

    /// `e^(m)` or `f^(m)` for `m < p^levels`, assembled from the generators
    /// digit by digit: `e^(m) = prod_s (e^(p^s))^{m_s} / m_s!`.
    pub fn divided_power(&self, op: Operator, m: u64) -> Result<FpMatrix, OracleError> {
        let p = self.p as u64;
        let mut acc = FpMatrix::identity(p, self.dim())?;
        let mut rest = m;
        for s in 0..self.levels() {
            let digit = (rest % p) as u32;
            rest /= p;
            if digit > 0 {
                let fact = (1..=digit as u64).fold(1u64, |a, i| a * i % p) as u32;
                let g = self.generator(op, s).pow(digit)?.scale(inv_mod(fact, self.p));
                acc = acc.mul(&g)?;
            }
        }
        if rest != 0 {
            return Err(OracleError::Argument("divided power beyond the stored Frobenius levels"));
        }
        Ok(acc)
    }

    /// The Frobenius twist: weights times `p`, `e^(1)` acting by zero and
    /// `e^(p^{s+1})` acting as `e^(p^s)` did.
    pub fn frobenius_twist(&self) -> ExplicitModule {
        let zero = FpMatrix::zeros_unchecked(self.p, self.dim(), self.dim());
        let shift = |v: &[FpMatrix]| {
            let mut out = vec![zero.clone()];
            out.extend(v.iter().cloned());
            out
        };
        ExplicitModule {
            p: self.p,
            weights: self.weights.iter().map(|w| w * self.p as i64).collect(),
            raise: shift(&self.raise),
            lower: shift(&self.lower),
        }
    }

    /// Tensor product, basis index `i * other.dim() + j`.
    pub fn tensor(&self, other: &ExplicitModule) -> Result<ExplicitModule, OracleError> {
        if self.p != other.p {
            return Err(OracleError::Argument("tensor product over different primes"));
        }
        let p = self.p as u64;
        let levels = self.levels().min(other.levels());
        let mut raise = Vec::with_capacity(levels);
        let mut lower = Vec::with_capacity(levels);
        for s in 0..levels {
            let step = p.pow(s as u32);
            for (op, out) in [(Operator::Raise, &mut raise), (Operator::Lower, &mut lower)] {
                let mut acc = FpMatrix::zeros(p, self.dim() * other.dim(), self.dim() * other.dim())?;
                for a in 0..=step {
                    let term = self.divided_power(op, a)?.kron(&other.divided_power(op, step - a)?)?;
                    acc = acc.add(&term)?;
                }
                out.push(acc);
            }
        }
        let weights = self.weights.iter().flat_map(|a| other.weights.iter().map(move |b| a + b)).collect();
        Ok(ExplicitModule { p: self.p, weights, raise, lower })
    }

    /// Keep the first `levels` generators.
    pub fn truncate_levels(&self, levels: usize) -> ExplicitModule {
        ExplicitModule {
            p: self.p,
            weights: self.weights.clone(),
            raise: self.raise[..levels.min(self.levels())].to_vec(),
            lower: self.lower[..levels.min(self.levels())].to_vec(),
        }
    }

    /// Restriction to the submodule spanned by `basis` (weight vectors), given
    /// a complement spanned by `complement` that is also a submodule.
    fn restrict(&self, basis: &[(Vec<u32>, i64)], complement: &[Vec<u32>]) -> Result<ExplicitModule, OracleError> {
        let k = basis.len();
        let cols: Vec<Vec<u32>> = basis.iter().map(|b| b.0.clone()).chain(complement.iter().cloned()).collect();
        let change = FpMatrix::from_columns(self.p, self.dim(), &cols);
        let inv = change.inverse()?;
        let keep: Vec<usize> = (0..k).collect();
        let cut = |m: &FpMatrix| -> Result<FpMatrix, OracleError> {
            Ok(submatrix(&inv.mul(m)?.mul(&change)?, &keep, &keep))
        };
        Ok(ExplicitModule {
            p: self.p,
            weights: basis.iter().map(|b| b.1).collect(),
            raise: self.raise.iter().map(cut).collect::<Result<_, _>>()?,
            lower: self.lower.iter().map(cut).collect::<Result<_, _>>()?,
        })
    }
}

fn submatrix(m: &FpMatrix, rows: &[usize], cols: &[usize]) -> FpMatrix {
    let mut col_map = vec![usize::MAX; m.cols()];
    for (new, &old) in cols.iter().enumerate() {
        col_map[old] = new;
    }
    let data = rows
        .iter()
        .map(|&r| {
            let mut row: SparseRow =
                m.row(r).iter().filter(|e| col_map[e.0] != usize::MAX).map(|&(c, v)| (col_map[c], v)).collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    FpMatrix::from_rows(m.p(), cols.len(), data)
}

/// `S^m V` with basis `x^a y^{m-a}`, `a = 0..=m`.
fn symmetric_power(m: u64, p: u32, levels: usize) -> ExplicitModule {
    let dim = m as usize + 1;
    let mut raise = Vec::with_capacity(levels);
    let mut lower = Vec::with_capacity(levels);
    for s in 0..levels {
        let step = (p as u64).saturating_pow(s as u32);
        let mut e = FpMatrix::zeros_unchecked(p, dim, dim);
        let mut f = FpMatrix::zeros_unchecked(p, dim, dim);
        for a in 0..dim as u64 {
            if a + step <= m {
                e.set((a + step) as usize, a as usize, binom_mod(m - a, step, p));
            }
            if a >= step {
                f.set((a - step) as usize, a as usize, binom_mod(a, step, p));
            }
        }
        raise.push(e);
        lower.push(f);
    }
    let weights = (0..=m as i64).map(|a| 2 * a - m as i64).collect();
    ExplicitModule { p, weights, raise, lower }
}

/// Smallest number of Frobenius levels after which every divided power acts
/// by zero on a module with weights in `[-j, j]`.
fn levels_needed(j: u64, p: u64) -> usize {
    let mut levels = 1;
    while p.pow(levels as u32) <= 2 * j {
        levels += 1;
    }
    levels
}

/// An explicit model of the tilting module `T(j)` with generators for `s < r_max`.
///
/// `T(j)` for `j < p` is `S^j V`; for `p <= j <= 2p - 2` it is split off
/// `S^{p-1} V (x) S^{j-p+1} V`; beyond that it is `T(j1) (x) T(j2)^[1]`.
pub fn realize_tilting(j: u64, p: u64, r_max: usize) -> Result<ExplicitModule, OracleError> {
    let p32 = prime32(p)?;
    let levels = levels_needed(j, p).max(r_max);
    Ok(build_tilting(j, p32, levels)?.truncate_levels(r_max))
}

fn build_tilting(j: u64, p: u32, levels: usize) -> Result<ExplicitModule, OracleError> {
    let pu = p as u64;
    if j < pu {
        return Ok(symmetric_power(j, p, levels));
    }
    if j <= 2 * pu - 2 {
        let ambient = symmetric_power(pu - 1, p, levels).tensor(&symmetric_power(j - pu + 1, p, levels))?;
        return split_top(ambient, j);
    }
    let (j1, j2) = tilting_normal_form(j, pu);
    build_tilting(j1, p, levels)?.tensor(&build_tilting(j2, p, levels - 1)?.frobenius_twist())
}

/// Split off the indecomposable summand containing the (one-dimensional)
/// highest weight space of weight `j`, using Fitting decompositions of random
/// endomorphisms.
fn split_top(mut module: ExplicitModule, j: u64) -> Result<ExplicitModule, OracleError> {
    const ATTEMPTS: usize = 64;
    let target = char_tilting(j, module.p as u64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ j);
    for _ in 0..ATTEMPTS {
        if module.character() == target {
            return Ok(module);
        }
        let comm = commutant_basis(&module)?;
        let dim = module.dim();
        let mut phi = FpMatrix::zeros_unchecked(module.p, dim, dim);
        for x in &comm {
            let c = rng.gen_range(0..module.p);
            phi = phi.lin_comb(1, x, c)?;
        }
        let top = module
            .weights
            .iter()
            .position(|&w| w == j as i64)
            .ok_or(OracleError::Argument("ambient module lacks the highest weight"))?;
        let lambda = phi.get(top, top);
        let shifted = phi.lin_comb(1, &FpMatrix::identity(module.p as u64, dim)?, module.p - lambda)?;
        let psi = shifted.pow(dim as u32)?;
        let (kernel, image) = fitting_split(&psi, &module.weights);
        if kernel.len() < dim {
            module = module.restrict(&kernel, &image)?;
        }
    }
    Err(OracleError::Split { j, attempts: ATTEMPTS })
}

/// Weight-homogeneous bases of `ker psi` and `im psi` for a weight-preserving `psi`.
#[allow(clippy::type_complexity)]
fn fitting_split(psi: &FpMatrix, weights: &[i64]) -> (Vec<(Vec<u32>, i64)>, Vec<Vec<u32>>) {
    let mut by_weight: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &w) in weights.iter().enumerate() {
        by_weight.entry(w).or_default().push(i);
    }
    let embed = |local: &[u32], idx: &[usize]| {
        let mut v = vec![0u32; weights.len()];
        for (&x, &i) in local.iter().zip(idx) {
            v[i] = x;
        }
        v
    };
    let (mut kernel, mut image) = (Vec::new(), Vec::new());
    for (w, idx) in &by_weight {
        let block = submatrix(psi, idx, idx);
        kernel.extend(block.kernel_basis().iter().map(|v| (embed(v, idx), *w)));
        image.extend(block.column_space().iter().map(|v| embed(v, idx)));
    }
    (kernel, image)
}

/// Basis of the weight-preserving matrices commuting with every generator.
fn commutant_basis(module: &ExplicitModule) -> Result<Vec<FpMatrix>, OracleError> {
    let dim = module.dim();
    let w = &module.weights;
    let mut var = BTreeMap::new();
    let mut pairs = Vec::new();
    for i in 0..dim {
        for k in 0..dim {
            if w[i] == w[k] {
                var.insert((i, k), pairs.len());
                pairs.push((i, k));
            }
        }
    }
    let p = module.p as u64;
    let mut rows: Vec<SparseRow> = Vec::new();
    for a in module.raise.iter().chain(&module.lower) {
        let at = a.transpose();
        for i in 0..dim {
            for k in 0..dim {
                // (X A - A X)[i, k]
                let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
                for &(l, v) in at.row(k) {
                    if let Some(&x) = var.get(&(i, l)) {
                        *acc.entry(x).or_insert(0) += v as u64;
                    }
                }
                for &(l, v) in a.row(i) {
                    if let Some(&x) = var.get(&(l, k)) {
                        *acc.entry(x).or_insert(0) += p - v as u64;
                    }
                }
                let row: SparseRow = acc.into_iter().filter(|e| e.1 % p != 0).map(|(c, v)| (c, (v % p) as u32)).collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let system = FpMatrix::from_rows(module.p, pairs.len(), rows);
    Ok(system
        .kernel_basis()
        .into_iter()
        .map(|v| {
            let mut m = FpMatrix::zeros_unchecked(module.p, dim, dim);
            for (x, &(i, k)) in pairs.iter().enumerate() {
                if v[x] != 0 {
                    m.set(i, k, v[x]);
                }
            }
            m
        })
        .collect())
}

/// Character of `(M (x) S_d)^{G_r}`, weights divided by `p^r`.
pub fn graded_invariants_of_tensor(
    module: &ExplicitModule,
    n: usize,
    r: u32,
    d: u32,
) -> Result<WeightCharacter, OracleError> {
    if r == 0 || module.levels() < r as usize {
        return Err(OracleError::Argument("module needs at least r Frobenius levels"));
    }
    let p = module.p as u64;
    let q = pow_u64(p, r) as i64;
    let top = pow_u64(p, r - 1);
    let transposed = |op: Operator| -> Result<Vec<FpMatrix>, OracleError> {
        (0..=top).map(|a| Ok(module.divided_power(op, a)?.transpose())).collect()
    };
    let ops = [(Operator::Raise, transposed(Operator::Raise)?), (Operator::Lower, transposed(Operator::Lower)?)];
    let span = d as i64 + module.weights.iter().map(|w| w.abs()).max().unwrap_or(0);
    let mut tasks = Vec::new();
    for (bounds, count) in sorted_multidegrees(n, d) {
        for w in (-span..=span).filter(|w| w % q == 0) {
            tasks.push((bounds.clone(), count, w));
        }
    }
    let dims = par_map(&tasks, |(bounds, _, w)| tensor_block_dim(module, &ops, bounds, *w, r));
    let mut out = WeightCharacter::zero();
    for ((_, count, w), dim) in tasks.iter().zip(dims) {
        out.add_weight(w / q, dim as u64 * count);
    }
    Ok(out)
}

/// Basis of `M (x) S` restricted to one multidegree and one total weight.
struct TensorBlock {
    entries: Vec<(usize, Vec<u32>)>,
    index: BTreeMap<(usize, Vec<u32>), usize>,
}

impl TensorBlock {
    fn new(weights: &[i64], bounds: &[u32], w: i64) -> Self {
        let deg: i64 = bounds.iter().map(|&b| b as i64).sum();
        let mut entries = Vec::new();
        for (k, &mu) in weights.iter().enumerate() {
            let twice = w - mu + deg;
            if twice < 0 || twice % 2 != 0 || twice / 2 > deg {
                continue;
            }
            for x in compositions_bounded(bounds, (twice / 2) as u32) {
                entries.push((k, x));
            }
        }
        let index = entries.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        TensorBlock { entries, index }
    }
}

fn tensor_block_dim(
    module: &ExplicitModule,
    ops: &[(Operator, Vec<FpMatrix>); 2],
    bounds: &[u32],
    w: i64,
    r: u32,
) -> usize {
    let p = module.p;
    let src = TensorBlock::new(&module.weights, bounds, w);
    if src.entries.is_empty() {
        return 0;
    }
    let mut ech = Echelon::new(p, src.entries.len());
    for s in 0..r {
        let step = (p as u64).pow(s);
        for (op, powers) in ops {
            let sign = if *op == Operator::Raise { 1 } else { -1 };
            let tgt = TensorBlock::new(&module.weights, bounds, w + sign * 2 * step as i64);
            if tgt.entries.is_empty() {
                continue;
            }
            let mut rows: Vec<SparseRow> = vec![Vec::new(); tgt.entries.len()];
            for (col, (k, x)) in src.entries.iter().enumerate() {
                let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
                for a in 0..=step {
                    for &(k2, v) in powers[a as usize].row(*k) {
                        for (x2, c) in block_images(*op, bounds, x, (step - a) as u32, p) {
                            if let Some(&t) = tgt.index.get(&(k2, x2)) {
                                *acc.entry(t).or_insert(0) += v as u64 * c as u64 % p as u64;
                            }
                        }
                    }
                }
                for (t, v) in acc {
                    if v % p as u64 != 0 {
                        rows[t].push((col, (v % p as u64) as u32));
                    }
                }
            }
            for row in &rows {
                if ech.rank() == src.entries.len() {
                    return 0;
                }
                ech.insert(row);
            }
        }
    }
    src.entries.len() - ech.rank()
}

// ---------------------------------------------------------------------------
// B_1-cohomology of complexes of B-modules

/// A module for the Borel subgroup of lower triangular matrices, given by a
/// weight basis and the action of `f` (weight -2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BModule {
    pub weights: Vec<i64>,
    pub lower: FpMatrix,
}

impl BModule {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// The simple module `L(i)` realized on `x^a y^{i-a}` with `f = y d/dx`.
    pub fn simple(i: u64, p: u64) -> Result<BModule, OracleError> {
        let p32 = prime32(p)?;
        let dim = i as usize + 1;
        let mut f = FpMatrix::zeros_unchecked(p32, dim, dim);
        for a in 1..dim {
            f.set(a - 1, a, (a as u64 % p) as u32);
        }
        Ok(BModule { weights: (0..=i as i64).map(|a| 2 * a - i as i64).collect(), lower: f })
    }

    pub fn zero(p: u64) -> Result<BModule, OracleError> {
        Ok(BModule { weights: Vec::new(), lower: FpMatrix::zeros(p, 0, 0)? })
    }

    /// Tensor with the one-dimensional module of weight `s`.
    pub fn shift_weights(&self, s: i64) -> BModule {
        BModule { weights: self.weights.iter().map(|w| w + s).collect(), lower: self.lower.clone() }
    }
}

/// Bounded cochain complex of B-modules; `terms[i]` sits in degree `first + i`
/// and `maps[i]` goes from `terms[i]` to `terms[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BComplex {
    p: u32,
    first: i64,
    terms: Vec<BModule>,
    maps: Vec<FpMatrix>,
}

impl BComplex {
    pub fn new(p: u64, first: i64, terms: Vec<BModule>, maps: Vec<FpMatrix>) -> Result<BComplex, OracleError> {
        let p = prime32(p)?;
        if terms.is_empty() || maps.len() + 1 != terms.len() {
            return Err(OracleError::Argument("a complex needs one map between consecutive terms"));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.cols() != terms[i].dim() || m.rows() != terms[i + 1].dim() {
                return Err(OracleError::Argument("differential shape does not match its terms"));
            }
        }
        Ok(BComplex { p, first, terms, maps })
    }

    /// A single module placed in degree 0.
    pub fn single(p: u64, module: BModule) -> Result<BComplex, OracleError> {
        Self::new(p, 0, vec![module], Vec::new())
    }

    pub fn first_degree(&self) -> i64 {
        self.first
    }
    pub fn terms(&self) -> &[BModule] {
        &self.terms
    }

    pub fn shift_weights(&self, s: i64) -> BComplex {
        BComplex { terms: self.terms.iter().map(|t| t.shift_weights(s)).collect(), ..self.clone() }
    }

    /// The stupid truncation keeping degrees `>= min_degree`.
    pub fn truncate_below(&self, min_degree: i64) -> BComplex {
        let drop = (min_degree - self.first).clamp(0, self.terms.len() as i64 - 1) as usize;
        BComplex {
            p: self.p,
            first: self.first + drop as i64,
            terms: self.terms[drop..].to_vec(),
            maps: self.maps[drop..].to_vec(),
        }
    }

    /// Move every term up by `k` degrees (the shift `[-k]`).
    pub fn shift_degrees(&self, k: i64) -> BComplex {
        BComplex { first: self.first + k, ..self.clone() }
    }

    /// Tensor product with Koszul signs; summands of a term are ordered by the
    /// degree of the left factor.
    pub fn tensor(&self, other: &BComplex) -> Result<BComplex, OracleError> {
        if self.p != other.p {
            return Err(OracleError::Argument("tensor product over different primes"));
        }
        let p = self.p as u64;
        let (na, nb) = (self.terms.len(), other.terms.len());
        let count = na + nb - 1;
        // offsets[m][ia]: start of the summand terms[ia] (x) other.terms[m - ia]
        let mut offsets = vec![vec![usize::MAX; na]; count];
        let mut dims = vec![0usize; count];
        for (m, row) in offsets.iter_mut().enumerate() {
            for (ia, slot) in row.iter_mut().enumerate() {
                if m >= ia && m - ia < nb {
                    *slot = dims[m];
                    dims[m] += self.terms[ia].dim() * other.terms[m - ia].dim();
                }
            }
        }
        let mut terms = Vec::with_capacity(count);
        for (m, &dim) in dims.iter().enumerate() {
            let mut weights = vec![0i64; dim];
            let mut lower = TripletBuilder::new(self.p, dim, dim);
            for (ia, &off) in offsets[m].iter().enumerate() {
                if m < ia || m - ia >= nb {
                    continue;
                }
                let (a, b) = (&self.terms[ia], &other.terms[m - ia]);
                for (i, wa) in a.weights.iter().enumerate() {
                    for (k, wb) in b.weights.iter().enumerate() {
                        weights[off + i * b.dim() + k] = wa + wb;
                    }
                }
                let f = a.lower.kron(&FpMatrix::identity(p, b.dim())?)?.add(&FpMatrix::identity(p, a.dim())?.kron(&b.lower)?)?;
                lower.place(off, off, &f);
            }
            terms.push(BModule { weights, lower: lower.build() });
        }
        let mut maps = Vec::with_capacity(count.saturating_sub(1));
        for m in 0..count - 1 {
            let mut d = TripletBuilder::new(self.p, dims[m + 1], dims[m]);
            for ia in 0..na {
                if m < ia || m - ia >= nb {
                    continue;
                }
                let ib = m - ia;
                let (a, b) = (&self.terms[ia], &other.terms[ib]);
                if ia + 1 < na {
                    let block = self.maps[ia].kron(&FpMatrix::identity(p, b.dim())?)?;
                    d.place(offsets[m + 1][ia + 1], offsets[m][ia], &block);
                }
                if ib + 1 < nb {
                    let degree = self.first + ia as i64;
                    let sign = if degree.rem_euclid(2) == 0 { 1 } else { self.p - 1 };
                    let block = FpMatrix::identity(p, a.dim())?.kron(&other.maps[ib])?.scale(sign);
                    d.place(offsets[m + 1][ia], offsets[m][ia], &block);
                }
            }
            maps.push(d.build());
        }
        BComplex::new(p, self.first + other.first, terms, maps)
    }
}

/// Accumulates entries (summing duplicates) and builds a sparse matrix.
struct TripletBuilder {
    p: u32,
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, u32)>,
}

impl TripletBuilder {
    fn new(p: u32, rows: usize, cols: usize) -> Self {
        TripletBuilder { p, rows, cols, entries: Vec::new() }
    }

    fn push(&mut self, r: usize, c: usize, v: u32) {
        self.entries.push((r, c, v));
    }

    fn place(&mut self, row_off: usize, col_off: usize, block: &FpMatrix) {
        for r in 0..block.rows() {
            for &(c, v) in block.row(r) {
                self.push(row_off + r, col_off + c, v);
            }
        }
    }

    fn build(mut self) -> FpMatrix {
        self.entries.sort_unstable_by_key(|e| (e.0, e.1));
        let p = self.p as u64;
        let mut data: Vec<SparseRow> = vec![Vec::new(); self.rows];
        let mut i = 0;
        while i < self.entries.len() {
            let (r, c, _) = self.entries[i];
            let mut v = 0u64;
            while i < self.entries.len() && self.entries[i].0 == r && self.entries[i].1 == c {
                v += self.entries[i].2 as u64;
                i += 1;
            }
            if !v.is_multiple_of(p) {
                data[r].push((c, (v % p) as u32));
            }
        }
        FpMatrix::from_rows(self.p, self.cols, data)
    }
}

/// Weight carried by the `v`-th term of the periodic resolution of the trivial
/// module over `Dist(U_1) = k[f]/(f^p)`: `2ip` for `v = 2i`, `2ip + 2` for `v = 2i + 1`.
fn resolution_twist(v: i64, p: i64) -> i64 {
    2 * v.div_euclid(2) * p + if v.rem_euclid(2) == 1 { 2 } else { 0 }
}

/// `H^l(B_1, C)` (or its Tate version) as a character of the Frobenius twist of
/// `B`: weights of the `T_1`-invariant part, divided by `p`.
///
/// Computed as the cohomology of the total complex of `C` against the periodic
/// resolution `... -> M (x) (2 - 2p) -f^{p-1}-> M -f-> M (x) 2 -f^{p-1}-> M (x) 2p -> ...`
/// (with `M` in horizontal degree 0), truncated to horizontal degrees `>= 0`
/// for ordinary cohomology.
pub fn b1_cohomology_oracle(c: &BComplex, l: i64, tate: bool) -> Result<WeightCharacter, OracleError> {
    let p = c.p as i64;
    let lower_t: Vec<FpMatrix> = c.terms.iter().map(|t| t.lower.transpose()).collect();
    let lower_pow_t: Vec<FpMatrix> =
        c.terms.iter().map(|t| Ok(t.lower.pow(c.p - 1)?.transpose())).collect::<Result<_, OracleError>>()?;
    let maps_t: Vec<FpMatrix> = c.maps.iter().map(FpMatrix::transpose).collect();

    // Basis of Tot^m restricted to total weight w: (term index, v, basis index).
    let basis = |m: i64, w: i64| -> Vec<(usize, i64, usize)> {
        let mut out = Vec::new();
        for (ti, term) in c.terms.iter().enumerate() {
            let v = m - (c.first + ti as i64);
            if !tate && v < 0 {
                continue;
            }
            let tw = resolution_twist(v, p);
            for (b, &wt) in term.weights.iter().enumerate() {
                if wt + tw == w {
                    out.push((ti, v, b));
                }
            }
        }
        out
    };
    let rank_between = |src: &[(usize, i64, usize)], tgt: &[(usize, i64, usize)]| -> usize {
        if src.is_empty() || tgt.is_empty() {
            return 0;
        }
        let index: BTreeMap<(usize, i64, usize), usize> = tgt.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); tgt.len()];
        for (col, &(ti, v, b)) in src.iter().enumerate() {
            if ti + 1 < c.terms.len() {
                for &(b2, val) in maps_t[ti].row(b) {
                    if let Some(&t) = index.get(&(ti + 1, v, b2)) {
                        *rows[t].entry(col).or_insert(0) += val as u64;
                    }
                }
            }
            let horizontal = if v.rem_euclid(2) == 0 { &lower_t[ti] } else { &lower_pow_t[ti] };
            let degree = c.first + ti as i64;
            for &(b2, val) in horizontal.row(b) {
                if let Some(&t) = index.get(&(ti, v + 1, b2)) {
                    let val = if degree.rem_euclid(2) == 0 { val } else { c.p - val };
                    *rows[t].entry(col).or_insert(0) += val as u64;
                }
            }
        }
        let mut ech = Echelon::new(c.p, src.len());
        for row in rows {
            let sparse: SparseRow =
                row.into_iter().filter(|e| e.1 % p as u64 != 0).map(|(k, v)| (k, (v % p as u64) as u32)).collect();
            ech.insert(&sparse);
        }
        ech.rank()
    };

    let mut weights: Vec<i64> = Vec::new();
    for (ti, term) in c.terms.iter().enumerate() {
        let v = l - (c.first + ti as i64);
        if !tate && v < 0 {
            continue;
        }
        let tw = resolution_twist(v, p);
        weights.extend(term.weights.iter().map(|w| w + tw).filter(|w| w.rem_euclid(p) == 0));
    }
    weights.sort_unstable();
    weights.dedup();

    let mut out = WeightCharacter::zero();
    for w in weights {
        let here = basis(l, w);
        let dim = here.len() - rank_between(&here, &basis(l + 1, w)) - rank_between(&basis(l - 1, w), &here);
        out.add_weight(w / p, dim as u64);
    }
    Ok(out)
}

/// The complex `C_jk^(t)`: the tensor product over `i` of
/// `L(t_i - 1) (x) (-1) -y-> L(t_i)` (degrees -1, 0), twisted by weight `j`,
/// stupidly truncated to degrees `>= -k` and shifted up by `k`.
pub fn c_jk_complex(p: u64, j: u64, k: u64, t: &[u64]) -> Result<BComplex, OracleError> {
    if t.iter().any(|&ti| ti >= p) {
        return Err(OracleError::Argument("tuple entries must lie in [0, p - 1]"));
    }
    let p32 = prime32(p)?;
    let mut acc = BComplex::single(p, BModule { weights: vec![0], lower: FpMatrix::zeros(p, 1, 1)? })?;
    for &ti in t {
        let source = if ti == 0 { BModule::zero(p)? } else { BModule::simple(ti - 1, p)?.shift_weights(-1) };
        let target = BModule::simple(ti, p)?;
        let mut y = FpMatrix::zeros_unchecked(p32, target.dim(), source.dim());
        for a in 0..source.dim() {
            y.set(a, a, 1);
        }
        acc = acc.tensor(&BComplex::new(p, -1, vec![source, target], vec![y])?)?;
    }
    Ok(acc.shift_weights(j as i64).truncate_below(-(k as i64)).shift_degrees(k as i64))
}

// ---------------------------------------------------------------------------
// Explicit equivariant resolution of M_j

/// Generator space `S^w V (x) wedge^a F` of one resolution term, with basis
/// `(c, subset)` standing for `x^c y^{w-c} (x) e_subset`.
#[derive(Debug, Clone)]
struct GeneratorSpace {
    w: u64,
    basis: Vec<(u64, u32)>,
}

impl GeneratorSpace {
    fn new(n: usize, w: u64, a: u64) -> Self {
        let mut basis = Vec::new();
        for c in 0..=w {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as u64 == a {
                    basis.push((c, mask));
                }
            }
        }
        GeneratorSpace { w, basis }
    }

    fn weight(&self, i: usize) -> i64 {
        2 * self.basis[i].0 as i64 - self.w as i64
    }

    fn multidegree(&self, i: usize, n: usize) -> Vec<u32> {
        (0..n).map(|b| (self.basis[i].1 >> b) & 1).collect()
    }
}

/// Operators used to pin down equivariant maps: divided powers of `e` and `f`
/// and the root vectors `E_ab` of `gl(F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    Sl2(Operator, u64),
    Gl(usize, usize),
}

fn generator_operator(space: &GeneratorSpace, sym: Symmetry, p: u32) -> FpMatrix {
    let dim = space.basis.len();
    let index: BTreeMap<(u64, u32), usize> = space.basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut m = FpMatrix::zeros_unchecked(p, dim, dim);
    for (col, &(c, mask)) in space.basis.iter().enumerate() {
        match sym {
            Symmetry::Sl2(Operator::Raise, k) if c + k <= space.w => {
                m.set(index[&(c + k, mask)], col, binom_mod(space.w - c, k, p));
            }
            Symmetry::Sl2(Operator::Lower, k) if c >= k => {
                m.set(index[&(c - k, mask)], col, binom_mod(c, k, p));
            }
            Symmetry::Gl(a, b) if mask >> b & 1 == 1 && mask >> a & 1 == 0 => {
                let (lo, hi) = (a.min(b), a.max(b));
                let between = (mask & !(1 << b)) & (((1u32 << hi) - 1) & !((1u32 << (lo + 1)) - 1));
                let v = if between.count_ones().is_multiple_of(2) { 1 } else { p - 1 };
                m.set(index[&(c, mask & !(1 << b) | (1 << a))], col, v);
            }
            _ => {}
        }
    }
    m
}

fn monomial_operator(basis: &[Vec<u32>], n: usize, sym: Symmetry, p: u32) -> FpMatrix {
    let index: BTreeMap<&[u32], usize> = basis.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let mut t = FpMatrix::zeros_unchecked(p, basis.len(), basis.len());
    for (col, mono) in basis.iter().enumerate() {
        match sym {
            Symmetry::Sl2(op, k) => {
                let caps: Vec<u32> =
                    (0..n).map(|i| if op == Operator::Raise { mono[2 * i + 1] } else { mono[2 * i] }).collect();
                for (ms, c) in distribute(&caps, k as u32, p) {
                    let mut target = mono.clone();
                    for i in 0..n {
                        if op == Operator::Raise {
                            target[2 * i] += ms[i];
                            target[2 * i + 1] -= ms[i];
                        } else {
                            target[2 * i] -= ms[i];
                            target[2 * i + 1] += ms[i];
                        }
                    }
                    t.add_to(col, index[target.as_slice()], c);
                }
            }
            Symmetry::Gl(a, b) => {
                for off in 0..2 {
                    let e = mono[2 * b + off];
                    if e > 0 {
                        let mut target = mono.clone();
                        target[2 * b + off] -= 1;
                        target[2 * a + off] += 1;
                        t.add_to(col, index[target.as_slice()], e % p);
                    }
                }
            }
        }
    }
    t.transpose()
}

/// One differential of the explicit resolution at the level of generators:
/// the image of each generator of the source term in `target (x) S_delta`.
#[derive(Debug, Clone)]
pub struct GeneratorMap {
    /// Homological position of the source term.
    pub position: i64,
    pub delta: u32,
    /// For each source generator: `(target generator, monomial exponents, coefficient)`.
    pub images: Vec<Vec<(usize, Vec<u32>, u32)>>,
}

/// Explicit equivariant resolution of `M_j` through internal degree `max_degree`.
#[derive(Debug, Clone)]
pub struct EquivariantResolution {
    pub n: usize,
    pub j: u64,
    pub p: u32,
    pub terms: Vec<ResolutionTerm>,
    pub maps: Vec<GeneratorMap>,
    /// `homology[i][d]`: dimension of the homology at position `-(i + 1)` in degree `d`.
    pub homology: Vec<Vec<u64>>,
    /// `kernels[k - 1][d]`: character of `(K_jk)_d = ker(P_{-k} -> P_{-k+1})_d`.
    pub kernels: Vec<Vec<WeightCharacter>>,
}

/// Build the resolution of `M_j` over F_p with maps solved from the
/// equivariance conditions, and compute its homology and the kernels `K_jk`.
pub fn build_equivariant_resolution(
    n: usize,
    j: u64,
    p: u64,
    max_degree: u32,
) -> Result<EquivariantResolution, OracleError> {
    let p32 = prime32(p)?;
    let terms = resolution_spec(n as u64, j)?;
    let spaces: Vec<GeneratorSpace> = terms.iter().map(|t| GeneratorSpace::new(n, t.tilting, t.wedge)).collect();
    let mut maps = Vec::new();
    for i in 1..terms.len() {
        maps.push(solve_generator_map(n, p32, &terms, &spaces, i)?);
    }
    for i in 1..maps.len() {
        check_composite(p32, &maps[i - 1], &maps[i], terms[i].position)?;
    }

    let mut tasks = Vec::new();
    for d in 0..=max_degree {
        for (bounds, count) in sorted_multidegrees(n, d) {
            let span = d as i64 + n as i64;
            for w in -span..=span {
                tasks.push((d, bounds.clone(), count, w));
            }
        }
    }
    let results = par_map(&tasks, |(_, bounds, _, w)| resolution_block(n, p32, &spaces, &maps, bounds, *w));
    let len = terms.len();
    let mut homology = vec![vec![0u64; max_degree as usize + 1]; len - 1];
    let mut kernels = vec![vec![WeightCharacter::zero(); max_degree as usize + 1]; len - 1];
    for ((d, _, count, w), (dims, ranks)) in tasks.iter().zip(results) {
        for i in 1..len {
            let ker = dims[i] - ranks[i];
            let im = if i + 1 < len { ranks[i + 1] } else { 0 };
            homology[i - 1][*d as usize] += (ker - im) as u64 * count;
            kernels[i - 1][*d as usize].add_weight(*w, (dims[i] - ranks[i]) as u64 * count);
        }
    }
    Ok(EquivariantResolution { n, j, p: p32, terms, maps, homology, kernels })
}

fn solve_generator_map(
    n: usize,
    p: u32,
    terms: &[ResolutionTerm],
    spaces: &[GeneratorSpace],
    i: usize,
) -> Result<GeneratorMap, OracleError> {
    let (src, tgt) = (&spaces[i], &spaces[i - 1]);
    let delta = (terms[i - 1].twist - terms[i].twist) as u32;
    let monos = monomial_basis(n, delta);
    let max_weight = (tgt.w + delta as u64).max(src.w);
    let mut syms = Vec::new();
    let mut step = 1u64;
    while step <= 2 * max_weight {
        syms.push(Symmetry::Sl2(Operator::Raise, step));
        syms.push(Symmetry::Sl2(Operator::Lower, step));
        step *= p as u64;
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                syms.push(Symmetry::Gl(a, b));
            }
        }
    }

    // Target basis index: g * |monos| + m.
    let key_src = |g: usize| (src.weight(g), src.multidegree(g, n));
    let key_tgt = |g: usize, m: usize| {
        let mono = &monos[m];
        let w = tgt.weight(g) + (0..n).map(|k| mono[2 * k] as i64 - mono[2 * k + 1] as i64).sum::<i64>();
        let md: Vec<u32> = tgt.multidegree(g, n).iter().enumerate().map(|(k, b)| b + mono[2 * k] + mono[2 * k + 1]).collect();
        (w, md)
    };
    let mut var = BTreeMap::new();
    let mut vars = Vec::new();
    let mut tgt_by_key: BTreeMap<(i64, Vec<u32>), Vec<usize>> = BTreeMap::new();
    for g in 0..tgt.basis.len() {
        for m in 0..monos.len() {
            tgt_by_key.entry(key_tgt(g, m)).or_default().push(g * monos.len() + m);
        }
    }
    for s in 0..src.basis.len() {
        if let Some(ts) = tgt_by_key.get(&key_src(s)) {
            for &t in ts {
                var.insert((t, s), vars.len());
                vars.push((t, s));
            }
        }
    }

    let pu = p as u64;
    let mut rows: Vec<SparseRow> = Vec::new();
    for sym in syms {
        let x = generator_operator(src, sym, p);
        let y = match sym {
            Symmetry::Sl2(op, k) => {
                let mut acc = FpMatrix::zeros_unchecked(p, tgt.basis.len() * monos.len(), tgt.basis.len() * monos.len());
                for a in 0..=k {
                    let ga = if a == 0 {
                        FpMatrix::identity(pu, tgt.basis.len())?
                    } else {
                        generator_operator(tgt, Symmetry::Sl2(op, a), p)
                    };
                    let mb = if a == k {
                        FpMatrix::identity(pu, monos.len())?
                    } else {
                        monomial_operator(&monos, n, Symmetry::Sl2(op, k - a), p)
                    };
                    acc = acc.add(&ga.kron(&mb)?)?;
                }
                acc
            }
            Symmetry::Gl(..) => generator_operator(tgt, sym, p)
                .kron(&FpMatrix::identity(pu, monos.len())?)?
                .add(&FpMatrix::identity(pu, tgt.basis.len())?.kron(&monomial_operator(&monos, n, sym, p))?)?,
        };
        let yt = y.transpose();
        // (Y phi - phi X)[t, s] = sum_t' Y[t, t'] phi[t', s] - sum_s' phi[t, s'] X[s', s]
        let mut eqs: BTreeMap<(usize, usize), BTreeMap<usize, u64>> = BTreeMap::new();
        for (v, &(t1, s)) in vars.iter().enumerate() {
            for &(t, val) in yt.row(t1) {
                *eqs.entry((t, s)).or_default().entry(v).or_insert(0) += val as u64;
            }
        }
        for (v, &(t, s1)) in vars.iter().enumerate() {
            for &(s, val) in x.row(s1) {
                *eqs.entry((t, s)).or_default().entry(v).or_insert(0) += pu - val as u64;
            }
        }
        for (_, row) in eqs {
            let sparse: SparseRow = row.into_iter().filter(|e| e.1 % pu != 0).map(|(c, v)| (c, (v % pu) as u32)).collect();
            if !sparse.is_empty() {
                rows.push(sparse);
            }
        }
    }
    let system = FpMatrix::from_rows(p, vars.len(), rows);
    let kernel = system.kernel_basis();
    if kernel.len() != 1 {
        return Err(OracleError::Equivariance { position: terms[i].position, dim: kernel.len() });
    }
    let sol = &kernel[0];
    let lead = sol.iter().copied().find(|&v| v != 0).expect("kernel vector is nonzero");
    let norm = inv_mod(lead, p) as u64;
    let mut images = vec![Vec::new(); src.basis.len()];
    for (v, &(t, s)) in vars.iter().enumerate() {
        if sol[v] != 0 {
            let (g, m) = (t / monos.len(), t % monos.len());
            images[s].push((g, monos[m].clone(), (sol[v] as u64 * norm % pu) as u32));
        }
    }
    Ok(GeneratorMap { position: terms[i].position, delta, images })
}

fn multiply(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn check_composite(p: u32, first: &GeneratorMap, second: &GeneratorMap, position: i64) -> Result<(), OracleError> {
    // `second` maps into the source of `first`.
    for gens in &second.images {
        let mut acc: BTreeMap<(usize, Vec<u32>), u64> = BTreeMap::new();
        for (g1, m1, c1) in gens {
            for (g0, m0, c0) in &first.images[*g1] {
                *acc.entry((*g0, multiply(m0, m1))).or_insert(0) += *c0 as u64 * *c1 as u64 % p as u64;
            }
        }
        if acc.values().any(|v| v % p as u64 != 0) {
            return Err(OracleError::NotAComplex { position });
        }
    }
    Ok(())
}

type BlockBasis = (Vec<(usize, Vec<u32>)>, BTreeMap<(usize, Vec<u32>), usize>);

/// Basis of `U (x) S` on one (multidegree, weight) block: pairs of a generator
/// and the x-exponents of the monomial factor.
fn term_block(n: usize, space: &GeneratorSpace, bounds: &[u32], w: i64) -> BlockBasis {
    let mut entries = Vec::new();
    for g in 0..space.basis.len() {
        let md = space.multidegree(g, n);
        if md.iter().zip(bounds).any(|(a, b)| a > b) {
            continue;
        }
        let rest: Vec<u32> = bounds.iter().zip(&md).map(|(b, a)| b - a).collect();
        let deg: i64 = rest.iter().map(|&x| x as i64).sum();
        let twice = w - space.weight(g) + deg;
        if twice < 0 || twice % 2 != 0 || twice / 2 > deg {
            continue;
        }
        for x in compositions_bounded(&rest, (twice / 2) as u32) {
            entries.push((g, x));
        }
    }
    let index = entries.iter().enumerate().map(|(k, e)| (e.clone(), k)).collect();
    (entries, index)
}

/// Rows (indexed by target basis) of the differential given by `map` on a block.
fn differential_rows(
    n: usize,
    map: &GeneratorMap,
    src: &[(usize, Vec<u32>)],
    tgt_index: &BTreeMap<(usize, Vec<u32>), usize>,
) -> Vec<BTreeMap<usize, u64>> {
    let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); tgt_index.len()];
    for (col, (g, x)) in src.iter().enumerate() {
        for (g2, mono, c) in &map.images[*g] {
            // The y-exponents are determined by the block's multidegree.
            let x2: Vec<u32> = (0..n).map(|k| x[k] + mono[2 * k]).collect();
            if let Some(&t) = tgt_index.get(&(*g2, x2)) {
                *rows[t].entry(col).or_insert(0) += *c as u64;
            }
        }
    }
    rows
}

fn insert_rows(ech: &mut Echelon, p: u32, rows: Vec<BTreeMap<usize, u64>>) {
    let pu = p as u64;
    for row in rows {
        let sparse: SparseRow = row.into_iter().filter(|e| e.1 % pu != 0).map(|(k, v)| (k, (v % pu) as u32)).collect();
        ech.insert(&sparse);
    }
}

/// Dimensions of every term and ranks of every differential on one block.
/// Returns `(dims, ranks)` with `ranks[i]` the rank of the map out of position `-i`.
fn resolution_block(
    n: usize,
    p: u32,
    spaces: &[GeneratorSpace],
    maps: &[GeneratorMap],
    bounds: &[u32],
    w: i64,
) -> (Vec<usize>, Vec<usize>) {
    let bases: Vec<BlockBasis> = spaces.iter().map(|s| term_block(n, s, bounds, w)).collect();
    let dims: Vec<usize> = bases.iter().map(|b| b.0.len()).collect();
    let mut ranks = vec![0usize; spaces.len()];
    for i in 1..spaces.len() {
        let (src, _) = &bases[i];
        let (_, tgt_index) = &bases[i - 1];
        if src.is_empty() || tgt_index.is_empty() {
            continue;
        }
        let mut ech = Echelon::new(p, src.len());
        insert_rows(&mut ech, p, differential_rows(n, &maps[i - 1], src, tgt_index));
        ranks[i] = ech.rank();
    }
    (dims, ranks)
}

/// Character of `(K_jk)^{G_r}` in degrees `0..=max_degree`, weights divided by `p^r`.
///
/// Invariants are left exact, so this is the joint kernel on `P_{-k}` of the
/// differential and the divided powers `e^(p^s)`, `f^(p^s)` for `s < r`.
pub fn kernel_invariants(
    res: &EquivariantResolution,
    k: usize,
    r: u32,
    max_degree: u32,
) -> Result<Vec<WeightCharacter>, OracleError> {
    if k == 0 || k + 1 >= res.terms.len() || r == 0 {
        return Err(OracleError::Argument("need 1 <= k <= n - 2 and r >= 1"));
    }
    let (n, p) = (res.n, res.p);
    let spaces: Vec<GeneratorSpace> = res.terms.iter().map(|t| GeneratorSpace::new(n, t.tilting, t.wedge)).collect();
    let space = &spaces[k];
    let q = pow_u64(p as u64, r) as i64;
    // Transposed generator operators: row g lists the images of generator g.
    let mut ops: Vec<(Operator, u64, Vec<FpMatrix>)> = Vec::new();
    for s in 0..r {
        let step = pow_u64(p as u64, s);
        for op in [Operator::Raise, Operator::Lower] {
            let powers = (0..=step)
                .map(|a| {
                    if a == 0 {
                        FpMatrix::identity(p as u64, space.basis.len()).map_err(OracleError::from)
                    } else {
                        Ok(generator_operator(space, Symmetry::Sl2(op, a), p).transpose())
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            ops.push((op, step, powers));
        }
    }
    let mut tasks = Vec::new();
    for d in 0..=max_degree {
        let span = d as i64 + n as i64;
        for (bounds, count) in sorted_multidegrees(n, d) {
            for w in (-span..=span).filter(|w| w % q == 0) {
                tasks.push((d, bounds.clone(), count, w));
            }
        }
    }
    let dims = par_map(&tasks, |(_, bounds, _, w)| {
        let (src, _) = term_block(n, space, bounds, *w);
        if src.is_empty() {
            return 0;
        }
        let mut ech = Echelon::new(p, src.len());
        let (_, lower_index) = term_block(n, &spaces[k - 1], bounds, *w);
        insert_rows(&mut ech, p, differential_rows(n, &res.maps[k - 1], &src, &lower_index));
        for (op, step, powers) in &ops {
            let sign = if *op == Operator::Raise { 1 } else { -1 };
            let (tgt, tgt_index) = term_block(n, space, bounds, w + sign * 2 * *step as i64);
            if tgt.is_empty() {
                continue;
            }
            let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); tgt.len()];
            for (col, (g, x)) in src.iter().enumerate() {
                let bits = space.multidegree(*g, n);
                let rest: Vec<u32> = bounds.iter().zip(&bits).map(|(b, a)| b - a).collect();
                for a in 0..=*step {
                    let images = block_images(*op, &rest, x, (*step - a) as u32, p);
                    for &(g2, v) in powers[a as usize].row(*g) {
                        for (x2, c) in &images {
                            if let Some(&t) = tgt_index.get(&(g2, x2.clone())) {
                                *rows[t].entry(col).or_insert(0) += v as u64 * *c as u64;
                            }
                        }
                    }
                }
            }
            insert_rows(&mut ech, p, rows);
        }
        src.len() - ech.rank()
    });
    let mut out = vec![WeightCharacter::zero(); max_degree as usize + 1];
    for ((d, _, count, w), dim) in tasks.iter().zip(dims) {
        out[*d as usize].add_weight(w / q, dim as u64 * count);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2_characters::binomial;

    #[test]
    fn monomial_count() {
        assert_eq!(monomial_basis(4, 2).len() as u64, binomial(2 + 7, 7));
        assert_eq!(monomial_basis(2, 3).len() as u64, binomial(3 + 3, 3));
    }

    #[test]
    fn raise_then_lower_on_small_degree() {
        let e = divided_power_matrix(Operator::Raise, 1, 1, 2, 5).unwrap();
        // basis of S_2 for n = 1: y^2, xy, x^2 (exponents (0,2), (1,1), (2,0))
        assert_eq!(e.to_dense(), vec![vec![0, 0, 0], vec![2, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn invariants_in_degree_zero_and_two() {
        assert_eq!(gr_invariants_s(4, 3, 1, 0).unwrap(), WeightCharacter::trivial());
        // S_2^{G_1} for p = 3: the weight-0 invariants are the six Plucker brackets.
        assert_eq!(gr_invariants_s(4, 3, 1, 2).unwrap(), WeightCharacter::from_pairs([(0, 6)]));
    }

    #[test]
    fn weight_one_invariant_in_degree_nine() {
        let c = gr_invariants_s(4, 3, 2, 9).unwrap();
        assert!(c.multiplicity(1) > 0);
    }

    #[test]
    fn symmetric_reduction_matches_exhaustive() {
        for d in 0..=5 {
            assert_eq!(gr_invariants_s(3, 3, 1, d).unwrap(), gr_invariants_s_exhaustive(3, 3, 1, d).unwrap());
        }
    }

    #[test]
    fn tilting_models_have_tilting_characters() {
        for (j, p) in [(3u64, 3u64), (4, 3), (7, 3), (8, 3), (6, 5), (11, 5)] {
            let m = realize_tilting(j, p, 2).unwrap();
            assert_eq!(m.character(), char_tilting(j, p).unwrap(), "T({j}) at p = {p}");
        }
    }

    #[test]
    fn g1_invariants_of_small_tiltings() {
        let t3 = realize_tilting(3, 3, 1).unwrap();
        assert!(graded_invariants_of_tensor(&t3, 4, 1, 0).unwrap().is_zero());
        let t4 = realize_tilting(4, 3, 1).unwrap();
        assert_eq!(graded_invariants_of_tensor(&t4, 4, 1, 0).unwrap(), WeightCharacter::trivial());
    }

    #[test]
    fn b1_cohomology_of_trivial_module() {
        let triv = BComplex::single(3, BModule::simple(0, 3).unwrap()).unwrap();
        assert_eq!(b1_cohomology_oracle(&triv, 0, false).unwrap(), WeightCharacter::trivial());
        assert_eq!(b1_cohomology_oracle(&triv, 2, false).unwrap(), WeightCharacter::from_pairs([(2, 1)]));
    }

    #[test]
    fn resolution_kernel_dimensions_n4() {
        let res = build_equivariant_resolution(4, 1, 3, 5).unwrap();
        assert_eq!(res.kernels[0][3].dim(), 4);
        assert_eq!(res.kernels[0][4].dim(), 30);
        assert!(res.homology.iter().all(|h| h.iter().all(|&x| x == 0)));
    }

    #[test]
    fn kernel_invariants_start_at_the_bottom_piece() {
        // K_11 for n = 4 starts with wedge^3 F in degree 3, which is G_1-invariant.
        let res = build_equivariant_resolution(4, 1, 3, 6).unwrap();
        let inv = kernel_invariants(&res, 1, 1, 6).unwrap();
        assert!(inv[..3].iter().all(WeightCharacter::is_zero));
        assert_eq!(inv[3], WeightCharacter::from_pairs([(0, 4)]));
    }
}
