//! Exact linear algebra over a prime field F_p.
//!
//! Matrices are stored row-sparse. Elimination is incremental: rows are fed in
//! index order and each row is reduced against the pivots collected so far, so
//! the pivot for a column is always the lowest-index row that lands on it.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
    #[error("matrix is singular")]
    Singular,
}

/// Deterministic primality check by trial division; inputs are tiny.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u32, LinAlgError> {
    if p >= (1 << 31) || !is_prime(p) {
        return Err(LinAlgError::NotPrime(p));
    }
    Ok(p as u32)
}

/// Reduce a signed integer to its residue in `[0, p)`.
pub fn residue(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

pub fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and a is nonzero mod p.
    pow_mod(a as u64, p as u64 - 2, p)
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u32) -> u32 {
    let m = p as u64;
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u32
}

/// Binomial coefficient `C(n, k)` mod p, by Lucas' theorem.
pub fn binom_mod(mut n: u64, mut k: u64, p: u32) -> u32 {
    let pm = p as u64;
    let mut acc = 1u64;
    while k > 0 {
        let (nd, kd) = (n % pm, k % pm);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binom_mod(nd, kd, p) as u64 % pm;
        n /= pm;
        k /= pm;
    }
    acc as u32
}

fn small_binom_mod(n: u64, k: u64, p: u32) -> u32 {
    let pm = p as u64;
    let (mut num, mut den) = (1u64, 1u64);
    for i in 0..k {
        num = num * ((n - i) % pm) % pm;
        den = den * ((i + 1) % pm) % pm;
    }
    (num * inv_mod(den as u32, p) as u64 % pm) as u32
}

/// Sparse row: strictly increasing column indices with nonzero residues.
pub type SparseRow = Vec<(usize, u32)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<SparseRow>,
}

impl FpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Result<Self, LinAlgError> {
        let p = check_prime(p)?;
        Ok(Self::zeros_unchecked(p, rows, cols))
    }

    /// `p` must already have been validated (e.g. taken from another matrix).
    pub(crate) fn zeros_unchecked(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(p: u64, n: usize) -> Result<Self, LinAlgError> {
        let mut m = Self::zeros(p, n, n)?;
        for i in 0..n {
            m.data[i].push((i, 1));
        }
        Ok(m)
    }

    pub fn from_dense(p: u64, entries: &[Vec<i64>]) -> Result<Self, LinAlgError> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(p, rows, cols)?;
        for (r, row) in entries.iter().enumerate() {
            if row.len() != cols {
                return Err(LinAlgError::Shape("ragged dense input"));
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, residue(v, m.p));
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn row(&self, r: usize) -> &[(usize, u32)] {
        &self.data[r]
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        match self.data[r].binary_search_by_key(&c, |e| e.0) {
            Ok(i) => self.data[r][i].1,
            Err(_) => 0,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        let v = v % self.p;
        let row = &mut self.data[r];
        match row.binary_search_by_key(&c, |e| e.0) {
            Ok(i) if v == 0 => {
                row.remove(i);
            }
            Ok(i) => row[i].1 = v,
            Err(i) if v != 0 => row.insert(i, (c, v)),
            Err(_) => {}
        }
    }

    /// Add `v` to entry `(r, c)`.
    pub fn add_to(&mut self, r: usize, c: usize, v: u32) {
        let cur = self.get(r, c) as u64;
        self.set(r, c, ((cur + v as u64) % self.p as u64) as u32);
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        let mut out = vec![vec![0u32; self.cols]; self.rows];
        for (r, row) in self.data.iter().enumerate() {
            for &(c, v) in row {
                out[r][c] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = Self::zeros_unchecked(self.p, self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for &(c, v) in row {
                t.data[c].push((r, v));
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix, LinAlgError> {
        if self.cols != other.rows || self.p != other.p {
            return Err(LinAlgError::Shape("product of incompatible matrices"));
        }
        let p = self.p as u64;
        let mut out = Self::zeros_unchecked(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        let mut seen = vec![false; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for (r, row) in self.data.iter().enumerate() {
            for &(k, a) in row {
                for &(c, b) in &other.data[k] {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    acc[c] = (acc[c] + a as u64 * b as u64) % p;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != 0 {
                    out.data[r].push((c, acc[c] as u32));
                }
                acc[c] = 0;
                seen[c] = false;
            }
            touched.clear();
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        self.data
            .iter()
            .map(|row| (row.iter().map(|&(c, a)| a as u64 * v[c] as u64 % p).sum::<u64>() % p) as u32)
            .collect()
    }

    pub fn add(&self, other: &FpMatrix) -> Result<FpMatrix, LinAlgError> {
        self.lin_comb(1, other, 1)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: u32, other: &FpMatrix, b: u32) -> Result<FpMatrix, LinAlgError> {
        if self.rows != other.rows || self.cols != other.cols || self.p != other.p {
            return Err(LinAlgError::Shape("sum of incompatible matrices"));
        }
        let p = self.p as u64;
        let mut out = Self::zeros_unchecked(self.p, self.rows, self.cols);
        for r in 0..self.rows {
            let (x, y) = (&self.data[r], &other.data[r]);
            let (mut i, mut j) = (0, 0);
            let row = &mut out.data[r];
            while i < x.len() || j < y.len() {
                let cx = x.get(i).map_or(usize::MAX, |e| e.0);
                let cy = y.get(j).map_or(usize::MAX, |e| e.0);
                let (c, v) = if cx < cy {
                    i += 1;
                    (cx, a as u64 * x[i - 1].1 as u64 % p)
                } else if cy < cx {
                    j += 1;
                    (cy, b as u64 * y[j - 1].1 as u64 % p)
                } else {
                    i += 1;
                    j += 1;
                    (cx, (a as u64 * x[i - 1].1 as u64 + b as u64 * y[j - 1].1 as u64) % p)
                };
                if v != 0 {
                    row.push((c, v as u32));
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: u32) -> FpMatrix {
        let p = self.p as u64;
        let mut out = self.clone();
        for row in &mut out.data {
            row.retain_mut(|e| {
                e.1 = (e.1 as u64 * (s as u64 % p) % p) as u32;
                e.1 != 0
            });
        }
        out
    }

    pub fn pow(&self, e: u32) -> Result<FpMatrix, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::Shape("power of a non-square matrix"));
        }
        let mut acc = FpMatrix::identity(self.p as u64, self.rows)?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&FpMatrix]) -> Result<FpMatrix, LinAlgError> {
        let first = parts.first().ok_or(LinAlgError::Shape("empty stack"))?;
        let mut out = Self::zeros_unchecked(first.p, 0, first.cols);
        for m in parts {
            if m.cols != first.cols || m.p != first.p {
                return Err(LinAlgError::Shape("stacking matrices with different column counts"));
            }
            out.data.extend(m.data.iter().cloned());
            out.rows += m.rows;
        }
        Ok(out)
    }

    /// Matrix with the given columns (each of length `rows`).
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> FpMatrix {
        let mut out = Self::zeros_unchecked(p, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                if v % p != 0 {
                    out.data[r].push((c, v % p));
                }
            }
        }
        out
    }

    /// Build from sorted sparse rows; entries must already be reduced mod `p`.
    pub(crate) fn from_rows(p: u32, cols: usize, data: Vec<SparseRow>) -> FpMatrix {
        debug_assert!(data.iter().all(|r| r.windows(2).all(|w| w[0].0 < w[1].0) && r.iter().all(|e| e.1 != 0 && e.1 < p && e.0 < cols)));
        FpMatrix { p, rows: data.len(), cols, data }
    }

    /// Kronecker product `self (x) other`, indexing pairs as `i * other.dim + j`.
    pub fn kron(&self, other: &FpMatrix) -> Result<FpMatrix, LinAlgError> {
        if self.p != other.p {
            return Err(LinAlgError::Shape("Kronecker product over different fields"));
        }
        let p = self.p as u64;
        let mut out = Self::zeros_unchecked(self.p, self.rows * other.rows, self.cols * other.cols);
        for (r1, row1) in self.data.iter().enumerate() {
            for (r2, row2) in other.data.iter().enumerate() {
                let row = &mut out.data[r1 * other.rows + r2];
                for &(c1, a) in row1 {
                    for &(c2, b) in row2 {
                        row.push((c1 * other.cols + c2, (a as u64 * b as u64 % p) as u32));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Keep only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FpMatrix {
        FpMatrix { p: self.p, rows: rows.len(), cols: self.cols, data: rows.iter().map(|&r| self.data[r].clone()).collect() }
    }

    pub fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.p, self.cols);
        for row in &self.data {
            if e.rank() == self.cols {
                break;
            }
            e.insert(row);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Basis of the right kernel `{v : A v = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        self.echelon().kernel_basis()
    }

    /// Basis of the column space, as a list of columns.
    pub fn column_space(&self) -> Vec<Vec<u32>> {
        self.transpose().echelon().row_basis_dense()
    }

    /// Rank by dense Gaussian elimination; kept as an independent cross-check.
    pub fn dense_rank(&self) -> usize {
        let p = self.p as u64;
        let mut a: Vec<Vec<u64>> =
            self.to_dense().into_iter().map(|r| r.into_iter().map(u64::from).collect()).collect();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(piv) = (rank..self.rows).find(|&r| a[r][c] != 0) else { continue };
            a.swap(rank, piv);
            let inv = inv_mod(a[rank][c] as u32, self.p) as u64;
            for x in a[rank].iter_mut() {
                *x = *x * inv % p;
            }
            for r in 0..self.rows {
                if r != rank && a[r][c] != 0 {
                    let f = a[r][c];
                    let pivot = a[rank].clone();
                    for (x, y) in a[r].iter_mut().zip(pivot) {
                        *x = (*x + (p - f) * y) % p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse of a square matrix by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<FpMatrix, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::Shape("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let p = self.p as u64;
        let mut a: Vec<Vec<u64>> = self
            .to_dense()
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row: Vec<u64> = r.into_iter().map(u64::from).collect();
                row.extend((0..n).map(|j| u64::from(i == j)));
                row
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).find(|&r| a[r][c] != 0).ok_or(LinAlgError::Singular)?;
            a.swap(c, piv);
            let inv = inv_mod(a[c][c] as u32, self.p) as u64;
            for x in a[c].iter_mut() {
                *x = *x * inv % p;
            }
            for r in 0..n {
                if r != c && a[r][c] != 0 {
                    let f = a[r][c];
                    let pivot = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(pivot) {
                        *x = (*x + (p - f) * y) % p;
                    }
                }
            }
        }
        let mut out = Self::zeros_unchecked(self.p, n, n);
        for (r, row) in a.iter().enumerate() {
            for c in 0..n {
                if row[n + c] != 0 {
                    out.data[r].push((c, row[n + c] as u32));
                }
            }
        }
        Ok(out)
    }
}

/// Joint kernel of several maps out of the same space.
pub fn joint_kernel(maps: &[&FpMatrix]) -> Result<Vec<Vec<u32>>, LinAlgError> {
    Ok(FpMatrix::vstack(maps)?.kernel_basis())
}

pub fn joint_kernel_dim(maps: &[&FpMatrix]) -> Result<usize, LinAlgError> {
    let first = maps.first().ok_or(LinAlgError::Shape("empty stack"))?;
    let mut e = Echelon::new(first.p, first.cols);
    for m in maps {
        if m.cols != first.cols || m.p != first.p {
            return Err(LinAlgError::Shape("maps with different sources"));
        }
        for row in &m.data {
            if e.rank() == first.cols {
                return Ok(0);
            }
            e.insert(row);
        }
    }
    Ok(first.cols - e.rank())
}

/// Incremental row echelon form with normalized pivots.
#[derive(Debug, Clone)]
pub struct Echelon {
    p: u32,
    cols: usize,
    pivot_of_col: Vec<Option<usize>>,
    pivots: Vec<(usize, SparseRow)>,
    scratch: Vec<u64>,
}

impl Echelon {
    pub fn new(p: u32, cols: usize) -> Self {
        Echelon { p, cols, pivot_of_col: vec![None; cols], pivots: Vec::new(), scratch: vec![0; cols] }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `row` against the current pivots; if something survives it
    /// becomes a new pivot. Returns whether the rank grew.
    pub fn insert(&mut self, row: &[(usize, u32)]) -> bool {
        let Some(start) = row.first().map(|e| e.0) else { return false };
        let p = self.p as u64;
        for &(c, v) in row {
            self.scratch[c] = v as u64;
        }
        let mut lead = None;
        for c in start..self.cols {
            let f = self.scratch[c];
            if f == 0 {
                continue;
            }
            match self.pivot_of_col[c] {
                Some(pi) => {
                    for &(cc, v) in &self.pivots[pi].1 {
                        self.scratch[cc] = (self.scratch[cc] + (p - f) * v as u64) % p;
                    }
                }
                None => {
                    if lead.is_none() {
                        lead = Some(c);
                    }
                }
            }
        }
        let Some(lead) = lead else { return false };
        let inv = inv_mod(self.scratch[lead] as u32, self.p) as u64;
        let mut out = Vec::new();
        for c in lead..self.cols {
            let v = self.scratch[c];
            if v != 0 {
                out.push((c, (v * inv % p) as u32));
                self.scratch[c] = 0;
            }
        }
        self.pivot_of_col[lead] = Some(self.pivots.len());
        self.pivots.push((lead, out));
        true
    }

    /// Fully reduced pivot rows (reduced row echelon form), sorted by pivot column.
    fn reduced_rows(&self) -> Vec<(usize, Vec<u64>)> {
        let p = self.p as u64;
        let mut order: Vec<usize> = (0..self.pivots.len()).collect();
        order.sort_by_key(|&i| core::cmp::Reverse(self.pivots[i].0));
        let mut done: Vec<Option<Vec<u64>>> = vec![None; self.pivots.len()];
        for &i in &order {
            let (lead, ref row) = self.pivots[i];
            let mut dense = vec![0u64; self.cols];
            for &(c, v) in row {
                dense[c] = v as u64;
            }
            for c in lead + 1..self.cols {
                let f = dense[c];
                if f == 0 {
                    continue;
                }
                if let Some(pj) = self.pivot_of_col[c] {
                    let other = done[pj].as_ref().expect("later pivots reduced first");
                    for cc in c..self.cols {
                        if other[cc] != 0 {
                            dense[cc] = (dense[cc] + (p - f) * other[cc]) % p;
                        }
                    }
                }
            }
            done[i] = Some(dense);
        }
        let mut rows: Vec<(usize, Vec<u64>)> =
            self.pivots.iter().zip(done).map(|((lead, _), d)| (*lead, d.expect("all reduced"))).collect();
        rows.sort_by_key(|r| r.0);
        rows
    }

    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let p = self.p as u64;
        let rows = self.reduced_rows();
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if self.pivot_of_col[f].is_some() {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (lead, row) in &rows {
                if row[f] != 0 {
                    v[*lead] = ((p - row[f]) % p) as u32;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// The reduced pivot rows, as dense vectors (a basis of the row space).
    pub fn row_basis_dense(&self) -> Vec<Vec<u32>> {
        self.reduced_rows().into_iter().map(|(_, r)| r.into_iter().map(|x| x as u32).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rank_example() {
        let m = FpMatrix::from_dense(3, &[vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(m.rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|&x| x == 0));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(FpMatrix::zeros(4, 1, 1), Err(LinAlgError::NotPrime(4)));
        assert!(FpMatrix::zeros(1, 1, 1).is_err());
    }

    #[test]
    fn lucas_binomials() {
        assert_eq!(binom_mod(9, 3, 3), 0);
        assert_eq!(binom_mod(10, 9, 3), 1);
        assert_eq!(binom_mod(5, 2, 7), 3);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = FpMatrix::from_dense(5, &[vec![2, 1, 0], vec![0, 1, 3], vec![1, 0, 2]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), FpMatrix::identity(5, 3).unwrap());
    }

    #[test]
    fn joint_kernel_of_coordinate_projections() {
        let a = FpMatrix::from_dense(7, &[vec![1, 0, 0]]).unwrap();
        let b = FpMatrix::from_dense(7, &[vec![0, 1, 0]]).unwrap();
        assert_eq!(joint_kernel_dim(&[&a, &b]).unwrap(), 1);
        assert_eq!(joint_kernel(&[&a, &b]).unwrap(), vec![vec![0, 0, 1]]);
    }
}
