//! Dense linear algebra over small prime fields and canonical enumeration of
//! subspaces of `F_q^m`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{PicodError, Result};

pub const SUPPORTED_FIELDS: [u8; 3] = [2, 3, 5];

/// The prime field `F_q`, `q` in [`SUPPORTED_FIELDS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u8,
}

impl PrimeField {
    pub const GF2: PrimeField = PrimeField { q: 2 };

    pub fn new(q: u64) -> Result<Self> {
        if SUPPORTED_FIELDS.iter().any(|&p| p as u64 == q) {
            Ok(PrimeField { q: q as u8 })
        } else {
            Err(PicodError::UnsupportedField(q))
        }
    }

    pub fn q(self) -> u8 {
        self.q
    }

    pub fn elem(self, value: u64) -> FieldElem {
        FieldElem {
            value: (value % self.q as u64) as u8,
            field: self,
        }
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.q as u16) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        (self.q - a) % self.q
    }

    /// Multiplicative inverse; `a` must be non-zero.
    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(!a.is_multiple_of(self.q), "inverse of zero");
        (1..self.q)
            .find(|&b| self.mul(a, b) == 1)
            .expect("prime field element has an inverse")
    }
}

/// A reduced element of a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u8,
    field: PrimeField,
}

impl FieldElem {
    pub fn value(self) -> u8 {
        self.value
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inverse(self) -> Option<FieldElem> {
        (!self.is_zero()).then(|| FieldElem {
            value: self.field.inv(self.value),
            field: self.field,
        })
    }
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        assert_eq!(self.field, rhs.field, "mixed fields");
        FieldElem {
            value: self.field.add(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: FieldElem) -> FieldElem {
        assert_eq!(self.field, rhs.field, "mixed fields");
        FieldElem {
            value: self.field.sub(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        assert_eq!(self.field, rhs.field, "mixed fields");
        FieldElem {
            value: self.field.mul(self.value, rhs.value),
            field: self.field,
        }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem {
            value: self.field.neg(self.value),
            field: self.field,
        }
    }
}

/// Row-major dense matrix over a prime field. A matrix may have zero rows
/// (the empty scheme) but always has at least one column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows of integers, reducing each entry mod `q`.
    pub fn from_rows(field: PrimeField, cols: usize, rows: &[Vec<u64>]) -> Result<Self> {
        if cols == 0 {
            return Err(PicodError::InvalidArgument(
                "matrix needs at least one column".into(),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(PicodError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r.iter().map(|&v| (v % field.q as u64) as u8));
        }
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub(crate) fn from_raw(field: PrimeField, rows: usize, cols: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.field.elem(self.data[r * self.cols + c] as u64)
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn entries(&self) -> &[u8] {
        &self.data
    }

    pub fn push_row(&mut self, row: &[u8]) -> Result<()> {
        if row.len() != self.cols {
            return Err(PicodError::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        self.data.extend(row.iter().map(|&v| v % self.field.q));
        self.rows += 1;
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// Sub-matrix keeping only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Reduced row-echelon form (zero rows dropped) and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = self.field;
        let cols = self.cols;
        let mut a = self.data.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| a[i * cols + c] != 0) else {
                continue;
            };
            if p != r {
                for k in 0..cols {
                    a.swap(p * cols + k, r * cols + k);
                }
            }
            let inv = f.inv(a[r * cols + c]);
            for k in 0..cols {
                a[r * cols + k] = f.mul(a[r * cols + k], inv);
            }
            for i in 0..self.rows {
                let factor = a[i * cols + c];
                if i != r && factor != 0 {
                    for k in 0..cols {
                        let sub = f.mul(factor, a[r * cols + k]);
                        a[i * cols + k] = f.sub(a[i * cols + k], sub);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        a.truncate(r * cols);
        (Matrix::from_raw(f, r, cols, a), pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Whether `v` is an `F_q`-combination of the rows.
    pub fn in_rowspace(&self, v: &[u8]) -> Result<bool> {
        if v.len() != self.cols {
            return Err(PicodError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut extended = self.clone();
        extended.push_row(v)?;
        Ok(extended.rank() == self.rank())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.row_iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Number of `l`-dimensional subspaces of `F_q^m` (Gaussian binomial).
pub fn gaussian_binomial(m: usize, l: usize, q: u64) -> u128 {
    if l > m {
        return 0;
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..l {
        num = num.saturating_mul(q.saturating_pow((m - i) as u32).saturating_sub(1));
        den = den.saturating_mul(q.saturating_pow((i + 1) as u32) - 1);
    }
    if num == u128::MAX {
        return u128::MAX;
    }
    num / den
}

/// All `l`-subsets of `0..m` in lexicographic order.
pub fn combinations(m: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if l > m {
        return out;
    }
    let mut c: Vec<usize> = (0..l).collect();
    loop {
        out.push(c.clone());
        if !next_combination(&mut c, m) {
            return out;
        }
    }
}

fn next_combination(c: &mut [usize], m: usize) -> bool {
    let l = c.len();
    for i in (0..l).rev() {
        if c[i] < m - l + i {
            c[i] += 1;
            for k in i + 1..l {
                c[k] = c[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Stream of RREF bases, one per `l`-dimensional subspace of `F_q^m`.
///
/// Ordered by pivot pattern (lexicographic), then by the free entries read
/// as a base-`q` counter. Restartable: [`SubspaceIter::with_pivots`] yields
/// only the subspaces of one pivot pattern, so the stream can be split across
/// workers.
#[derive(Debug, Clone)]
pub struct SubspaceIter {
    field: PrimeField,
    m: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    counter: Vec<u8>,
    single_pattern: bool,
    done: bool,
}

impl SubspaceIter {
    fn start(field: PrimeField, m: usize, pivots: Vec<usize>, single_pattern: bool) -> Self {
        let free = free_positions(m, &pivots);
        let counter = vec![0; free.len()];
        SubspaceIter {
            field,
            m,
            pivots,
            free,
            counter,
            single_pattern,
            done: false,
        }
    }

    /// Subspaces whose RREF basis has exactly these (ascending) pivot columns.
    pub fn with_pivots(field: PrimeField, m: usize, pivots: Vec<usize>) -> Self {
        Self::start(field, m, pivots, true)
    }

    fn current(&self) -> Matrix {
        let l = self.pivots.len();
        let mut data = vec![0u8; l * self.m];
        for (r, &p) in self.pivots.iter().enumerate() {
            data[r * self.m + p] = 1;
        }
        for (&(r, c), &v) in self.free.iter().zip(&self.counter) {
            data[r * self.m + c] = v;
        }
        Matrix::from_raw(self.field, l, self.m, data)
    }

    fn advance(&mut self) {
        for d in self.counter.iter_mut() {
            *d += 1;
            if *d < self.field.q {
                return;
            }
            *d = 0;
        }
        if self.single_pattern || !next_combination(&mut self.pivots, self.m) {
            self.done = true;
            return;
        }
        self.free = free_positions(self.m, &self.pivots);
        self.counter = vec![0; self.free.len()];
    }
}

fn free_positions(m: usize, pivots: &[usize]) -> Vec<(usize, usize)> {
    let mut free = Vec::new();
    for (r, &p) in pivots.iter().enumerate() {
        for c in p + 1..m {
            if !pivots.contains(&c) {
                free.push((r, c));
            }
        }
    }
    free
}

impl Iterator for SubspaceIter {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        if self.done {
            return None;
        }
        let out = self.current();
        self.advance();
        Some(out)
    }
}

/// Canonical stream of all `l`-dimensional subspaces of `F_q^m`, guarded by
/// `max_count` on the Gaussian binomial.
pub fn enumerate_subspaces(
    m: usize,
    l: usize,
    field: PrimeField,
    max_count: u128,
) -> Result<SubspaceIter> {
    if l == 0 || l > m {
        return Err(PicodError::InvalidArgument(format!(
            "subspace dimension {l} must lie in 1..={m}"
        )));
    }
    let count = gaussian_binomial(m, l, field.q as u64);
    crate::budget::Budget::check("subspace enumeration", count, max_count)?;
    Ok(SubspaceIter::start(field, m, (0..l).collect(), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn field_arithmetic() {
        let f = gf(5);
        let a = f.elem(3);
        let b = f.elem(4);
        assert_eq!((a + b).value(), 2);
        assert_eq!((a * b).value(), 2);
        assert_eq!((a - b).value(), 4);
        assert_eq!((-a).value(), 2);
        assert_eq!((a * a.inverse().unwrap()).value(), 1);
        assert!(f.elem(10).inverse().is_none());
        assert!(PrimeField::new(4).is_err());
        assert!(PrimeField::new(7).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::identity(gf(2), 3).rank(), 3);
        let m = Matrix::from_rows(
            gf(2),
            4,
            &[vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 1, 1, 1]],
        )
        .unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(Matrix::zeros(gf(3), 3, 4).rank(), 0);
        // over F_3, (1,1) + (1,1) = (2,2) differs from (1,2)
        let m3 = Matrix::from_rows(gf(3), 2, &[vec![1, 1], vec![1, 2]]).unwrap();
        assert_eq!(m3.rank(), 2);
    }

    #[test]
    fn rowspace_membership() {
        let id = Matrix::identity(gf(2), 3);
        assert!(id.in_rowspace(&[1, 0, 1]).unwrap());
        let m = Matrix::from_rows(gf(2), 3, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert!(m.in_rowspace(&[1, 0, 1]).unwrap());
        let m = Matrix::from_rows(gf(2), 3, &[vec![1, 1, 0]]).unwrap();
        assert!(!m.in_rowspace(&[1, 0, 0]).unwrap());
        assert!(matches!(
            m.in_rowspace(&[1, 0]),
            Err(PicodError::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn rref_is_canonical() {
        let m = Matrix::from_rows(gf(3), 3, &[vec![2, 1, 0], vec![1, 1, 1]]).unwrap();
        let (r, piv) = m.rref();
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(r.row(0), &[1, 0, 2]);
        assert_eq!(r.row(1), &[0, 1, 2]);
    }

    #[test]
    fn subspace_counts() {
        assert_eq!(
            enumerate_subspaces(2, 1, gf(2), u128::MAX).unwrap().count(),
            3
        );
        assert_eq!(
            enumerate_subspaces(3, 3, gf(2), u128::MAX).unwrap().count(),
            1
        );
        // (3^3 - 1) / (3 - 1) lines in F_3^3
        assert_eq!(
            enumerate_subspaces(3, 1, gf(3), u128::MAX).unwrap().count(),
            13
        );
        assert_eq!(gaussian_binomial(3, 1, 3), 13);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(4, 2, 3), 130);
    }

    #[test]
    fn subspace_budget_and_bad_dims() {
        assert!(matches!(
            enumerate_subspaces(8, 4, gf(2), 1000),
            Err(PicodError::BudgetExceeded { .. })
        ));
        assert!(enumerate_subspaces(3, 0, gf(2), u128::MAX).is_err());
        assert!(enumerate_subspaces(3, 4, gf(2), u128::MAX).is_err());
    }

    /// Brute force: every `l`-row matrix over F_q^m of full rank, grouped by
    /// the set of vectors in its row space.
    fn brute_force_subspaces(m: usize, l: usize, f: PrimeField) -> HashSet<Vec<Vec<u8>>> {
        let q = f.q() as u64;
        let total = q.pow((l * m) as u32);
        let mut spaces = HashSet::new();
        for code in 0..total {
            let mut c = code;
            let rows: Vec<Vec<u64>> = (0..l)
                .map(|_| {
                    (0..m)
                        .map(|_| {
                            let v = c % q;
                            c /= q;
                            v
                        })
                        .collect()
                })
                .collect();
            let mat = Matrix::from_rows(f, m, &rows).unwrap();
            if mat.rank() != l {
                continue;
            }
            spaces.insert(span(&mat));
        }
        spaces
    }

    fn span(mat: &Matrix) -> Vec<Vec<u8>> {
        let f = mat.field();
        let q = f.q() as u64;
        let l = mat.rows();
        let mut vecs = HashSet::new();
        for code in 0..q.pow(l as u32) {
            let mut c = code;
            let mut v = vec![0u8; mat.cols()];
            for r in 0..l {
                let coef = (c % q) as u8;
                c /= q;
                for (k, x) in v.iter_mut().enumerate() {
                    *x = f.add(*x, f.mul(coef, mat.row(r)[k]));
                }
            }
            vecs.insert(v);
        }
        let mut out: Vec<_> = vecs.into_iter().collect();
        out.sort();
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for q in [2, 3] {
            let f = gf(q);
            for m in 1..=3 {
                for l in 1..=m {
                    let canonical: Vec<Matrix> =
                        enumerate_subspaces(m, l, f, u128::MAX).unwrap().collect();
                    let spans: HashSet<_> = canonical.iter().map(span).collect();
                    assert_eq!(spans.len(), canonical.len(), "duplicate row spaces");
                    assert_eq!(spans, brute_force_subspaces(m, l, f), "q={q} m={m} l={l}");
                    assert_eq!(canonical.len() as u128, gaussian_binomial(m, l, q));
                    for b in &canonical {
                        let (r, _) = b.rref();
                        assert_eq!(&r, b, "yielded basis is not in RREF");
                    }
                }
            }
        }
    }

    #[test]
    fn enumerated_spaces_pairwise_distinct_by_membership() {
        let f = gf(2);
        let all: Vec<Matrix> = enumerate_subspaces(3, 2, f, u128::MAX).unwrap().collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                let b_in_a = b.row_iter().all(|row| a.in_rowspace(row).unwrap());
                assert!(!b_in_a);
            }
        }
    }

    #[test]
    fn pivot_partition_covers_stream() {
        let f = gf(3);
        let whole = enumerate_subspaces(4, 2, f, u128::MAX).unwrap().count();
        let split: usize = combinations(4, 2)
            .into_iter()
            .map(|p| SubspaceIter::with_pivots(f, 4, p).count())
            .sum();
        assert_eq!(whole, split);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rank_equals_transpose_rank(
                q in prop::sample::select(vec![2u64, 3, 5]),
                rows in 1usize..5,
                cols in 1usize..5,
                seed in prop::collection::vec(0u64..5, 25),
            ) {
                let f = PrimeField::new(q).unwrap();
                let data: Vec<Vec<u64>> = (0..rows)
                    .map(|r| (0..cols).map(|c| seed[r * 5 + c]).collect())
                    .collect();
                let m = Matrix::from_rows(f, cols, &data).unwrap();
                prop_assert_eq!(m.rank(), m.transpose().rank());
                prop_assert!(m.rank() <= rows.min(cols));
            }
        }
    }
}
