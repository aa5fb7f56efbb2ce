//! Dense matrices over arbitrary-precision integers and the Smith normal form.
//!
//! Every SNF call is self-verifying: the transforms are recombined exactly
//! and their determinants recomputed, so a wrong decomposition can never
//! escape this module.

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match dimensions");
        IntMatrix { rows, cols, entries: data.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// `1 - self`, defined for square matrices.
    pub fn one_minus(&self) -> Self {
        assert_eq!(self.rows, self.cols, "one_minus needs a square matrix");
        let mut m = Self::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let id = if i == j { BigInt::one() } else { BigInt::zero() };
                m[(i, j)] = id - &self[(i, j)];
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.entries.clone();
        let at = |a: &Vec<BigInt>, i: usize, j: usize| a[i * n + j].clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if at(&a, k, k).is_zero() {
                match (k + 1..n).find(|&i| !at(&a, i, k).is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            a.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = at(&a, i, j) * at(&a, k, k) - at(&a, i, k) * at(&a, k, j);
                    a[i * n + j] = num / &prev;
                }
                a[i * n + k] = BigInt::zero();
            }
            prev = at(&a, k, k);
        }
        sign * at(&a, n - 1, n - 1)
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }
}

/// Result of `smith_normal_form`: `u * m * v = d` with `u`, `v` unimodular
/// and `d` diagonal with a divisibility chain down the diagonal.
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    /// Nonzero diagonal entries, normalized positive; they form the
    /// divisibility chain d1 | d2 | ...
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows.min(self.d.cols);
        (0..n)
            .map(|i| self.d[(i, i)].clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().len()
    }
}

/// Smith normal form by elementary row/column operations over the integers.
///
/// Pivot rule: smallest nonzero absolute value over the remaining block,
/// ties broken row-major. Output is deterministic for fixed input.
pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let steps = m.rows.min(m.cols);

    for t in 0..steps {
        if !reduce_block(&mut d, &mut u, &mut v, t) {
            break;
        }
    }
    // Each pivot divides its whole remaining block before the next step, and
    // elementary operations preserve that divisibility, so the diagonal
    // already forms the chain d1 | d2 | ...
    make_positive(&mut d, &mut u);

    let snf = Snf { d, u, v };
    verify(m, &snf);
    snf
}

/// Clears row and column `t`, leaving the pivot at `(t, t)` dividing the
/// whole remaining block. Returns false when the block is already zero.
fn reduce_block(d: &mut IntMatrix, u: &mut IntMatrix, v: &mut IntMatrix, t: usize) -> bool {
    loop {
        let Some((pi, pj)) = pick_pivot(d, t) else {
            return false;
        };
        if pi != t {
            swap_rows(d, u, t, pi);
        }
        if pj != t {
            swap_cols(d, v, t, pj);
        }

        let mut dirty = false;
        for i in t + 1..d.rows {
            if !d[(i, t)].is_zero() {
                let q = div_nearest(&d[(i, t)], &d[(t, t)]);
                row_axpy(d, u, i, t, &q);
                if !d[(i, t)].is_zero() {
                    dirty = true;
                }
            }
        }
        for j in t + 1..d.cols {
            if !d[(t, j)].is_zero() {
                let q = div_nearest(&d[(t, j)], &d[(t, t)]);
                col_axpy(d, v, j, t, &q);
                if !d[(t, j)].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }

        // Pivot must divide every entry of the remaining block; if not, fold
        // the offending row in and restart with a smaller pivot.
        let mut offender = None;
        'scan: for i in t + 1..d.rows {
            for j in t + 1..d.cols {
                if !(&d[(i, j)] % &d[(t, t)]).is_zero() {
                    offender = Some(i);
                    break 'scan;
                }
            }
        }
        match offender {
            Some(i) => {
                let one = BigInt::one();
                row_axpy(d, u, t, i, &-one);
            }
            None => return true,
        }
    }
}

/// Smallest nonzero |entry| in the block at (t.., t..), row-major ties.
fn pick_pivot(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows {
        for j in t..d.cols {
            if d[(i, j)].is_zero() {
                continue;
            }
            match best {
                None => best = Some((i, j)),
                Some(b) => {
                    if d[(i, j)].abs() < d[b].abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

/// Rounded division so remainders shrink to at most half the pivot.
fn div_nearest(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.sign() == b.sign()) || r.is_zero() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

fn swap_rows(d: &mut IntMatrix, u: &mut IntMatrix, a: usize, b: usize) {
    for j in 0..d.cols {
        let tmp = d[(a, j)].clone();
        d[(a, j)] = d[(b, j)].clone();
        d[(b, j)] = tmp;
    }
    for j in 0..u.cols {
        let tmp = u[(a, j)].clone();
        u[(a, j)] = u[(b, j)].clone();
        u[(b, j)] = tmp;
    }
}

fn swap_cols(d: &mut IntMatrix, v: &mut IntMatrix, a: usize, b: usize) {
    for i in 0..d.rows {
        let tmp = d[(i, a)].clone();
        d[(i, a)] = d[(i, b)].clone();
        d[(i, b)] = tmp;
    }
    for i in 0..v.rows {
        let tmp = v[(i, a)].clone();
        v[(i, a)] = v[(i, b)].clone();
        v[(i, b)] = tmp;
    }
}

/// row(i) -= q * row(t), mirrored on u.
fn row_axpy(d: &mut IntMatrix, u: &mut IntMatrix, i: usize, t: usize, q: &BigInt) {
    for j in 0..d.cols {
        let sub = q * &d[(t, j)];
        d[(i, j)] -= sub;
    }
    for j in 0..u.cols {
        let sub = q * &u[(t, j)];
        u[(i, j)] -= sub;
    }
}

/// col(j) -= q * col(t), mirrored on v.
fn col_axpy(d: &mut IntMatrix, v: &mut IntMatrix, j: usize, t: usize, q: &BigInt) {
    for i in 0..d.rows {
        let sub = q * &d[(i, t)];
        d[(i, j)] -= sub;
    }
    for i in 0..v.rows {
        let sub = q * &v[(i, t)];
        v[(i, j)] -= sub;
    }
}

/// Flip negative diagonal entries (units fold into u).
fn make_positive(d: &mut IntMatrix, u: &mut IntMatrix) {
    let n = d.rows.min(d.cols);
    for i in 0..n {
        if d[(i, i)].is_negative() {
            for j in 0..d.cols {
                let neg = -d[(i, j)].clone();
                d[(i, j)] = neg;
            }
            for j in 0..u.cols {
                let neg = -u[(i, j)].clone();
                u[(i, j)] = neg;
            }
        }
    }
}

fn verify(m: &IntMatrix, snf: &Snf) {
    let umv = snf.u.mul(m).mul(&snf.v);
    assert_eq!(umv, snf.d, "SNF verification failed: u*m*v != d");
    assert!(snf.u.det().abs().is_one(), "SNF verification failed: u not unimodular");
    assert!(snf.v.det().abs().is_one(), "SNF verification failed: v not unimodular");
    let n = snf.d.rows.min(snf.d.cols);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                assert!(snf.d[(i, j)].is_zero(), "SNF verification failed: d not diagonal");
            }
        }
    }
    let diag = snf.diagonal();
    for w in diag.windows(2) {
        assert!((&w[1] % &w[0]).is_zero(), "SNF verification failed: no divisibility chain");
    }
    for i in diag.len()..n {
        assert!(snf.d[(i, i)].is_zero(), "SNF verification failed: zero entries must trail");
    }
}
