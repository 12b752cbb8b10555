//! Sparse row matrices and banded LU factorisation with partial pivoting.
//!
//! The implicit Crank–Nicolson matrices of the solvers are banded once the
//! two components are interleaved node by node. [`BandedLu`] stores the band
//! with `kl` extra super-diagonals for pivoting fill-in (LAPACK `gbtrf`
//! layout, row oriented) and solves both `A x = b` and `Aᵀ x = b`; the latter
//! is what makes the exact discrete transpose of the solver cheap.

use crate::{GgError, Real, Result};

/// Square matrix stored as a list of `(column, value)` entries per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseRows<T> {
    /// `n × n` zero matrix.
    pub fn zeros(n: usize) -> Self {
        Self { rows: vec![Vec::new(); n] }
    }

    /// `n × n` identity.
    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| vec![(i, T::one())]).collect() }
    }

    /// Dimension.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Adds `value` to entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        if let Some(e) = self.rows[i].iter_mut().find(|e| e.0 == j) {
            e.1 += value;
        } else {
            self.rows[i].push((j, value));
        }
    }

    /// Replaces row `i` by the given entries.
    pub fn set_row(&mut self, i: usize, entries: Vec<(usize, T)>) {
        self.rows[i].clear();
        for (j, v) in entries {
            self.add(i, j, v);
        }
    }

    /// Entries of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    /// `α·self + β·other` (same dimension).
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Self {
        let mut out = Self::zeros(self.n());
        for i in 0..self.n() {
            for &(j, v) in &self.rows[i] {
                out.add(i, j, alpha * v);
            }
            for &(j, v) in &other.rows[i] {
                out.add(i, j, beta * v);
            }
        }
        out
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[T]) -> Vec<T> {
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// `y = Aᵀ x`.
    pub fn mul_transpose(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// Lower and upper bandwidths `(kl, ku)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, _) in r {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    /// Dense copy (row major), for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut d = vec![vec![T::zero(); n]; n];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                d[i][j] += v;
            }
        }
        d
    }
}

/// LU factors of a banded matrix with row pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // valid for i - kl <= j <= i + ku + kl
        i * self.width + (j + self.kl - i)
    }

    /// Factorises `a`; fails with [`GgError::SingularSystem`] on a zero pivot.
    pub fn factor(a: &SparseRows<T>) -> Result<Self> {
        let n = a.n();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![T::zero(); n * width], piv: vec![0; n] };
        let mut scale = T::zero();
        for i in 0..n {
            for &(j, v) in a.row(i) {
                let k = lu.idx(i, j);
                lu.data[k] += v;
                scale = scale.max(v.abs());
            }
        }
        let tiny = scale * T::epsilon() * T::of(n);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = lu.data[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(GgError::SingularSystem { column: k });
            }
            lu.piv[k] = p;
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (lu.idx(k, j), lu.idx(p, j));
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            for i in k + 1..=last {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l != T::zero() {
                    for j in k + 1..=jmax {
                        let kj = lu.data[lu.idx(k, j)];
                        let ij = lu.idx(i, j);
                        lu.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(lu)
    }

    /// Dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != T::zero() {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.data[self.idx(i, k)] * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + self.ku + self.kl).min(n - 1) {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }

    /// Solves `Aᵀ x = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for j in 0..n {
            let mut s = b[j];
            for i in j.saturating_sub(self.ku + self.kl)..j {
                s -= self.data[self.idx(i, j)] * b[i];
            }
            b[j] = s / self.data[self.idx(j, j)];
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                s -= self.data[self.idx(i, k)] * b[i];
            }
            b[k] = s;
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }

    /// Returns `A⁻¹ b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Returns `A⁻ᵀ b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_transpose_in_place(&mut x);
        x
    }
}
