//! Complex banded LU with partial pivoting.
//!
//! Storage keeps, for each row `i`, the window of columns
//! `i - kl ..= i + ku + kl`; the extra `kl` columns hold the fill-in created
//! by row interchanges. The factorization follows the LAPACK `gbtrf` layout:
//! the multipliers of step `k` are stored in column `k` and the interchanges
//! are replayed in order during the forward solve.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::ZERO; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Entry inside the original band; zero elsewhere.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.kl < i || j > i + self.ku {
            C64::ZERO
        } else {
            self.data[self.offset(i, j)]
        }
    }

    /// Panics if `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let mut y = vec![C64::ZERO; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.data[self.offset(i, j)] * x[j]).sum();
        }
        Ok(y)
    }

    pub fn factor(mut self) -> Result<BandedLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.offset(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.offset(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem { column: k });
            }
            pivots.push(p);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.offset(k, j), self.offset(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.offset(k, k)];
            for i in k + 1..=last_row {
                let o = self.offset(i, k);
                let l = self.data[o] / pivot;
                self.data[o] = l;
                if l == C64::ZERO {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = self.data[self.offset(k, j)];
                    let o = self.offset(i, j);
                    self.data[o] -= l * u;
                }
            }
        }
        Ok(BandedLu { lu: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) -> Result<()> {
        let m = &self.lu;
        let n = m.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            for i in k + 1..=(k + m.kl).min(n - 1) {
                b[i] -= m.data[m.offset(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + m.ku + m.kl).min(n - 1) {
                s -= m.data[m.offset(i, j)] * b[j];
            }
            b[i] = s / m.data[m.offset(i, i)];
        }
        Ok(())
    }
}
