//! Banded complex matrices with an LU factorization (partial pivoting).
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` holds rows
//! `j − (kl + ku) ..= j + kl`, leaving room for the fill-in that row
//! interchanges introduce above the diagonal.

use crate::error::{Error, Result};
use crate::operator::{C64, ZERO};

#[derive(Clone, Debug)]
pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, data: vec![ZERO; ldab * n] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && i <= j + self.kl
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(self.in_band(i, j), "entry ({i},{j}) outside band kl={} ku={}", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            ZERO
        }
    }

    /// `A − shift·I`.
    pub fn shift_diagonal(&mut self, shift: C64) {
        for j in 0..self.n {
            let k = self.idx(j, j);
            self.data[k] -= shift;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.n];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.data[self.idx(i, j)] * xj;
            }
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0_f64; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, row) in rows.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *row += self.data[self.idx(i, j)].norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        let mut ipiv = vec![0usize; n];
        // Last column touched by U so far.
        let mut ju = 0usize;

        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut p = 0usize;
            let mut best = self.data[col].norm();
            for r in 1..=km {
                let v = self.data[col + r].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            ipiv[j] = j + p;
            if best == 0.0 {
                return Err(Error::SingularMatrix(j));
            }
            ju = ju.max((j + self.ku + p).min(n - 1));

            if p != 0 {
                for c in j..=ju {
                    let a = c * ldab + kv + j - c;
                    self.data.swap(a, a + p);
                }
            }

            let pivot = self.data[col];
            let inv = C64::new(1.0, 0.0) / pivot;
            for r in 1..=km {
                self.data[col + r] *= inv;
            }
            if km == 0 {
                continue;
            }
            let (head, tail) = self.data.split_at_mut((j + 1) * ldab);
            let mult = &head[col + 1..col + 1 + km];
            for c in (j + 1)..=ju {
                let base = (c - j - 1) * ldab + kv + j - c;
                let ajc = tail[base];
                if ajc == ZERO {
                    continue;
                }
                let dst = &mut tail[base + 1..base + 1 + km];
                for (d, m) in dst.iter_mut().zip(mult) {
                    *d -= m * ajc;
                }
            }
        }
        Ok(BandLu { band: self, ipiv })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BandLu {
    band: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let a = &self.band;
        let n = a.n;
        let kv = a.kl + a.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = a.kl.min(n - 1 - j);
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let col = j * a.ldab + kv;
            for r in 1..=km {
                b[j + r] -= a.data[col + r] * bj;
            }
        }
        for j in (0..n).rev() {
            let col = j * a.ldab + kv;
            b[j] /= a.data[col];
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= a.data[col + i - j] * bj;
            }
        }
    }
}
