//! Coordinate-list operators for the structured products in the master
//! equation kernels. Ladder-operator polynomials have O(N) nonzeros, so
//! sparse × dense products cost O(N²) instead of O(N³).

use crate::operator::{CMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::new();
        for j in 0..dim {
            for i in 0..dim {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self { dim, entries }
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// `out += scale · S · x`.
    pub fn mul_left_acc(&self, scale: C64, x: &CMatrix, out: &mut CMatrix) {
        let ncols = x.ncols();
        for &(i, k, v) in &self.entries {
            let s = scale * v;
            for j in 0..ncols {
                out[(i, j)] += s * x[(k, j)];
            }
        }
    }

    /// `out += scale · x · S†`.
    pub fn mul_right_adjoint_acc(&self, scale: C64, x: &CMatrix, out: &mut CMatrix) {
        // (x S†)_{ij} = Σ_l x_{il} conj(S_{jl})
        let nrows = x.nrows();
        for &(j, l, v) in &self.entries {
            let s = scale * v.conj();
            let src = x.column(l);
            let mut dst = out.column_mut(j);
            for i in 0..nrows {
                dst[i] += s * src[i];
            }
        }
    }

    /// `S · x`.
    #[cfg(test)]
    pub fn mul_left(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, x.ncols());
        self.mul_left_acc(C64::new(1.0, 0.0), x, &mut out);
        out
    }

    #[cfg(test)]
    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}
