//! Dense operators tagged with the Hilbert space they act on.
//!
//! Joint spaces are ordered spin ⊗ phonon with spin basis (↓, ↑), so the
//! basis index of |s, n⟩ is `s * N + n` with `s = 0` for ↓.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Truncated Fock space with `N` levels.
    Phonon(usize),
    /// Spin-1/2 ⊗ truncated Fock space with `N` phonon levels.
    SpinPhonon(usize),
    /// Bare two-level system.
    Spin,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Phonon(n) => n,
            Space::SpinPhonon(n) => 2 * n,
            Space::Spin => 2,
        }
    }

    /// Number of retained Fock levels, if the space has a phonon factor.
    pub fn fock_levels(self) -> Option<usize> {
        match self {
            Space::Phonon(n) | Space::SpinPhonon(n) => Some(n),
            Space::Spin => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Phonon(n) => write!(f, "phonon({n})"),
            Space::SpinPhonon(n) => write!(f, "spin_phonon({n})"),
            Space::Spin => write!(f, "spin"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: Space,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: Space, matrix: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.ncols() });
        }
        Ok(Self { space, matrix })
    }

    /// Caller guarantees the shape matches `space`.
    pub(crate) fn from_parts(space: Space, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.shape(), (space.dim(), space.dim()));
        Self { space, matrix }
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self { space, matrix: CMatrix::zeros(d, d) }
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self { space, matrix: CMatrix::identity(d, d) }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { space: self.space, matrix: &self.matrix * factor }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(Self { space: self.space, matrix: &self.matrix * &rhs.matrix })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(Self { space: self.space, matrix: &self.matrix + &rhs.matrix })
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(Self { space: self.space, matrix: &self.matrix - &rhs.matrix })
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub(crate) fn same_space(&self, rhs: &Operator) -> Result<()> {
        if self.space != rhs.space {
            return Err(Error::WrongSpace { expected: self.space.to_string(), found: rhs.space.to_string() });
        }
        Ok(())
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Projects onto the Hermitian part in place: `m ← (m + m†)/2`.
pub(crate) fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}
