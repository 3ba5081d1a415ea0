use nalgebra::linalg::SymmetricEigen;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::trace_out_spin;
use crate::operator::{hermitize, CMatrix, Operator, Space, C64};

/// Acceptance thresholds applied when a density matrix is constructed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTolerance {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self { hermiticity: 1e-9, trace: 1e-9, positivity: 1e-8 }
    }
}

/// Hermitian, unit-trace, positive operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
    tolerance: StateTolerance,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, StateTolerance::default())
    }

    pub fn with_tolerance(op: Operator, tolerance: StateTolerance) -> Result<Self> {
        let rho = Self { op, tolerance };
        rho.check()?;
        Ok(rho)
    }

    /// Wraps an operator produced by a trusted evolution path.
    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self { op, tolerance: StateTolerance::default() }
    }

    pub(crate) fn from_matrix_unchecked(space: Space, m: CMatrix) -> Self {
        Self::from_operator_unchecked(Operator::from_parts(space, m))
    }

    /// Re-runs the construction checks against the stored tolerances.
    pub fn check(&self) -> Result<()> {
        let deviation = self.op.hermiticity_deviation();
        if deviation > self.tolerance.hermiticity {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = self.op.trace().re;
        if (trace - 1.0).abs() > self.tolerance.trace {
            return Err(Error::TraceNotUnit { trace });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -self.tolerance.positivity {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(())
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn space(&self) -> Space {
        self.op.space()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn tolerance(&self) -> StateTolerance {
        self.tolerance
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    /// Tr(ρ O).
    pub fn expect(&self, observable: &Operator) -> Result<C64> {
        self.op.same_space(observable)?;
        Ok(trace_of_product(self.matrix(), observable.matrix()))
    }

    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        let mut m = self.matrix().clone();
        hermitize(&mut m);
        SymmetricEigen::new(m).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Diagonal of ρ (Fock populations for phonon states).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix()[(i, i)].re).collect()
    }

    /// Phonon population in the two highest retained Fock levels.
    pub fn top_level_population(&self) -> f64 {
        let marginal = match self.space() {
            Space::SpinPhonon(n) => trace_out_spin(self.matrix(), n),
            _ => self.matrix().clone(),
        };
        let d = marginal.nrows();
        (d.saturating_sub(2)..d).map(|i| marginal[(i, i)].re).sum()
    }

    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        if self.space().fock_levels().is_none() {
            return Ok(());
        }
        let population = self.top_level_population();
        if population > tolerance {
            return Err(Error::TruncationTail { population, tolerance });
        }
        Ok(())
    }

    /// Reduced phonon state of a joint spin ⊗ phonon state.
    pub fn phonon_marginal(&self) -> Result<DensityMatrix> {
        match self.space() {
            Space::SpinPhonon(n) => Ok(Self::from_matrix_unchecked(Space::Phonon(n), trace_out_spin(self.matrix(), n))),
            other => Err(Error::WrongSpace { expected: "spin_phonon(N)".into(), found: other.to_string() }),
        }
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.op.same_space(other.op())?;
        let mut diff = self.matrix() - other.matrix();
        hermitize(&mut diff);
        let eig = SymmetricEigen::new(diff).eigenvalues;
        Ok(0.5 * eig.iter().map(|x| x.abs()).sum::<f64>())
    }
}

pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    // Tr(AB) = Σ_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}
