//! Master-equation generators and the fixed-step RK4 propagator shared by
//! the exact and pulse-level engines.

use crate::operator::{CMatrix, C64, I, ZERO};
use crate::sparse::SparseOp;

/// Right-hand side of `dρ/dt = G(t) ρ`.
pub(crate) trait Generator {
    fn dim(&self) -> usize;
    /// Writes `G(t) ρ` into `out` (overwriting it).
    fn apply(&self, t: f64, rho: &CMatrix, out: &mut CMatrix);
}

/// `c(t) A + c(t)* A†` with `c(t) = amplitude · e^{−i frequency t}`.
#[derive(Clone, Debug)]
pub(crate) struct DriveTerm {
    pub op: SparseOp,
    pub op_dag: SparseOp,
    pub amplitude: C64,
    pub frequency: f64,
}

impl DriveTerm {
    pub fn new(op: &CMatrix, amplitude: C64, frequency: f64) -> Self {
        Self { op: SparseOp::from_dense(op), op_dag: SparseOp::from_dense(&op.adjoint()), amplitude, frequency }
    }

    pub fn coefficient(&self, t: f64) -> C64 {
        if self.frequency == 0.0 {
            self.amplitude
        } else {
            self.amplitude * C64::from_polar(1.0, -self.frequency * t)
        }
    }
}

/// Lindblad generator with a static part, harmonic drive terms and
/// time-independent jump operators:
/// `−i[H₀ + Σ H_k(t), ρ] + Σ γ_j D[O_j]ρ`.
#[derive(Clone, Debug)]
pub(crate) struct MasterEquation {
    dim: usize,
    /// `H₀ − (i/2) Σ γ_j O_j† O_j`
    h_eff: SparseOp,
    drives: Vec<DriveTerm>,
    jumps: Vec<(f64, SparseOp)>,
}

impl MasterEquation {
    pub fn new(hamiltonian: &CMatrix, jumps: &[(f64, CMatrix)], drives: Vec<DriveTerm>) -> Self {
        let dim = hamiltonian.nrows();
        let mut h_eff = hamiltonian.clone();
        let mut kept = Vec::new();
        for (rate, op) in jumps {
            if *rate == 0.0 {
                continue;
            }
            let odo = op.adjoint() * op;
            h_eff -= odo * C64::new(0.0, 0.5 * rate);
            kept.push((*rate, SparseOp::from_dense(op)));
        }
        Self { dim, h_eff: SparseOp::from_dense(&h_eff), drives, jumps: kept }
    }

    pub fn h_eff(&self) -> &SparseOp {
        &self.h_eff
    }

    pub fn jumps(&self) -> &[(f64, SparseOp)] {
        &self.jumps
    }

    /// Adds `G(t)ρ` to `out`.
    pub fn apply_acc(&self, t: f64, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        self.h_eff.mul_left_acc(-I, rho, out);
        self.h_eff.mul_right_adjoint_acc(I, rho, out);
        for d in &self.drives {
            let c = d.coefficient(t);
            d.op.mul_left_acc(-I * c, rho, out);
            d.op_dag.mul_left_acc(-I * c.conj(), rho, out);
            // i ρ (cA + c*A†) = i c ρ (A†)† + i c* ρ A†
            d.op_dag.mul_right_adjoint_acc(I * c, rho, out);
            d.op.mul_right_adjoint_acc(I * c.conj(), rho, out);
        }
        for (rate, op) in &self.jumps {
            scratch.fill(ZERO);
            op.mul_left_acc(C64::new(1.0, 0.0), rho, scratch);
            op.mul_right_adjoint_acc(C64::new(*rate, 0.0), scratch, out);
        }
    }
}

impl Generator for MasterEquation {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, rho: &CMatrix, out: &mut CMatrix) {
        out.fill(ZERO);
        let mut scratch = CMatrix::zeros(self.dim, self.dim);
        self.apply_acc(t, rho, out, &mut scratch);
    }
}

/// Classic fourth-order Runge–Kutta with reusable stage buffers.
pub(crate) struct Rk4 {
    k1: CMatrix,
    k2: CMatrix,
    k3: CMatrix,
    k4: CMatrix,
    stage: CMatrix,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = || CMatrix::zeros(dim, dim);
        Self { k1: z(), k2: z(), k3: z(), k4: z(), stage: z() }
    }

    pub fn step<G: Generator + ?Sized>(&mut self, g: &G, t: f64, dt: f64, rho: &mut CMatrix) {
        let h = C64::new(dt, 0.0);
        let half = C64::new(0.5 * dt, 0.0);
        g.apply(t, rho, &mut self.k1);

        self.stage.copy_from(rho);
        axpy(&mut self.stage, half, &self.k1);
        g.apply(t + 0.5 * dt, &self.stage, &mut self.k2);

        self.stage.copy_from(rho);
        axpy(&mut self.stage, half, &self.k2);
        g.apply(t + 0.5 * dt, &self.stage, &mut self.k3);

        self.stage.copy_from(rho);
        axpy(&mut self.stage, h, &self.k3);
        g.apply(t + dt, &self.stage, &mut self.k4);

        let sixth = C64::new(dt / 6.0, 0.0);
        let third = C64::new(dt / 3.0, 0.0);
        axpy(rho, sixth, &self.k1);
        axpy(rho, third, &self.k2);
        axpy(rho, third, &self.k3);
        axpy(rho, sixth, &self.k4);
    }
}

/// `y += a·x`, entrywise.
fn axpy(y: &mut CMatrix, a: C64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += a * xi;
    }
}

/// Splits `span` into `ceil(span / max_dt)` equal steps.
pub(crate) fn step_count(span: f64, max_dt: f64) -> usize {
    if span <= 0.0 {
        return 0;
    }
    let n = (span / max_dt - 1e-9).ceil();
    (n as usize).max(1)
}
