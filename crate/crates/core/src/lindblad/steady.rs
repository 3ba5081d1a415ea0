//! Null-space extraction for the Liouvillian.
//!
//! The column-stacked superoperator of the van der Pol generator couples
//! ρ_ij only to ρ_kl with |k−i|, |l−j| ≤ 2, so it is banded with half
//! bandwidth 2N+2. The null vector is found by block inverse iteration on
//! the banded LU of `L − δ`, with δ a tiny positive shift outside the
//! spectrum; Rayleigh–Ritz on the converged block yields the eigenvalues
//! closest to zero, which feed the uniqueness and gap diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::integrate::MasterEquation;
use crate::lindblad::{master_equation, VdpParams};
use crate::operator::{hermitize, CMatrix, Operator, C64, I, ZERO};
use crate::state::DensityMatrix;

const BLOCK: usize = 4;
const ITERATIONS: usize = 16;
/// Shift as a fraction of ‖L‖.
const SHIFT: f64 = 1e-12;
/// Largest acceptable |λ₀| relative to ‖L‖.
const NULL_TOLERANCE: f64 = 1e-6;
/// Eigenvalues this close to zero (relative to ‖L‖) count as null.
const DEGENERACY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Ritz values nearest zero, sorted by modulus.
    pub eigenvalues: Vec<C64>,
    /// Max-row-sum norm of the superoperator.
    pub norm: f64,
}

impl SteadyState {
    /// Smallest nonzero relaxation rate estimate, |λ₁|.
    pub fn gap(&self) -> f64 {
        self.eigenvalues.get(1).map_or(f64::INFINITY, |z| z.norm())
    }
}

pub fn steady_state(params: &VdpParams) -> Result<DensityMatrix> {
    steady_state_detailed(params).map(|s| s.rho)
}

pub fn steady_state_detailed(params: &VdpParams) -> Result<SteadyState> {
    params.validate()?;
    if !params.has_dissipation() {
        return Err(Error::NoDissipation);
    }
    let n = params.levels();
    let me = master_equation(params);
    let band = assemble_band(&me, n);
    let norm = band.norm_inf();
    let dim = n * n;

    let mut shifted = band.clone();
    shifted.shift_diagonal(C64::new(SHIFT * norm, 0.0));
    let lu = shifted.factor()?;

    let k = BLOCK.min(dim);
    let mut basis = initial_block(n, k);
    orthonormalize(&mut basis);
    for _ in 0..ITERATIONS {
        for mut col in basis.column_iter_mut() {
            lu.solve_in_place(col.as_mut_slice());
        }
        orthonormalize(&mut basis);
    }

    // Rayleigh–Ritz: B = Xᴴ L X.
    let mut lx = DMatrix::<C64>::zeros(dim, k);
    for (j, col) in basis.column_iter().enumerate() {
        let y = band.matvec(col.as_slice());
        lx.set_column(j, &DVector::from_vec(y));
    }
    let ritz = basis.adjoint() * &lx;
    let (values, vectors) = small_eigen(&ritz);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()));
    let eigenvalues: Vec<C64> = order.iter().map(|&i| values[i]).collect();

    let lambda0 = eigenvalues[0].norm();
    let null_count = eigenvalues.iter().filter(|z| z.norm() <= DEGENERACY_TOLERANCE * norm).count();
    if null_count >= 2 {
        return Err(Error::NonUniqueSteadyState { count: null_count, threshold: DEGENERACY_TOLERANCE * norm });
    }
    if lambda0 > NULL_TOLERANCE * norm || (k > 1 && eigenvalues[1].norm() < 100.0 * lambda0) {
        return Err(Error::SmallSpectralGap {
            lambda0,
            lambda1: eigenvalues.get(1).map_or(f64::INFINITY, |z| z.norm()),
        });
    }

    let coeffs = vectors.column(order[0]);
    let x = &basis * coeffs;
    let mut rho = CMatrix::from_column_slice(n, n, x.as_slice());
    let tr = rho.trace();
    rho /= tr;
    hermitize(&mut rho);
    let tr = rho.trace().re;
    rho /= C64::new(tr, 0.0);
    let rho = DensityMatrix::new(Operator::from_parts(params.trunc.space(), rho))?;
    Ok(SteadyState { rho, eigenvalues, norm })
}

/// Banded superoperator of `me` on an `n`-level space, column stacking
/// `vec(ρ)[i + n·j] = ρ_ij`.
pub(crate) fn assemble_band(me: &MasterEquation, n: usize) -> BandMatrix {
    let idx = |i: usize, j: usize| i + n * j;
    let h = me.h_eff();
    let mut reach = 0usize;
    for &(i, k, _) in h.entries() {
        reach = reach.max(i.abs_diff(k) * n).max(i.abs_diff(k));
    }
    for (_, o) in me.jumps() {
        let spread = o.entries().iter().map(|&(i, k, _)| i.abs_diff(k)).max().unwrap_or(0);
        reach = reach.max(spread * (n + 1));
    }
    let mut band = BandMatrix::zeros(n * n, reach, reach);

    for &(i, k, v) in h.entries() {
        // −i H_eff ρ
        for j in 0..n {
            band.add(idx(i, j), idx(k, j), -I * v);
        }
        // +i ρ H_eff†: (ρ H†)_{r,i} = Σ_k ρ_{r,k} conj(H_{i,k})
        for r in 0..n {
            band.add(idx(r, i), idx(r, k), I * v.conj());
        }
    }
    for (rate, o) in me.jumps() {
        for &(i, k, v) in o.entries() {
            for &(j, l, w) in o.entries() {
                band.add(idx(i, j), idx(k, l), v * w.conj() * *rate);
            }
        }
    }
    band
}

fn initial_block(n: usize, k: usize) -> DMatrix<C64> {
    let dim = n * n;
    let mut x = DMatrix::<C64>::zeros(dim, k);
    // Identity seeds the trace direction; the rest are fixed quasi-random fills.
    for i in 0..n {
        x[(i + n * i, 0)] = C64::new(1.0, 0.0);
    }
    for c in 1..k {
        for r in 0..dim {
            let phase = (r as f64 + 1.0) * (0.7548776662466927 * c as f64 + 0.5698402909980532);
            x[(r, c)] = C64::new((phase * 12.9898).sin(), (phase * 78.233).cos());
        }
    }
    x
}

/// Modified Gram–Schmidt applied twice.
fn orthonormalize(x: &mut DMatrix<C64>) {
    let k = x.ncols();
    for _ in 0..2 {
        for j in 0..k {
            for i in 0..j {
                let proj = x.column(i).dotc(&x.column(j));
                let qi = x.column(i).clone_owned();
                x.column_mut(j).axpy(-proj, &qi, C64::new(1.0, 0.0));
            }
            let norm = x.column(j).norm();
            if norm > 0.0 {
                x.column_mut(j).unscale_mut(norm);
            }
        }
    }
}

/// Eigen-decomposition of a small dense complex matrix via complex Schur
/// form followed by back substitution for the eigenvectors.
fn small_eigen(m: &DMatrix<C64>) -> (Vec<C64>, DMatrix<C64>) {
    let k = m.nrows();
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..k).map(|i| t[(i, i)]).collect();
    let mut vecs = DMatrix::<C64>::zeros(k, k);
    for e in 0..k {
        // Solve (T − λ_e) y = 0 with y_e = 1, y_i = 0 for i > e.
        let lambda = values[e];
        let mut y = DVector::<C64>::zeros(k);
        y[e] = C64::new(1.0, 0.0);
        for i in (0..e).rev() {
            let mut s = ZERO;
            for j in (i + 1)..=e {
                s += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < 1e-300 {
                denom = C64::new(1e-300, 0.0);
            }
            y[i] = -s / denom;
        }
        let v = &q * y;
        let norm = v.norm();
        vecs.set_column(e, &(v / C64::new(norm, 0.0)));
    }
    (values, vecs)
}
