//! Exact dynamics of the quantum van der Pol master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + γ₁⁺ D[a†]ρ + γ₁⁻ D[a]ρ + γ₂ D[a²]ρ + γ_h (D[a†] + D[a])ρ
//! H     = −Δ a†a + iΩ(a† − a) + iΩ₂/2 (a†² e^{2iθ} − a² e^{−2iθ})
//! ```
//!
//! in the frame rotating at the drive frequency.

pub(crate) mod evolve;
mod params;
mod steady;

pub use evolve::{evolve, evolve_with_options, EvolveOptions, Trajectory, DEFAULT_DT};
pub use params::VdpParams;
pub use steady::{steady_state, steady_state_detailed, SteadyState};

use crate::error::Result;
use crate::fock::annihilation_matrix;
use crate::integrate::MasterEquation;
use crate::operator::{CMatrix, Operator, C64, I};
use crate::state::DensityMatrix;

/// Coherent part of the master equation on the phonon space.
pub fn vdp_hamiltonian(params: &VdpParams) -> Operator {
    Operator::from_parts(params.trunc.space(), hamiltonian_matrix(params))
}

fn hamiltonian_matrix(p: &VdpParams) -> CMatrix {
    let n = p.levels();
    let a = annihilation_matrix(n);
    let ad = a.adjoint();
    let num = &ad * &a;
    let a2 = &a * &a;
    let ad2 = &ad * &ad;

    let drive = C64::from_polar(1.0, p.drive_phase);
    let squeeze = C64::from_polar(1.0, 2.0 * (p.theta + p.drive_phase));

    let mut h = num * C64::new(-p.delta, 0.0);
    if p.omega != 0.0 {
        h += (ad * drive - a * drive.conj()) * (I * p.omega);
    }
    if p.omega2 != 0.0 {
        h += (ad2 * squeeze - a2 * squeeze.conj()) * (I * (0.5 * p.omega2));
    }
    h
}

/// Jump operators with their total rates; heating is folded into the
/// one-phonon channels.
fn jump_operators(p: &VdpParams) -> Vec<(f64, CMatrix)> {
    let a = annihilation_matrix(p.levels());
    let ad = a.adjoint();
    let a2 = &a * &a;
    vec![(p.gamma1_plus + p.gamma_h, ad), (p.gamma1_minus + p.gamma_h, a), (p.gamma2, a2)]
}

pub(crate) fn master_equation(params: &VdpParams) -> MasterEquation {
    MasterEquation::new(&hamiltonian_matrix(params), &jump_operators(params), Vec::new())
}

/// `D[O]ρ = OρO† − {O†O, ρ}/2`.
pub fn dissipator_apply(jump: &Operator, rho: &DensityMatrix) -> Result<Operator> {
    jump.same_space(rho.op())?;
    Ok(Operator::from_parts(jump.space(), dissipator_matrix(jump.matrix(), rho.matrix())))
}

pub(crate) fn dissipator_matrix(o: &CMatrix, rho: &CMatrix) -> CMatrix {
    let od = o.adjoint();
    let odo = &od * o;
    o * rho * &od - (&odo * rho + rho * &odo) * C64::new(0.5, 0.0)
}

/// Right-hand side of the master equation evaluated at `rho`.
pub fn liouvillian_apply(params: &VdpParams, rho: &DensityMatrix) -> Result<Operator> {
    params.validate()?;
    let space = params.trunc.space();
    let probe = Operator::zeros(space);
    probe.same_space(rho.op())?;
    let me = master_equation(params);
    let mut out = CMatrix::zeros(space.dim(), space.dim());
    crate::integrate::Generator::apply(&me, 0.0, rho.matrix(), &mut out);
    Ok(Operator::from_parts(space, out))
}

/// Dense N²×N² Liouvillian in the column-stacking convention
/// `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`:
///
/// ```text
/// L = −i(I⊗H − Hᵀ⊗I) + Σ γ [Ō⊗O − ½(I⊗O†O + (O†O)ᵀ⊗I)]
/// ```
pub fn superoperator(params: &VdpParams) -> CMatrix {
    let n = params.levels();
    let id = CMatrix::identity(n, n);
    let h = hamiltonian_matrix(params);
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * (-I);
    for (rate, o) in jump_operators(params) {
        if rate == 0.0 {
            continue;
        }
        let odo = o.adjoint() * &o;
        let term = o.map(|z| z.conj()).kronecker(&o)
            - (id.kronecker(&odo) + odo.transpose().kronecker(&id)) * C64::new(0.5, 0.0);
        l += term * C64::new(rate, 0.0);
    }
    l
}

/// Column-stacked vectorization of a square matrix.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}
