//! Truncated Fock-space primitives: ladder operators, displacements,
//! standard initial states and the spin ⊗ phonon product.

use crate::error::{Error, Result};
use crate::operator::{hermitize, max_abs_diff, CMatrix, Operator, Space, C64, ONE, ZERO};
use crate::state::DensityMatrix;

/// Default number of retained Fock levels.
pub const DEFAULT_LEVELS: usize = 30;
/// Default population allowed in the top two retained levels.
///
/// A displaced thermal state with n̄ = 1.5, α = 1 already holds 1e-5 in
/// levels 28–29 of a 30-level space, so tighter defaults reject ordinary
/// initial states.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-3;

/// Fock-space truncation: levels `0..n_max` are retained, so `n_max` is
/// also the phonon-space dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockTruncation {
    pub n_max: usize,
    pub tail_tolerance: f64,
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self { n_max: DEFAULT_LEVELS, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        Self::with_tolerance(n_max, DEFAULT_TAIL_TOLERANCE)
    }

    pub fn with_tolerance(n_max: usize, tail_tolerance: f64) -> Result<Self> {
        let t = Self { n_max, tail_tolerance };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: format!("need at least 2 levels, got {}", self.n_max),
            });
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tail_tolerance",
                reason: format!("must be positive, got {}", self.tail_tolerance),
            });
        }
        Ok(())
    }

    pub fn space(&self) -> Space {
        Space::Phonon(self.n_max)
    }

    pub fn joint_space(&self) -> Space {
        Space::SpinPhonon(self.n_max)
    }
}

pub(crate) fn annihilation_matrix(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Returns `(a, a†, a†a)` on the truncated space.
pub fn ladder_ops(trunc: &FockTruncation) -> (Operator, Operator, Operator) {
    let space = trunc.space();
    let a = annihilation_matrix(trunc.n_max);
    let ad = a.adjoint();
    let n = &ad * &a;
    (Operator::from_parts(space, a), Operator::from_parts(space, ad), Operator::from_parts(space, n))
}

/// `ln k!` for `k = 0..len`.
fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..len {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Fock-basis matrix elements of `D(α) = exp(α a† − α* a)`.
///
/// Entries are the exact infinite-space values restricted to the first `dim`
/// levels, from the associated-Laguerre closed form:
/// `⟨m|D|n⟩ = √(n!/m!) α^(m−n) e^(−|α|²/2) L_n^(m−n)(|α|²)` for `m ≥ n`
/// and the analogous expression with `−α*` above the diagonal.
pub fn displacement_matrix(dim: usize, alpha: C64) -> CMatrix {
    let mut d = CMatrix::zeros(dim, dim);
    let r = alpha.norm();
    if r == 0.0 {
        return CMatrix::identity(dim, dim);
    }
    let x = r * r;
    let ln_r = r.ln();
    let lnf = ln_factorials(dim);
    let lower_phase = alpha / r;
    let upper_phase = -alpha.conj() / r;

    for k in 0..dim {
        // Laguerre L_n^(k)(x) for n = 0..dim-k by the three-term recurrence.
        let len = dim - k;
        let kf = k as f64;
        let mut l_prev = 1.0_f64;
        let mut l_cur = 1.0 + kf - x;
        let lower_pow = lower_phase.powu(k as u32);
        let upper_pow = upper_phase.powu(k as u32);
        for n in 0..len {
            let lag = match n {
                0 => 1.0,
                1 => l_cur,
                _ => {
                    let nf = (n - 1) as f64;
                    let next = ((2.0 * nf + 1.0 + kf - x) * l_cur - (nf + kf) * l_prev) / (nf + 1.0);
                    l_prev = l_cur;
                    l_cur = next;
                    next
                }
            };
            let ln_mag = 0.5 * (lnf[n] - lnf[n + k]) + kf * ln_r - 0.5 * x;
            let mag = ln_mag.exp() * lag;
            d[(n + k, n)] = lower_pow * mag;
            if k > 0 {
                d[(n, n + k)] = upper_pow * mag;
            }
        }
    }
    d
}

/// Displacement operator, checked for unitarity on the lower half of the space.
pub fn displacement_op(trunc: &FockTruncation, alpha: C64) -> Result<Operator> {
    let dim = trunc.n_max;
    let d = displacement_matrix(dim, alpha);
    let half = dim / 2 + 1;
    let dd = d.adjoint() * &d;
    let block = dd.view((0, 0), (half, half)).clone_owned();
    let deviation = max_abs_diff(&block, &CMatrix::identity(half, half));
    if deviation > 1e-6 {
        return Err(Error::DisplacementTruncation { alpha_abs: alpha.norm(), deviation });
    }
    Ok(Operator::from_parts(trunc.space(), d))
}

/// Fock state |n⟩⟨n|.
pub fn fock_state(trunc: &FockTruncation, n: usize) -> Result<DensityMatrix> {
    if n >= trunc.n_max {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("level {n} outside truncation of {} levels", trunc.n_max),
        });
    }
    let mut m = CMatrix::zeros(trunc.n_max, trunc.n_max);
    m[(n, n)] = ONE;
    DensityMatrix::new(Operator::from_parts(trunc.space(), m))
}

pub fn vacuum(trunc: &FockTruncation) -> DensityMatrix {
    fock_state(trunc, 0).expect("vacuum is always representable")
}

/// Coherent state |α⟩⟨α|, renormalized after truncation.
pub fn coherent_state(trunc: &FockTruncation, alpha: C64) -> Result<DensityMatrix> {
    displaced_thermal_state(trunc, 0.0, alpha)
}

/// `D(α) ρ_th(n̄) D†(α)`, renormalized to unit trace.
pub fn displaced_thermal_state(trunc: &FockTruncation, nbar: f64, alpha: C64) -> Result<DensityMatrix> {
    trunc.validate()?;
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter { name: "nbar", reason: format!("must be >= 0, got {nbar}") });
    }
    let dim = trunc.n_max;
    let pops = thermal_populations(dim, nbar);
    // Mass of the thermal distribution above the truncation.
    let lost = if nbar == 0.0 { 0.0 } else { (nbar / (1.0 + nbar)).powi(dim as i32) };
    if lost > trunc.tail_tolerance {
        return Err(Error::TruncationTail { population: lost, tolerance: trunc.tail_tolerance });
    }

    let d = displacement_matrix(dim, alpha);
    let mut rho = CMatrix::zeros(dim, dim);
    for (k, &p) in pops.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let col = d.column(k);
        rho.gerc(C64::new(p, 0.0), &col, &col, ONE);
    }
    hermitize(&mut rho);
    let tr = rho.trace().re;
    rho /= C64::new(tr, 0.0);
    DensityMatrix::new(Operator::from_parts(trunc.space(), rho))
}

/// Thermal populations `∝ (n̄/(1+n̄))ⁿ` on `dim` levels (not renormalized).
fn thermal_populations(dim: usize, nbar: f64) -> Vec<f64> {
    if nbar == 0.0 {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        return v;
    }
    let q = nbar / (1.0 + nbar);
    let mut p = 1.0 / (1.0 + nbar);
    (0..dim)
        .map(|_| {
            let cur = p;
            p *= q;
            cur
        })
        .collect()
}

/// Spin-½ operators in the (↓, ↑) basis.
pub mod spin {
    use super::*;

    fn op(entries: [[C64; 2]; 2]) -> Operator {
        let m = CMatrix::from_fn(2, 2, |i, j| entries[i][j]);
        Operator::from_parts(Space::Spin, m)
    }

    /// σ₊ = |↑⟩⟨↓|.
    pub fn sigma_plus() -> Operator {
        op([[ZERO, ZERO], [ONE, ZERO]])
    }

    pub fn sigma_minus() -> Operator {
        op([[ZERO, ONE], [ZERO, ZERO]])
    }

    pub fn sigma_z() -> Operator {
        op([[-ONE, ZERO], [ZERO, ONE]])
    }

    pub fn down_projector() -> Operator {
        op([[ONE, ZERO], [ZERO, ZERO]])
    }

    pub fn up_projector() -> Operator {
        op([[ZERO, ZERO], [ZERO, ONE]])
    }

    pub fn identity() -> Operator {
        Operator::identity(Space::Spin)
    }
}

/// `spin_op ⊗ phonon_op`, spin factor first.
pub fn tensor_with_spin(phonon_op: &Operator, spin_op: &Operator) -> Result<Operator> {
    let n = match phonon_op.space() {
        Space::Phonon(n) => n,
        other => return Err(Error::WrongSpace { expected: "phonon(N)".into(), found: other.to_string() }),
    };
    if spin_op.space() != Space::Spin || spin_op.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: spin_op.dim() });
    }
    let m = spin_op.matrix().kronecker(phonon_op.matrix());
    Ok(Operator::from_parts(Space::SpinPhonon(n), m))
}

/// Lifts a phonon state to |↓⟩⟨↓| ⊗ ρ.
pub fn lift_spin_down(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let joint = tensor_with_spin(rho.op(), &spin::down_projector())?;
    Ok(DensityMatrix::from_operator_unchecked(joint))
}

/// Partial trace over the spin factor of a joint spin ⊗ phonon matrix.
pub(crate) fn trace_out_spin(m: &CMatrix, levels: usize) -> CMatrix {
    let n = levels;
    let down = m.view((0, 0), (n, n));
    let up = m.view((n, n), (n, n));
    down + up
}
