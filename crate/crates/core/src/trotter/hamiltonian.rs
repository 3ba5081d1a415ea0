//! Sideband couplings in the interaction frame of the phonon (rotating at
//! ω_z) and the spin. A laser at detuning δ from the spin transition gives
//!
//! ```text
//! H(t) = c σ₊ ⊗ e^{iη(a e^{−iω_z t} + a† e^{iω_z t})} e^{−i(δt + φ)} + h.c.
//! ```
//!
//! with c = Ω/(2η) for first-order sidebands and squeeze tones and c = Ω/η²
//! for the second red sideband. Splitting `e^{ikx}` by diagonals d = m − n
//! turns this into a sum of harmonic terms at frequencies `δ − d ω_z`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Pulse, PulseKind};
use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, FockTruncation};
use crate::integrate::DriveTerm;
use crate::operator::{CMatrix, Operator, Space, C64, I, ONE};

type CacheKey = (u64, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<CMatrix>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<CMatrix>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `e^{iη(a+a†)}` on `levels` Fock levels, from the eigendecomposition of
/// the truncated quadrature. Results are cached per (η, levels).
pub fn exp_ikx(eta: f64, levels: usize) -> Arc<CMatrix> {
    let key = (eta.to_bits(), levels);
    if let Some(m) = cache().lock().expect("cache lock").get(&key) {
        return Arc::clone(m);
    }
    let a = annihilation_matrix(levels);
    let x = DMatrix::<f64>::from_fn(levels, levels, |i, j| eta * (a[(i, j)].re + a[(j, i)].re));
    let eig = SymmetricEigen::new(x);
    let v = eig.eigenvectors.map(|z| C64::new(z, 0.0));
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, l)));
    let m = Arc::new(&v * phases * v.transpose());
    let mut guard = cache().lock().expect("cache lock");
    Arc::clone(guard.entry(key).or_insert(m))
}

/// Resonance data of a sideband pulse.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Sideband {
    /// δ = harmonic · ω_z + sign · detuning.
    pub harmonic: i32,
    pub sign: f64,
    /// Order in η of the resonant coupling: 1 → a or a†, 2 → a².
    pub order: u32,
    /// Phonon number change of the resonant process on σ₊: −1, +1 or −2.
    pub step: i32,
}

pub(crate) fn sideband(kind: PulseKind) -> Option<Sideband> {
    let (harmonic, sign, order, step) = match kind {
        PulseKind::Rsb1 => (-1, 1.0, 1, -1),
        PulseKind::Bsb1 => (1, 1.0, 1, 1),
        PulseKind::Rsb2 => (-2, 1.0, 2, -2),
        PulseKind::SqueezeToneRPlus => (-1, 1.0, 1, -1),
        PulseKind::SqueezeToneRMinus => (-1, -1.0, 1, -1),
        PulseKind::SqueezeToneBPlus => (1, 1.0, 1, 1),
        PulseKind::SqueezeToneBMinus => (1, -1.0, 1, 1),
        PulseKind::SpinReset | PulseKind::Idle | PulseKind::SqueezeEffective => return None,
    };
    Some(Sideband { harmonic, sign, order, step })
}

fn prefactor(sb: &Sideband, rabi: f64, eta: f64) -> f64 {
    match sb.order {
        1 => rabi / (2.0 * eta),
        _ => rabi / (eta * eta),
    }
}

/// Embeds a phonon matrix as `σ₊ ⊗ m` on the joint space.
fn raise(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut j = CMatrix::zeros(2 * n, 2 * n);
    j.view_mut((n, 0), (n, n)).copy_from(m);
    j
}

/// Full coupling of `pulse` as harmonic terms on the joint space, one per
/// nonzero diagonal of `e^{ikx}`.
pub(crate) fn full_terms(pulse: &Pulse, eta: f64, omega_z: f64, levels: usize) -> Result<Vec<DriveTerm>> {
    let sb = sideband(pulse.kind).ok_or_else(|| Error::NotASideband(pulse.kind.to_string()))?;
    let e = exp_ikx(eta, levels);
    let c = prefactor(&sb, pulse.rabi, eta);
    let delta = sb.harmonic as f64 * omega_z + sb.sign * pulse.detuning;
    let amplitude = C64::from_polar(1.0, -pulse.phase);
    let n = levels as i64;
    let mut terms = Vec::new();
    for d in -(n - 1)..n {
        let mut m = CMatrix::zeros(levels, levels);
        let mut any = false;
        for col in 0..n {
            let row = col + d;
            if (0..n).contains(&row) {
                let v = e[(row as usize, col as usize)] * c;
                if v.norm() > 0.0 {
                    m[(row as usize, col as usize)] = v;
                    any = true;
                }
            }
        }
        if any {
            terms.push(DriveTerm::new(&raise(&m), amplitude, delta - d as f64 * omega_z));
        }
    }
    Ok(terms)
}

/// Lamb-Dicke limit of `pulse`: the resonant term of `full_terms` with
/// `e^{ikx}` expanded to the lowest contributing order,
/// `c (iη)^k/k! O` with O = a, a† or a².
pub(crate) fn rwa_term(pulse: &Pulse, levels: usize) -> Result<DriveTerm> {
    let sb = sideband(pulse.kind).ok_or_else(|| Error::NotASideband(pulse.kind.to_string()))?;
    let a = annihilation_matrix(levels);
    let (op, coupling) = match sb.step {
        -1 => (a, I * 0.5 * pulse.rabi),
        1 => (a.adjoint(), I * 0.5 * pulse.rabi),
        _ => (&a * &a, -ONE * 0.5 * pulse.rabi),
    };
    Ok(DriveTerm::new(&raise(&(op * coupling)), C64::from_polar(1.0, -pulse.phase), sb.sign * pulse.detuning))
}

/// Second-order light shift of the transition |↓,n⟩ ↔ |↑,m⟩ from the
/// off-resonant terms: for `g e^{−iνt} σ₊|m'⟩⟨n'| + h.c.` the time-averaged
/// Hamiltonian is `(|g|²/ν)(|↓,n'⟩⟨↓,n'| − |↑,m'⟩⟨↑,m'|)`.
pub(crate) fn light_shift(terms: &[DriveTerm], levels: usize, down: usize, up: usize, omega_z: f64) -> f64 {
    let mut shift_down = 0.0;
    let mut shift_up = 0.0;
    for term in terms {
        if term.frequency.abs() <= 1e-9 * omega_z {
            continue;
        }
        let w = term.amplitude.norm_sqr() / term.frequency;
        for &(i, j, v) in term.op.entries() {
            let (m, n) = (i - levels, j);
            if n == down {
                shift_down += w * v.norm_sqr();
            }
            if m == up {
                shift_up -= w * v.norm_sqr();
            }
        }
    }
    shift_up - shift_down
}

/// Lowest pair (↓ level, ↑ level) connected by the resonant coupling.
pub(crate) fn reference_pair(kind: PulseKind) -> Option<(usize, usize)> {
    sideband(kind).map(|sb| if sb.step < 0 { ((-sb.step) as usize, 0) } else { (0, sb.step as usize) })
}

/// Sideband Hamiltonian of `pulse` at time `time` on the joint spin ⊗ phonon
/// space, in the interaction frame of phonon and spin.
pub fn sideband_hamiltonian(
    pulse: &Pulse,
    eta: f64,
    omega_z: f64,
    time: f64,
    trunc: &FockTruncation,
) -> Result<Operator> {
    trunc.validate()?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter { name: "eta", reason: format!("must lie in (0, 1), got {eta}") });
    }
    let levels = trunc.n_max;
    let terms = full_terms(pulse, eta, omega_z, levels)?;
    Ok(Operator::from_parts(Space::SpinPhonon(levels), sum_terms(&terms, time, 2 * levels)))
}

/// `Σ c_k(t) A_k + h.c.` as a dense matrix.
pub(crate) fn sum_terms(terms: &[DriveTerm], time: f64, dim: usize) -> CMatrix {
    let mut h = CMatrix::zeros(dim, dim);
    for term in terms {
        let c = term.coefficient(time);
        for &(i, j, v) in term.op.entries() {
            h[(i, j)] += c * v;
            h[(j, i)] += (c * v).conj();
        }
    }
    h
}
