//! Cycle-by-cycle integration of a pulse schedule on the joint spin ⊗ phonon
//! space, in the frame where the phonon rotates at ω_z.
//!
//! Rotating-wave segments are integrated directly with RK4. Full-Hamiltonian
//! segments on exact resonance are periodic in the trap period P, so the
//! sideband propagator over one period is computed once and moved to any
//! start time by a diagonal phase conjugation; drive and heating act on
//! either side of it (Strang splitting). Off-resonant segments fall back to
//! RK4 with P/128 steps. By default the laser is retuned onto the
//! light-shifted resonance of the lowest coupled pair, as an experiment
//! calibrates it; the phonon-number dependence of the shift remains.

use super::hamiltonian::{full_terms, light_shift, reference_pair, rwa_term, sideband};
use super::{Fidelity, PulseKind, PulseSchedule};
use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, lift_spin_down, trace_out_spin, FockTruncation};
use crate::integrate::{DriveTerm, Generator, MasterEquation, Rk4};
use crate::lindblad::evolve::advance;
use crate::lindblad::Trajectory;
use crate::operator::{hermitize, CMatrix, Space, C64, I, ZERO};
use crate::sparse::SparseOp;
use crate::state::DensityMatrix;

/// Largest accepted integration step (s).
pub const MAX_DT: f64 = 0.5e-6;
const MAX_TRACE_DRIFT: f64 = 1e-5;
/// RK4 steps per trap period for the full Hamiltonian.
const DIRECT_STEPS_PER_PERIOD: usize = 128;
const FLOQUET_STEPS_PER_PERIOD: usize = 256;

/// `|↓⟩⟨↓| ⊗ (⟨↓|ρ|↓⟩ + ⟨↑|ρ|↑⟩)`.
pub fn spin_reset(rho: &DensityMatrix) -> Result<DensityMatrix> {
    match rho.space() {
        Space::SpinPhonon(n) => Ok(DensityMatrix::from_matrix_unchecked(rho.space(), reset_matrix(rho.matrix(), n))),
        other => Err(Error::WrongSpace { expected: "spin_phonon(N)".into(), found: other.to_string() }),
    }
}

fn reset_matrix(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&trace_out_spin(m, n));
    out
}

/// Runs `schedule` from the phonon state `rho0` (spin starts in |↓⟩) and
/// records the phonon state at every cycle boundary, transformed to the
/// frame of the continuous drive.
pub fn run_schedule(rho0: &DensityMatrix, schedule: &PulseSchedule, dt: f64) -> Result<Trajectory> {
    schedule.validate()?;
    let n = match rho0.space() {
        Space::Phonon(n) => n,
        other => return Err(Error::WrongSpace { expected: "phonon(N)".into(), found: other.to_string() }),
    };
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("must lie in (0, {MAX_DT:e}] s, got {dt}") });
    }
    let trunc = FockTruncation::with_tolerance(n, schedule.tail_tolerance)?;
    let params = schedule.effective_params(trunc);
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    if schedule.n_cycles == 0 {
        return Ok(Trajectory { times, states, params });
    }

    let plan = Plan::new(schedule, n)?;
    let mut rho = lift_spin_down(rho0)?.matrix().clone();
    let mut rk = Rk4::new(2 * n);
    let period = schedule.cycle_period;
    let mut t = 0.0;
    for k in 0..schedule.n_cycles {
        let cycle_start = k as f64 * period;
        for seg in &plan.segments {
            seg.run(&plan, &mut rk, &mut rho, &mut t, cycle_start, dt)?;
        }
        let end = (k + 1) as f64 * period;
        advance(&plan.slow, &mut rk, &mut rho, &mut t, end, dt, MAX_TRACE_DRIFT)?;
        t = end;

        let phonon = to_drive_frame(trace_out_spin(&rho, n), plan.drive_detuning * t);
        let state = DensityMatrix::from_matrix_unchecked(Space::Phonon(n), phonon);
        state.check_tail(schedule.tail_tolerance)?;
        times.push(t);
        states.push(state);
    }
    Ok(Trajectory { times, states, params })
}

/// `e^{iφ a†a} ρ e^{−iφ a†a}`.
fn to_drive_frame(mut m: CMatrix, phi: f64) -> CMatrix {
    if phi != 0.0 {
        let n = m.nrows();
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] *= C64::from_polar(1.0, phi * (i as f64 - j as f64));
            }
        }
    }
    hermitize(&mut m);
    m
}

struct Plan {
    segments: Vec<Segment>,
    /// Drive and heating only.
    slow: MasterEquation,
    drive_detuning: f64,
    omega_z: f64,
}

/// A stretch of the cycle with a fixed set of active pulses.
struct Segment {
    start: f64,
    duration: f64,
    generator: Option<MasterEquation>,
    floquet: Option<Floquet>,
    reset_after: bool,
    direct_dt: f64,
}

/// Sideband propagator over one trap period starting at t = 0.
struct Floquet {
    unitary: CMatrix,
    harmonic: i32,
    /// Drive and heating (plus any effective squeezing) for the split steps.
    slow: MasterEquation,
}

impl Plan {
    fn new(s: &PulseSchedule, n: usize) -> Result<Self> {
        let a = annihilation_matrix(n);
        let spin_id = CMatrix::identity(2, 2);
        let lift = |m: &CMatrix| spin_id.kronecker(m);
        let ja = lift(&a);
        let jad = lift(&a.adjoint());
        let h0 = &jad * &ja * C64::new(s.trap_frequency_offset, 0.0);
        let jumps = [(s.gamma_h, jad.clone()), (s.gamma_h, ja.clone())];

        let mut base_drives = Vec::new();
        let mut drive_detuning = 0.0;
        if let Some(d) = &s.continuous_drive {
            drive_detuning = d.detuning;
            if d.omega != 0.0 {
                base_drives.push(DriveTerm::new(&jad, I * d.omega * C64::from_polar(1.0, -d.phase), d.detuning));
            }
        }
        let slow = MasterEquation::new(&h0, &jumps, base_drives.clone());
        let period = 2.0 * std::f64::consts::PI / s.omega_z;

        let mut segments = Vec::new();
        for group in s.groups() {
            let mut ends: Vec<f64> = group.pulses.iter().map(|p| p.duration).collect();
            ends.push(0.0);
            ends.sort_by(f64::total_cmp);
            ends.dedup();
            let mut prev = 0.0;
            for (idx, &end) in ends.iter().enumerate() {
                if idx > 0 && end <= prev {
                    continue;
                }
                let active: Vec<_> = group.pulses.iter().filter(|p| p.duration >= end && end > prev).collect();
                let reset_after = group.pulses.iter().any(|p| p.kind == PulseKind::SpinReset && p.duration == end);
                if end == 0.0 && !reset_after {
                    prev = end;
                    continue;
                }

                let mut slow_drives = base_drives.clone();
                let mut sideband_terms = Vec::new();
                for p in &active {
                    match p.kind {
                        PulseKind::SqueezeEffective => {
                            let ad2 = &jad * &jad;
                            let amp = I * (0.5 * p.rabi) * C64::from_polar(1.0, 2.0 * p.phase);
                            slow_drives.push(DriveTerm::new(&ad2, amp, 2.0 * drive_detuning));
                        }
                        k if k.is_sideband() => match s.fidelity {
                            Fidelity::RotatingWave => sideband_terms.push(rwa_term(p, n)?),
                            Fidelity::Full => sideband_terms.extend(full_terms(p, s.eta, s.omega_z, n)?),
                        },
                        _ => {}
                    }
                }
                let sidebands: Vec<_> = active.iter().filter(|p| p.kind.is_sideband()).collect();
                let has_coherent = slow_drives.len() > base_drives.len() || !sideband_terms.is_empty();
                // Retune onto the light-shifted line of the lowest resonant pair,
                // written as a static spin term so the coupling stays periodic.
                let mut h_seg = h0.clone();
                if s.fidelity == Fidelity::Full && s.stark_compensation && !sidebands.is_empty() {
                    if let Some((down, up)) = reference_pair(sidebands[0].kind) {
                        if down < n && up < n {
                            let x = light_shift(&sideband_terms, n, down, up, s.omega_z);
                            for i in n..2 * n {
                                h_seg[(i, i)] -= C64::new(x, 0.0);
                            }
                        }
                    }
                }

                let floquet = if s.fidelity == Fidelity::Full && !sidebands.is_empty() {
                    let harmonic = sideband(sidebands[0].kind).map(|sb| sb.harmonic);
                    let periodic = sidebands
                        .iter()
                        .all(|p| p.detuning == 0.0 && sideband(p.kind).map(|sb| sb.harmonic) == harmonic);
                    periodic.then(|| Floquet {
                        unitary: period_unitary(&sideband_terms, &(&h_seg - &h0), period, 2 * n),
                        harmonic: harmonic.unwrap_or(0),
                        slow: MasterEquation::new(&h0, &jumps, slow_drives.clone()),
                    })
                } else {
                    None
                };
                let generator = has_coherent.then(|| {
                    let mut drives = slow_drives;
                    drives.extend(sideband_terms);
                    MasterEquation::new(&h_seg, &jumps, drives)
                });
                let direct_dt = if s.fidelity == Fidelity::Full && !sidebands.is_empty() {
                    period / DIRECT_STEPS_PER_PERIOD as f64
                } else {
                    f64::INFINITY
                };
                segments.push(Segment {
                    start: group.start + prev,
                    duration: end - prev,
                    generator,
                    floquet,
                    reset_after,
                    direct_dt,
                });
                prev = end;
            }
        }
        Ok(Self { segments, slow, drive_detuning, omega_z: s.omega_z })
    }
}

impl Segment {
    fn run(&self, plan: &Plan, rk: &mut Rk4, rho: &mut CMatrix, t: &mut f64, cycle_start: f64, dt: f64) -> Result<()> {
        let start = cycle_start + self.start;
        // Gap before the segment (idle time left by shorter simultaneous pulses).
        advance(&plan.slow, rk, rho, t, start, dt, MAX_TRACE_DRIFT)?;
        *t = start;
        let end = start + self.duration;
        let step = dt.min(self.direct_dt);
        match (&self.floquet, &self.generator) {
            (Some(f), Some(g)) => {
                let period = 2.0 * std::f64::consts::PI / plan.omega_z;
                let whole = ((self.duration / period) + 1e-9).floor() as usize;
                if whole > 0 {
                    let u = f.unitary_at(start, plan.omega_z, rho.nrows() / 2);
                    let u_dag = u.adjoint();
                    for k in 0..whole {
                        let t0 = start + k as f64 * period;
                        advance(&f.slow, rk, rho, t, t0 + 0.5 * period, dt, MAX_TRACE_DRIFT)?;
                        *rho = &u * &*rho * &u_dag;
                        hermitize(rho);
                        advance(&f.slow, rk, rho, t, t0 + period, dt, MAX_TRACE_DRIFT)?;
                    }
                }
                advance(g, rk, rho, t, end, step, MAX_TRACE_DRIFT)?;
            }
            (None, Some(g)) => advance(g, rk, rho, t, end, step, MAX_TRACE_DRIFT)?,
            _ => advance(&plan.slow, rk, rho, t, end, dt, MAX_TRACE_DRIFT)?,
        }
        *t = end;
        if self.reset_after {
            let n = rho.nrows() / 2;
            *rho = reset_matrix(rho, n);
        }
        Ok(())
    }
}

impl Floquet {
    /// Period propagator starting at `t0`: `W U W†` with W diagonal,
    /// `W|↓,n⟩ = e^{inω_z t0}|↓,n⟩` and `W|↑,m⟩ = e^{−i(h−m)ω_z t0}|↑,m⟩`.
    fn unitary_at(&self, t0: f64, omega_z: f64, n: usize) -> CMatrix {
        let phase = |idx: usize| {
            let (up, m) = (idx >= n, (idx % n) as f64);
            let k = if up { self.harmonic as f64 - m } else { -m };
            C64::from_polar(1.0, -k * omega_z * t0)
        };
        let w: Vec<C64> = (0..2 * n).map(phase).collect();
        CMatrix::from_fn(2 * n, 2 * n, |i, j| w[i] * self.unitary[(i, j)] * w[j].conj())
    }
}

/// `i dU/dt = (H_s + H(t)) U` for a static part plus harmonic terms.
struct Schrodinger<'a> {
    terms: &'a [DriveTerm],
    fixed: SparseOp,
    dim: usize,
}

impl Generator for Schrodinger<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, u: &CMatrix, out: &mut CMatrix) {
        out.fill(ZERO);
        self.fixed.mul_left_acc(-I, u, out);
        for term in self.terms {
            let c = term.coefficient(t);
            term.op.mul_left_acc(-I * c, u, out);
            term.op_dag.mul_left_acc(-I * c.conj(), u, out);
        }
    }
}

fn period_unitary(terms: &[DriveTerm], fixed: &CMatrix, period: f64, dim: usize) -> CMatrix {
    let g = Schrodinger { terms, fixed: SparseOp::from_dense(fixed), dim };
    let mut rk = Rk4::new(dim);
    let mut u = CMatrix::identity(dim, dim);
    let h = period / FLOQUET_STEPS_PER_PERIOD as f64;
    for k in 0..FLOQUET_STEPS_PER_PERIOD {
        rk.step(&g, k as f64 * h, h, &mut u);
    }
    // Polar projection back onto the unitaries: U (U†U)^{-1/2}.
    let gram = u.adjoint() * &u;
    let eig = gram.symmetric_eigen();
    let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    let v = eig.eigenvectors;
    u * (&v * inv_sqrt * v.adjoint())
}
