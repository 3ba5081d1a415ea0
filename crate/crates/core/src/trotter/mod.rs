//! Pulse-level emulation of the trapped-ion reservoir-engineering scheme.
//!
//! A cycle of period T applies sideband pulses to a spin ⊗ phonon system,
//! then resets the spin to |↓⟩. In the Trotter limit a pulse of Rabi rate Ω
//! and length τ realises the dissipator with rate `(Ω/2)² τ² / T`, while the
//! continuous displacement drive and motional heating act throughout.

mod engine;
mod hamiltonian;

pub use engine::{run_schedule, spin_reset, MAX_DT};
pub use hamiltonian::{exp_ikx, sideband_hamiltonian};

use crate::error::{Error, Result};
use crate::fock::{FockTruncation, DEFAULT_TAIL_TOLERANCE};
use crate::lindblad::VdpParams;

/// Lamb-Dicke parameter of the experiment.
pub const DEFAULT_ETA: f64 = 0.0925;
/// Trap frequency ω_z (rad/s).
pub const DEFAULT_OMEGA_Z: f64 = 2.0 * std::f64::consts::PI * 1.1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PulseKind {
    Bsb1,
    Rsb1,
    Rsb2,
    SqueezeToneRPlus,
    SqueezeToneRMinus,
    SqueezeToneBPlus,
    SqueezeToneBMinus,
    SpinReset,
    Idle,
    /// Effective two-phonon drive `iΩ/2 (a†² e^{2iφ} − a² e^{−2iφ})` applied
    /// directly to the phonon for the pulse duration.
    SqueezeEffective,
}

impl PulseKind {
    pub const ALL: [PulseKind; 10] = [
        PulseKind::Bsb1,
        PulseKind::Rsb1,
        PulseKind::Rsb2,
        PulseKind::SqueezeToneRPlus,
        PulseKind::SqueezeToneRMinus,
        PulseKind::SqueezeToneBPlus,
        PulseKind::SqueezeToneBMinus,
        PulseKind::SpinReset,
        PulseKind::Idle,
        PulseKind::SqueezeEffective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PulseKind::Bsb1 => "bsb1",
            PulseKind::Rsb1 => "rsb1",
            PulseKind::Rsb2 => "rsb2",
            PulseKind::SqueezeToneRPlus => "squeeze_tone_r_plus",
            PulseKind::SqueezeToneRMinus => "squeeze_tone_r_minus",
            PulseKind::SqueezeToneBPlus => "squeeze_tone_b_plus",
            PulseKind::SqueezeToneBMinus => "squeeze_tone_b_minus",
            PulseKind::SpinReset => "spin_reset",
            PulseKind::Idle => "idle",
            PulseKind::SqueezeEffective => "squeeze_effective",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// True for pulses that couple spin and phonon through a sideband.
    pub fn is_sideband(self) -> bool {
        !matches!(self, PulseKind::SpinReset | PulseKind::Idle | PulseKind::SqueezeEffective)
    }

    pub fn is_squeeze_tone(self) -> bool {
        matches!(
            self,
            PulseKind::SqueezeToneRPlus
                | PulseKind::SqueezeToneRMinus
                | PulseKind::SqueezeToneBPlus
                | PulseKind::SqueezeToneBMinus
        )
    }
}

impl std::fmt::Display for PulseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    /// Rabi rate Ω (rad/s).
    pub rabi: f64,
    /// Offset from the ideal resonance (rad/s). For squeeze tones this is δ_m.
    pub detuning: f64,
    pub phase: f64,
    /// Length τ (s).
    pub duration: f64,
    /// Start together with the preceding pulse instead of after it.
    pub with_previous: bool,
}

impl Pulse {
    pub fn new(kind: PulseKind, rabi: f64, duration: f64) -> Self {
        Self { kind, rabi, detuning: 0.0, phase: 0.0, duration, with_previous: false }
    }

    pub fn idle(duration: f64) -> Self {
        Self::new(PulseKind::Idle, 0.0, duration)
    }

    pub fn spin_reset(duration: f64) -> Self {
        Self::new(PulseKind::SpinReset, 0.0, duration)
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }

    pub fn simultaneous(self) -> Self {
        Self { with_previous: true, ..self }
    }
}

/// Continuous displacement drive `iΩ a† e^{−i((ω_z+Δ)t + φ)} + h.c.`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousDrive {
    pub omega: f64,
    pub detuning: f64,
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Fidelity {
    /// Each sideband reduced to its resonant coupling, e.g. `(Ω/2)(iσ₊a + h.c.)`.
    #[default]
    RotatingWave,
    /// Full `e^{iη(a+a†)}` couplings with all off-resonant terms.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    /// One cycle, in order.
    pub pulses: Vec<Pulse>,
    pub cycle_period: f64,
    pub n_cycles: usize,
    pub continuous_drive: Option<ContinuousDrive>,
    pub eta: f64,
    pub omega_z: f64,
    pub gamma_h: f64,
    /// Static error ε of the trap frequency, added as `ε a†a` (rad/s).
    pub trap_frequency_offset: f64,
    pub fidelity: Fidelity,
    /// In full mode, retune each sideband onto its light-shifted resonance.
    pub stark_compensation: bool,
    pub tail_tolerance: f64,
}

impl Default for PulseSchedule {
    fn default() -> Self {
        Self {
            pulses: Vec::new(),
            cycle_period: 0.0,
            n_cycles: 0,
            continuous_drive: None,
            eta: DEFAULT_ETA,
            omega_z: DEFAULT_OMEGA_Z,
            gamma_h: 0.0,
            trap_frequency_offset: 0.0,
            fidelity: Fidelity::default(),
            stark_compensation: true,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }
}

/// Pulse lengths of one cycle (s). The idle time fills the rest of the period.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CycleTimes {
    pub squeeze: f64,
    pub bsb: f64,
    pub rsb: f64,
    pub rsb2: f64,
    pub reset: f64,
    pub period: f64,
}

impl CycleTimes {
    pub fn idle(&self) -> f64 {
        self.period - (self.squeeze + self.bsb + self.rsb + self.rsb2 + self.reset)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct EffectiveRates {
    pub gamma1_plus: f64,
    pub gamma1_minus: f64,
    pub gamma2: f64,
    pub omega2_eff: f64,
}

/// Start offset and length of a group of simultaneous pulses.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Group {
    pub start: f64,
    pub duration: f64,
    pub pulses: Vec<Pulse>,
}

impl PulseSchedule {
    pub fn validate(&self) -> Result<()> {
        let invalid = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return invalid("eta", format!("must lie in (0, 1), got {}", self.eta));
        }
        if !(self.omega_z > 0.0 && self.omega_z.is_finite()) {
            return invalid("omega_z", format!("must be > 0, got {}", self.omega_z));
        }
        if !(self.cycle_period > 0.0 && self.cycle_period.is_finite()) {
            return invalid("cycle_period", format!("must be > 0, got {}", self.cycle_period));
        }
        if !(self.gamma_h >= 0.0 && self.gamma_h.is_finite()) {
            return invalid("gamma_h", format!("must be >= 0, got {}", self.gamma_h));
        }
        if !self.trap_frequency_offset.is_finite() {
            return invalid("trap_frequency_offset", "must be finite".into());
        }
        for p in &self.pulses {
            if !(p.duration >= 0.0 && p.duration.is_finite()) {
                return invalid("duration", format!("{} pulse has duration {}", p.kind, p.duration));
            }
            if !(p.rabi.is_finite() && p.detuning.is_finite() && p.phase.is_finite()) {
                return invalid("pulse", format!("{} pulse has a non-finite field", p.kind));
            }
        }
        if let Some(d) = &self.continuous_drive {
            if !(d.omega.is_finite() && d.detuning.is_finite() && d.phase.is_finite()) {
                return invalid("continuous_drive", "non-finite field".into());
            }
        }
        let busy: f64 = self.groups().iter().map(|g| g.duration).sum();
        if busy > self.cycle_period * (1.0 + 1e-9) {
            return invalid(
                "pulses",
                format!("pulse time {busy:.6e} s exceeds the cycle period {:.6e} s", self.cycle_period),
            );
        }
        Ok(())
    }

    pub(crate) fn groups(&self) -> Vec<Group> {
        let mut groups: Vec<Group> = Vec::new();
        let mut start = 0.0;
        for p in &self.pulses {
            match groups.last_mut() {
                Some(g) if p.with_previous => {
                    g.duration = g.duration.max(p.duration);
                    g.pulses.push(*p);
                }
                _ => {
                    if let Some(g) = groups.last() {
                        start = g.start + g.duration;
                    }
                    groups.push(Group { start, duration: p.duration, pulses: vec![*p] });
                }
            }
        }
        groups
    }

    /// Builds the cycle squeeze → pump (bsb) → loss (rsb) → two-phonon loss
    /// (2rsb) → spin reset → idle, with Rabi rates chosen so the effective
    /// rates equal those of `params`. Every sideband pulse is followed by an
    /// instantaneous spin reset, so each channel starts from |↓⟩; the reset
    /// block of length `times.reset` closes the cycle.
    ///
    /// A channel only appears when its pulse time is positive; rates of
    /// channels without pulse time are not realised.
    pub fn from_params(params: &VdpParams, times: &CycleTimes, n_cycles: usize) -> Result<Self> {
        params.validate()?;
        if times.idle() < -1e-12 * times.period {
            return Err(Error::InvalidParameter {
                name: "pulses",
                reason: format!("pulse times exceed the cycle period {:.6e} s", times.period),
            });
        }
        let t = times.period;
        let mut pulses = Vec::new();
        if params.omega2 != 0.0 && times.squeeze > 0.0 {
            pulses.push(
                Pulse::new(PulseKind::SqueezeEffective, params.omega2 * t / times.squeeze, times.squeeze)
                    .with_phase(params.theta + params.drive_phase),
            );
        }
        for (kind, rate, tau) in [
            (PulseKind::Bsb1, params.gamma1_plus, times.bsb),
            (PulseKind::Rsb1, params.gamma1_minus, times.rsb),
            (PulseKind::Rsb2, params.gamma2, times.rsb2),
        ] {
            if tau > 0.0 && rate > 0.0 {
                pulses.push(Pulse::new(kind, rabi_for_rate(rate, tau, t), tau));
                pulses.push(Pulse::spin_reset(0.0));
            }
        }
        if times.reset > 0.0 {
            pulses.push(Pulse::spin_reset(times.reset));
        }
        if times.idle() > 1e-12 * t {
            pulses.push(Pulse::idle(times.idle()));
        }
        let continuous_drive = (params.omega != 0.0 || params.delta != 0.0).then_some(ContinuousDrive {
            omega: params.omega,
            detuning: params.delta,
            phase: -params.drive_phase,
        });
        let schedule = Self {
            pulses,
            cycle_period: t,
            n_cycles,
            continuous_drive,
            gamma_h: params.gamma_h,
            tail_tolerance: params.trunc.tail_tolerance,
            ..Self::default()
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Same effective rates with every time scaled by `s`: Rabi rates of the
    /// dissipative sidebands go as s^{-1/2}, the cycle count as 1/s.
    pub fn scaled(&self, s: f64) -> Self {
        let pulses = self
            .pulses
            .iter()
            .map(|p| {
                let rabi = match p.kind {
                    PulseKind::Bsb1 | PulseKind::Rsb1 | PulseKind::Rsb2 => p.rabi / s.sqrt(),
                    _ => p.rabi,
                };
                Pulse { rabi, duration: p.duration * s, ..*p }
            })
            .collect();
        Self {
            pulses,
            cycle_period: self.cycle_period * s,
            n_cycles: (self.n_cycles as f64 / s).round() as usize,
            ..self.clone()
        }
    }

    pub fn total_time(&self) -> f64 {
        self.cycle_period * self.n_cycles as f64
    }

    /// Parameters of the master equation the schedule approximates.
    pub fn effective_params(&self, trunc: FockTruncation) -> VdpParams {
        let rates = effective_rates(self);
        let drive = self.continuous_drive.unwrap_or(ContinuousDrive { omega: 0.0, detuning: 0.0, phase: 0.0 });
        let drive_phase = -drive.phase;
        let squeeze_phase = self
            .pulses
            .iter()
            .find(|p| p.kind == PulseKind::SqueezeEffective || p.kind.is_squeeze_tone())
            .map_or(drive_phase, |p| p.phase);
        VdpParams {
            delta: drive.detuning,
            omega: drive.omega,
            omega2: rates.omega2_eff,
            theta: squeeze_phase - drive_phase,
            drive_phase,
            gamma1_plus: rates.gamma1_plus,
            gamma1_minus: rates.gamma1_minus,
            gamma2: rates.gamma2,
            gamma_h: self.gamma_h,
            trunc,
        }
    }
}

/// Trotter-limit rates: `γ = (Ω/2)² τ² / T` for each dissipative sideband and
/// `Ω₂ = Ω_sq τ / T` for squeezing (a set of simultaneous tones counts once).
pub fn effective_rates(schedule: &PulseSchedule) -> EffectiveRates {
    let t = schedule.cycle_period;
    let mut r = EffectiveRates::default();
    if !(t > 0.0) {
        return r;
    }
    for p in &schedule.pulses {
        let g = (0.5 * p.rabi).powi(2) * p.duration * p.duration / t;
        match p.kind {
            PulseKind::Bsb1 => r.gamma1_plus += g,
            PulseKind::Rsb1 => r.gamma1_minus += g,
            PulseKind::Rsb2 => r.gamma2 += g,
            PulseKind::SqueezeEffective => r.omega2_eff += p.rabi.abs() * p.duration / t,
            k if k.is_squeeze_tone() && !p.with_previous => r.omega2_eff += p.rabi.abs() * p.duration / t,
            _ => {}
        }
    }
    r
}

/// Rabi rate that yields the rate `gamma` from a pulse of length `tau` per
/// period `period`: `Ω = (2/τ)√(γT)`.
pub fn rabi_for_rate(gamma: f64, tau: f64, period: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    2.0 / tau * (gamma * period).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_from_rsb_pulse() {
        let s = PulseSchedule {
            pulses: vec![Pulse::new(PulseKind::Rsb1, 2.0, 0.01)],
            cycle_period: 0.1,
            ..Default::default()
        };
        let r = effective_rates(&s);
        assert!((r.gamma1_minus - 1e-3).abs() < 1e-15);
        assert_eq!(r.gamma1_plus, 0.0);
        assert_eq!(r.gamma2, 0.0);
    }

    #[test]
    fn rabi_inversion_round_trips() {
        let omega = rabi_for_rate(1110.0, 150e-6, 200e-6);
        assert!((omega - 6.28e3).abs() < 0.01 * 6.28e3, "{omega}");
        let s = PulseSchedule {
            pulses: vec![Pulse::new(PulseKind::Rsb2, omega, 150e-6)],
            cycle_period: 200e-6,
            ..Default::default()
        };
        assert!((effective_rates(&s).gamma2 - 1110.0).abs() < 1e-9 * 1110.0);
    }

    #[test]
    fn zero_length_pulse_has_no_rate() {
        let s = PulseSchedule {
            pulses: vec![Pulse::new(PulseKind::Bsb1, 1e4, 0.0)],
            cycle_period: 1e-4,
            ..Default::default()
        };
        assert_eq!(effective_rates(&s), EffectiveRates::default());
    }

    #[test]
    fn from_params_recovers_rates() {
        let p = VdpParams {
            omega: 1000.0,
            omega2: 200.0,
            theta: 0.3,
            drive_phase: 1.0,
            gamma1_plus: 500.0,
            gamma1_minus: 100.0,
            gamma2: 1500.0,
            gamma_h: 90.0,
            ..Default::default()
        };
        let times = CycleTimes { squeeze: 35e-6, bsb: 10e-6, rsb: 20e-6, rsb2: 150e-6, reset: 15e-6, period: 250e-6 };
        let s = PulseSchedule::from_params(&p, &times, 4).unwrap();
        let q = s.effective_params(p.trunc);
        for (a, b) in [
            (q.gamma1_plus, p.gamma1_plus),
            (q.gamma1_minus, p.gamma1_minus),
            (q.gamma2, p.gamma2),
            (q.omega2, p.omega2),
            (q.theta, p.theta),
            (q.drive_phase, p.drive_phase),
            (q.omega, p.omega),
        ] {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
        let last = s.pulses.last().unwrap();
        assert_eq!(last.kind, PulseKind::Idle);
        assert!((last.duration - 20e-6).abs() < 1e-15);
    }

    #[test]
    fn scaling_keeps_rates() {
        let p = VdpParams { gamma1_plus: 230.0, gamma2: 1310.0, ..Default::default() };
        let times = CycleTimes { bsb: 10e-6, rsb2: 150e-6, reset: 10e-6, period: 170e-6, ..Default::default() };
        let s = PulseSchedule::from_params(&p, &times, 24).unwrap();
        let h = s.scaled(0.5);
        assert_eq!(h.n_cycles, 48);
        let (a, b) = (effective_rates(&s), effective_rates(&h));
        assert!((a.gamma2 - b.gamma2).abs() < 1e-9 * a.gamma2);
        assert!((a.gamma1_plus - b.gamma1_plus).abs() < 1e-9 * a.gamma1_plus);
        assert!((h.total_time() - s.total_time()).abs() < 1e-15);
    }

    #[test]
    fn overfull_cycle_is_rejected() {
        let s = PulseSchedule {
            pulses: vec![Pulse::idle(2e-6), Pulse::spin_reset(2e-6)],
            cycle_period: 3e-6,
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = PulseSchedule {
            pulses: vec![Pulse::idle(2e-6), Pulse::spin_reset(2e-6).simultaneous()],
            cycle_period: 3e-6,
            ..Default::default()
        };
        s.validate().unwrap();
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PulseKind::ALL {
            assert_eq!(PulseKind::from_name(k.name()), Some(k));
        }
    }
}
