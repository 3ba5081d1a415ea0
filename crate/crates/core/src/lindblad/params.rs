use crate::error::{Error, Result};
use crate::fock::FockTruncation;

/// Parameters of the driven van der Pol master equation.
///
/// Hamiltonian coefficients are angular frequencies (rad/s); dissipation
/// rates are plain s⁻¹.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdpParams {
    /// Detuning Δ of the drive from the oscillator (rad/s).
    pub delta: f64,
    /// Displacement drive strength Ω (rad/s).
    pub omega: f64,
    /// Squeezing amplitude Ω₂ (rad/s).
    pub omega2: f64,
    /// Relative phase θ between squeezing and displacement drives (rad).
    pub theta: f64,
    /// Phase-space direction χ of the displacement drive (rad). The drive
    /// term is `iΩ(a†e^{iχ} − a e^{−iχ})` and pushes ⟨a⟩ along `e^{iχ}`;
    /// the squeezing term is rotated along with it so θ stays relative.
    pub drive_phase: f64,
    /// One-particle pumping γ₁⁺ (s⁻¹).
    pub gamma1_plus: f64,
    /// One-particle loss γ₁⁻ (s⁻¹).
    pub gamma1_minus: f64,
    /// Two-particle loss γ₂ (s⁻¹).
    pub gamma2: f64,
    /// Motional heating γ_h (s⁻¹), applied as γ_h D[a†] + γ_h D[a].
    pub gamma_h: f64,
    pub trunc: FockTruncation,
}

impl Default for VdpParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            omega: 0.0,
            omega2: 0.0,
            theta: 0.0,
            drive_phase: 0.0,
            gamma1_plus: 0.0,
            gamma1_minus: 0.0,
            gamma2: 0.0,
            gamma_h: 0.0,
            trunc: FockTruncation::default(),
        }
    }
}

impl VdpParams {
    pub fn validate(&self) -> Result<()> {
        self.trunc.validate()?;
        let rates = [
            ("gamma1_plus", self.gamma1_plus),
            ("gamma1_minus", self.gamma1_minus),
            ("gamma2", self.gamma2),
            ("gamma_h", self.gamma_h),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("rate must be finite and >= 0, got {v}") });
            }
        }
        let coeffs = [
            ("delta", self.delta),
            ("omega", self.omega),
            ("omega2", self.omega2),
            ("theta", self.theta),
            ("drive_phase", self.drive_phase),
        ];
        for (name, v) in coeffs {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite, got {v}") });
            }
        }
        Ok(())
    }

    pub fn has_dissipation(&self) -> bool {
        self.gamma1_plus > 0.0 || self.gamma1_minus > 0.0 || self.gamma2 > 0.0 || self.gamma_h > 0.0
    }

    pub fn levels(&self) -> usize {
        self.trunc.n_max
    }
}
