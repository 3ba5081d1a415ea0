//! Built-in experiment presets.
//!
//! Each preset is a complete config document; `preset show` prints it
//! verbatim and `load_config` expands `preset = "<name>"` from it. Rates and
//! pulse times are the experimental ones; driven presets use drive phase
//! π/2, and squeezing angle θ = 0 is perpendicular to the drive.

use crate::config::{load_config, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub document: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        summary: "limit cycle from a displaced thermal state, undriven",
        document: r#"scenario = "limit_cycle"
sample_cycles = [0, 3, 10, 20]

[params]
gamma1_plus_khz = 2.06
gamma1_minus_khz = 0.09
gamma_h_khz = 0.09
gamma2_khz = 1.11
omega_hz_over_2pi = 0
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0

[initial_state]
kind = "displaced_thermal"
nbar = 1.5
alpha_re = 1.0

[schedule]
tau_bsb_us = 40
tau_rsb_us = 0
tau_2rsb_us = 150
tau_sq_us = 0
tau_reset_us = 10
tau_idle_us = 0
period_us = 200
n_cycles = 20

[wigner]
dump = true
"#,
    },
    Preset {
        name: "fig3a",
        summary: "entrainment of <a> from coherent states alpha = 0, i/2, i",
        document: r#"scenario = "entrainment"
sample_cycles = [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22]

[params]
gamma1_plus_khz = 0.28
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_khz = 1.48
omega_hz_over_2pi = 160
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[initial_state]
kind = "coherent"

[[sweep]]
param = "alpha_im"
values = [0.0, 0.5, 1.0]

[schedule]
tau_bsb_us = 10
tau_rsb_us = 0
tau_2rsb_us = 120
tau_sq_us = 0
tau_reset_us = 10
tau_idle_us = 10
period_us = 150
n_cycles = 22

[wigner]
dump = true
"#,
    },
    Preset {
        name: "fig3b",
        summary: "phase locking of the mean phase from coherent alpha = -1",
        document: r#"scenario = "phase_locking"
sample_cycles = [0, 2, 3, 4, 6, 9, 12, 15, 18, 20, 22, 24]

[params]
gamma1_plus_khz = 0.23
gamma1_minus_khz = 0.09
gamma_h_khz = 0.09
gamma2_khz = 1.31
omega_hz_over_2pi = 173
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[initial_state]
kind = "coherent"
alpha_re = -1.0

[schedule]
tau_bsb_us = 10
tau_rsb_us = 0
tau_2rsb_us = 150
tau_sq_us = 0
tau_reset_us = 10
tau_idle_us = 0
period_us = 170
n_cycles = 24
"#,
    },
    Preset {
        name: "fig3c",
        summary: "steady-state phase distribution versus drive strength",
        document: r#"scenario = "phase_distribution"

[params]
gamma1_plus_khz = 0.23
gamma1_minus_khz = 0.09
gamma_h_khz = 0.09
gamma2_khz = 1.31
omega_hz_over_2pi = 0
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "omega_hz_over_2pi"
values = [0, 17, 43, 87, 130, 173]

[schedule]
tau_bsb_us = 10
tau_rsb_us = 0
tau_2rsb_us = 150
tau_sq_us = 0
tau_reset_us = 10
tau_idle_us = 0
period_us = 170
n_cycles = 20

[wigner]
dump = true
"#,
    },
    Preset {
        name: "fig3d",
        summary: "Arnold tongue: steady S over drive strength and detuning",
        document: r#"scenario = "arnold_tongue"

[params]
gamma1_plus_khz = 0.28
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_khz = 1.48
omega_hz_over_2pi = 0
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "omega_hz_over_2pi"
values = [45, 91, 136, 181]

[[sweep]]
param = "delta_hz_over_2pi"
values = [-272, -136, 0, 136, 272]

[schedule]
tau_bsb_us = 10
tau_rsb_us = 0
tau_2rsb_us = 120
tau_sq_us = 0
tau_reset_us = 10
tau_idle_us = 10
period_us = 150
n_cycles = 48
"#,
    },
    Preset {
        name: "fig4a_quantum",
        summary: "steady S versus one-phonon loss, quantum regime",
        document: r#"scenario = "dissipation_boost"

[params]
gamma1_plus_khz = 0.16
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_khz = 0.22
omega_hz_over_2pi = 76
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "gamma1_minus_khz"
values = [0.12, 0.27, 0.74, 1.33, 2.12]

[schedule]
tau_bsb_us = 5
tau_rsb_us = 10
tau_2rsb_us = 50
tau_sq_us = 0
tau_reset_us = 15
tau_idle_us = 80
period_us = 160
n_cycles = 37
"#,
    },
    Preset {
        name: "fig4a_deep",
        summary: "steady S versus one-phonon loss, deep quantum regime",
        document: r#"scenario = "dissipation_boost"

[params]
gamma1_plus_khz = 0.16
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_khz = 1.25
omega_hz_over_2pi = 76
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "gamma1_minus_khz"
values = [0.12, 0.27, 0.74, 1.33, 2.12]

[schedule]
tau_bsb_us = 5
tau_rsb_us = 10
tau_2rsb_us = 120
tau_sq_us = 0
tau_reset_us = 15
tau_idle_us = 10
period_us = 160
n_cycles = 37
"#,
    },
    Preset {
        name: "fig4a_semiclassical",
        summary: "steady S versus one-phonon loss, semiclassical regime (exact engine, n_max = 120)",
        document: r#"scenario = "dissipation_boost"
n_max = 120

[params]
gamma1_plus_khz = 0.16
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_per_s = 9.6
omega_hz_over_2pi = 76
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "gamma1_minus_khz"
values = [0.12, 0.27, 0.74, 1.33, 2.12]

[wigner]
r_max = 8.0
n_r = 120
"#,
    },
    Preset {
        name: "fig4bc",
        summary: "steady S with squeezing perpendicular (theta = 0) and parallel (theta = pi/2) to the drive",
        document: r#"scenario = "squeezing_scan"

[params]
gamma1_plus_khz = 0.23
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_khz = 1.01
omega_hz_over_2pi = 43
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
theta_rad = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "omega2_hz_over_2pi"
values = [0, 32, 63]

[[sweep]]
param = "theta_rad"
values = [0, 1.5707963267948966]

[schedule]
tau_bsb_us = 10
tau_rsb_us = 0
tau_2rsb_us = 150
tau_sq_us = 35
tau_reset_us = 15
tau_idle_us = 10
period_us = 220
n_cycles = 20

[wigner]
dump = true
"#,
    },
    Preset {
        name: "figS2",
        summary: "steady S versus one-phonon loss in the quantum and deep quantum regimes",
        document: r#"scenario = "dissipation_boost"

[params]
gamma1_plus_khz = 0.16
gamma1_minus_khz = 0.12
gamma_h_khz = 0.12
gamma2_khz = 0.22
omega_hz_over_2pi = 76
omega2_hz_over_2pi = 0
delta_hz_over_2pi = 0
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "gamma2_khz"
values = [0.22, 1.25]

[[sweep]]
param = "gamma1_minus_khz"
values = [0.12, 0.27, 0.74, 1.33, 2.12]

[schedule]
tau_bsb_us = 5
tau_rsb_us = 10
tau_2rsb_us = 50
tau_sq_us = 0
tau_reset_us = 15
tau_idle_us = 80
period_us = 160
n_cycles = 37
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

/// Resolved config of a built-in preset.
pub fn load(name: &str) -> Option<ExperimentConfig> {
    find(name)?;
    Some(load_config(&format!("preset = \"{name}\"\n")).unwrap_or_else(|e| panic!("preset {name}: {e}")))
}

/// Dimensionless combination of the model rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ratio {
    /// Ω/γ₁⁺
    DriveToGain,
    /// γ₂/γ₁⁺
    TwoPhononToGain,
    /// γ₂/(γ₁⁺ − γ₁⁻)
    TwoPhononToNetGain,
    /// Ω₂/γ₁⁺
    SqueezeToGain,
}

impl Ratio {
    pub fn label(self) -> &'static str {
        match self {
            Ratio::DriveToGain => "omega/gamma1_plus",
            Ratio::TwoPhononToGain => "gamma2/gamma1_plus",
            Ratio::TwoPhononToNetGain => "gamma2/(gamma1_plus - gamma1_minus)",
            Ratio::SqueezeToGain => "omega2/gamma1_plus",
        }
    }

    pub fn eval(self, p: &qvdp_core::VdpParams) -> f64 {
        match self {
            Ratio::DriveToGain => p.omega / p.gamma1_plus,
            Ratio::TwoPhononToGain => p.gamma2 / p.gamma1_plus,
            Ratio::TwoPhononToNetGain => p.gamma2 / (p.gamma1_plus - p.gamma1_minus),
            Ratio::SqueezeToGain => p.omega2 / p.gamma1_plus,
        }
    }
}

/// A dimensionless ratio as quoted in the literature for a preset, optionally
/// at one value of the preset's first sweep axis (config units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quote {
    pub preset: &'static str,
    pub ratio: Ratio,
    pub quoted: f64,
    pub at: Option<f64>,
}

const fn quote(preset: &'static str, ratio: Ratio, quoted: f64) -> Quote {
    Quote { preset, ratio, quoted, at: None }
}

const fn quote_at(preset: &'static str, ratio: Ratio, quoted: f64, at: f64) -> Quote {
    Quote { preset, ratio, quoted, at: Some(at) }
}

/// The eight headline ratios of the figure captions.
pub const HEADLINE_QUOTES: [Quote; 8] = [
    quote("fig3a", Ratio::DriveToGain, 3.5),
    quote("fig3b", Ratio::DriveToGain, 4.7),
    quote("fig3b", Ratio::TwoPhononToGain, 5.7),
    quote("fig3a", Ratio::TwoPhononToGain, 5.2),
    quote("fig4a_deep", Ratio::TwoPhononToGain, 7.9),
    quote("fig4bc", Ratio::TwoPhononToGain, 4.4),
    quote("fig4bc", Ratio::DriveToGain, 1.2),
    quote("fig2", Ratio::TwoPhononToNetGain, 0.56),
];

/// Further quoted ratios the presets reproduce.
pub const OTHER_QUOTES: [Quote; 12] = [
    quote("fig4a_quantum", Ratio::TwoPhononToGain, 1.4),
    quote("fig4a_quantum", Ratio::DriveToGain, 3.0),
    quote("fig4a_deep", Ratio::DriveToGain, 3.0),
    quote("fig4a_semiclassical", Ratio::TwoPhononToGain, 0.06),
    quote("fig3c", Ratio::TwoPhononToGain, 5.7),
    quote_at("fig3c", Ratio::DriveToGain, 0.0, 0.0),
    quote_at("fig3c", Ratio::DriveToGain, 0.47, 17.0),
    quote_at("fig3c", Ratio::DriveToGain, 1.2, 43.0),
    quote_at("fig3c", Ratio::DriveToGain, 2.4, 87.0),
    quote_at("fig3c", Ratio::DriveToGain, 3.6, 130.0),
    quote_at("fig3c", Ratio::DriveToGain, 4.7, 173.0),
    quote_at("fig4bc", Ratio::SqueezeToGain, 1.7, 63.0),
];

/// Relative tolerance of the preset self-test.
pub const RATIO_TOLERANCE: f64 = 0.03;

#[derive(Clone, Debug, PartialEq)]
pub struct RatioCheck {
    pub quote: Quote,
    pub derived: f64,
}

impl RatioCheck {
    pub fn relative_error(&self) -> f64 {
        if self.quote.quoted == 0.0 {
            self.derived.abs()
        } else {
            (self.derived / self.quote.quoted - 1.0).abs()
        }
    }

    pub fn passes(&self) -> bool {
        self.relative_error() <= RATIO_TOLERANCE
    }
}

/// Evaluates each quote against its preset's resolved parameters.
pub fn check_ratios(quotes: &[Quote]) -> Vec<RatioCheck> {
    quotes
        .iter()
        .map(|q| {
            let config = load(q.preset).unwrap_or_else(|| panic!("no preset {}", q.preset));
            let mut params = config.params;
            if let (Some(v), Some(axis)) = (q.at, config.sweep.first()) {
                let mut state = config.initial_state;
                axis.param.apply(axis.scale.apply(v), &mut params, &mut state);
            }
            RatioCheck { quote: *q, derived: q.ratio.eval(&params) }
        })
        .collect()
}
