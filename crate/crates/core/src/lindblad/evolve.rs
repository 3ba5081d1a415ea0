use crate::error::{Error, Result};
use crate::integrate::{step_count, Generator, Rk4};
use crate::lindblad::{master_equation, VdpParams};
use crate::operator::hermitize;
use crate::state::DensityMatrix;

/// Default exact-ME time step (s).
pub const DEFAULT_DT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub params: VdpParams,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Maximum |Tr ρ − 1| tolerated over the run.
    pub max_trace_drift: f64,
    /// Check the Fock tail at every sample.
    pub check_tail: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { max_trace_drift: 1e-6, check_tail: true }
    }
}

/// Fixed-step RK4 integration of the master equation, sampled at
/// `sample_times`. A sample at t = 0 is inserted when missing.
pub fn evolve(
    rho0: &DensityMatrix,
    params: &VdpParams,
    t_end: f64,
    dt: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    evolve_with_options(rho0, params, t_end, dt, sample_times, EvolveOptions::default())
}

pub fn evolve_with_options(
    rho0: &DensityMatrix,
    params: &VdpParams,
    t_end: f64,
    dt: f64,
    sample_times: &[f64],
    options: EvolveOptions,
) -> Result<Trajectory> {
    params.validate()?;
    let space = params.trunc.space();
    if rho0.space() != space {
        return Err(Error::WrongSpace { expected: space.to_string(), found: rho0.space().to_string() });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("must be > 0, got {dt}") });
    }
    let times = normalize_sample_times(sample_times, t_end)?;

    let me = master_equation(params);
    let mut rho = rho0.matrix().clone();
    let mut rk = Rk4::new(me.dim());
    let mut states = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in &times {
        advance(&me, &mut rk, &mut rho, &mut t, target, dt, options.max_trace_drift)?;
        let state = DensityMatrix::from_matrix_unchecked(space, rho.clone());
        if options.check_tail {
            state.check_tail(params.trunc.tail_tolerance)?;
        }
        states.push(state);
    }
    Ok(Trajectory { times, states, params: *params })
}

pub(crate) fn normalize_sample_times(sample_times: &[f64], t_end: f64) -> Result<Vec<f64>> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter { name: "t_end", reason: format!("must be >= 0, got {t_end}") });
    }
    let mut times = vec![0.0];
    for (k, &s) in sample_times.iter().enumerate() {
        if !(0.0..=t_end * (1.0 + 1e-12)).contains(&s) {
            return Err(Error::InvalidParameter { name: "sample_times", reason: format!("{s} outside [0, {t_end}]") });
        }
        if k == 0 && s == 0.0 {
            continue;
        }
        if s <= times[times.len() - 1] {
            return Err(Error::InvalidParameter { name: "sample_times", reason: "must be strictly increasing".into() });
        }
        times.push(s);
    }
    Ok(times)
}

/// Integrates `rho` from `*t` to `target` in equal steps no longer than `dt`,
/// re-Hermitizing after every step.
pub(crate) fn advance<G: Generator + ?Sized>(
    g: &G,
    rk: &mut Rk4,
    rho: &mut crate::operator::CMatrix,
    t: &mut f64,
    target: f64,
    dt: f64,
    max_drift: f64,
) -> Result<()> {
    let span = target - *t;
    let steps = step_count(span, dt);
    if steps == 0 {
        return Ok(());
    }
    let h = span / steps as f64;
    let start = *t;
    for k in 0..steps {
        let tk = start + k as f64 * h;
        rk.step(g, tk, h, rho);
        hermitize(rho);
        let drift = (rho.trace().re - 1.0).abs();
        if !(drift <= max_drift) {
            return Err(Error::TraceDrift { drift, time: tk + h });
        }
    }
    *t = target;
    Ok(())
}
