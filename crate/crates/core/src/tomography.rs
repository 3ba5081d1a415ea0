//! Phase-space observables: polar Wigner functions, phase distributions and
//! the mean resultant length S used as the synchronization measure.
//!
//! The Wigner function is evaluated as `W(α) = (2/π) Tr[ρ D(2α) P]` with
//! `P = (−1)^{a†a}`, which follows from `D(α) P D†(α) = D(2α) P`. Only the
//! matrix elements of `D(2α)` inside the support of ρ enter, so the values
//! are exact for the truncated state and no enlarged space is needed.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, displacement_matrix};
use crate::operator::{Space, C64, ZERO};
use crate::state::{trace_of_product, DensityMatrix};

pub const DEFAULT_R_MAX: f64 = 4.0;
pub const DEFAULT_N_R: usize = 60;
pub const DEFAULT_N_PHI: usize = 120;

/// Mean phase is reported only above this S.
pub const MEAN_PHASE_THRESHOLD: f64 = 1e-6;

/// Wigner function sampled on a polar grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    /// Radii from 0 to `r_max` inclusive.
    pub r_axis: Vec<f64>,
    /// Uniform angles `2πk/n_phi`.
    pub phi_axis: Vec<f64>,
    /// Row-major `values[i_r * n_phi + i_phi]`.
    pub values: Vec<f64>,
    /// Largest imaginary part discarded while evaluating the trace.
    pub max_imag: f64,
    /// Number of Fock levels of the source state.
    pub levels: usize,
}

impl WignerGrid {
    pub fn n_r(&self) -> usize {
        self.r_axis.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_axis.len()
    }

    pub fn r_max(&self) -> f64 {
        *self.r_axis.last().unwrap_or(&0.0)
    }

    pub fn value(&self, i_r: usize, i_phi: usize) -> f64 {
        self.values[i_r * self.n_phi() + i_phi]
    }

    pub fn row(&self, i_r: usize) -> &[f64] {
        let n = self.n_phi();
        &self.values[i_r * n..(i_r + 1) * n]
    }

    /// `∫∫ W r dr dφ` (trapezoid in r, periodic rectangle rule in φ).
    pub fn total_mass(&self) -> f64 {
        let dphi = TAU / self.n_phi() as f64;
        let radial: Vec<f64> = (0..self.n_r()).map(|i| self.row(i).iter().sum::<f64>() * dphi).collect();
        trapezoid_weighted(&self.r_axis, &radial)
    }

    /// True when the grid captures the state's mass to within 0.01.
    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 0.01
    }

    /// Raised when `r_max²` reaches the number of Fock levels, i.e. the grid
    /// extends into the region the truncated state cannot resolve.
    pub fn truncation_warning(&self) -> bool {
        self.r_max() * self.r_max() >= self.levels as f64
    }

    /// Global maximum as `(i_r, i_phi, value)`.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let n_phi = self.n_phi();
        let (k, v) = self.values.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |best, (k, v)| {
            if v > best.1 {
                (k, v)
            } else {
                best
            }
        });
        (k / n_phi, k % n_phi, v)
    }

    /// Strict local maxima (in r and periodic φ) above `threshold`, as
    /// `(i_r, i_phi, value)`. The origin row is treated as a single point.
    pub fn local_maxima(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let (n_r, n_phi) = (self.n_r(), self.n_phi());
        let mut out = Vec::new();
        for i in 0..n_r {
            for j in 0..n_phi {
                let v = self.value(i, j);
                if v <= threshold {
                    continue;
                }
                if i == 0 && j > 0 {
                    continue;
                }
                let neighbours: Vec<f64> = if i == 0 {
                    self.row(1).to_vec()
                } else {
                    let mut nb = Vec::with_capacity(8);
                    for di in [-1i64, 0, 1] {
                        for dj in [-1i64, 0, 1] {
                            let ii = i as i64 + di;
                            if (di == 0 && dj == 0) || ii >= n_r as i64 {
                                continue;
                            }
                            let jj = (j as i64 + dj).rem_euclid(n_phi as i64) as usize;
                            nb.push(self.value(ii as usize, jj));
                        }
                    }
                    nb
                };
                if neighbours.iter().all(|&u| v > u) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// Marginal phase distribution `P(φ) = ∫ W(r, φ) r dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDistribution {
    pub phi_axis: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseDistribution {
    /// `∫ P dφ` by the periodic rectangle rule.
    pub fn mass(&self) -> f64 {
        self.p.iter().sum::<f64>() * self.dphi()
    }

    pub fn dphi(&self) -> f64 {
        TAU / self.p.len() as f64
    }

    /// True when negative excursions exceed 5% of the peak.
    pub fn has_large_negativity(&self) -> bool {
        let max = self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.p.iter().copied().fold(f64::INFINITY, f64::min);
        min < 0.0 && -min > 0.05 * max
    }

    /// Circular variance `1 − S`.
    pub fn circular_variance(&self) -> f64 {
        1.0 - sync_measure(self).s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncMeasure {
    /// Mean resultant length in [0, 1].
    pub s: f64,
    /// `arg⟨e^{iφ}⟩` in (−π, π]; absent when S < 10⁻⁶.
    pub mean_phase: Option<f64>,
}

/// Polar Wigner function of a phonon state on `n_r` radii in `[0, r_max]`
/// and `n_phi` angles.
pub fn wigner_polar(rho: &DensityMatrix, r_max: f64, n_r: usize, n_phi: usize) -> Result<WignerGrid> {
    let levels = match rho.space() {
        Space::Phonon(n) => n,
        other => return Err(Error::WrongSpace { expected: "phonon(N)".into(), found: other.to_string() }),
    };
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidParameter { name: "r_max", reason: format!("must be > 0, got {r_max}") });
    }
    if n_r < 2 || n_phi < 4 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("need n_r >= 2 and n_phi >= 4, got {n_r} x {n_phi}"),
        });
    }
    let m = rho.matrix();
    let n = levels;
    let r_axis: Vec<f64> = (0..n_r).map(|i| r_max * i as f64 / (n_r - 1) as f64).collect();
    let phi_axis: Vec<f64> = (0..n_phi).map(|j| TAU * j as f64 / n_phi as f64).collect();
    // e^{i d φ_j} for d = 0..n-1; negative d uses the conjugate.
    let twiddle: Vec<Vec<C64>> =
        (0..n).map(|d| phi_axis.iter().map(|&phi| C64::from_polar(1.0, d as f64 * phi)).collect()).collect();

    let mut values = Vec::with_capacity(n_r * n_phi);
    let mut max_imag = 0.0_f64;
    // c_d for d = m − n ∈ (−N, N), stored at offset d + N − 1.
    let mut coeffs = vec![ZERO; 2 * n - 1];
    for &r in &r_axis {
        let d2 = displacement_matrix(n, C64::new(2.0 * r, 0.0));
        coeffs.fill(ZERO);
        for col in 0..n {
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            for row in 0..n {
                // ρ_{col,row} D(2r)_{row,col} (−1)^col, phase e^{i(row−col)φ}
                let d = row as isize - col as isize;
                coeffs[(d + n as isize - 1) as usize] += m[(col, row)] * d2[(row, col)] * sign;
            }
        }
        for j in 0..n_phi {
            let mut w = coeffs[n - 1];
            for d in 1..n {
                let t = twiddle[d][j];
                w += coeffs[n - 1 + d] * t + coeffs[n - 1 - d] * t.conj();
            }
            max_imag = max_imag.max(w.im.abs() * 2.0 / PI);
            values.push(w.re * 2.0 / PI);
        }
    }
    Ok(WignerGrid { r_axis, phi_axis, values, max_imag, levels })
}

/// Wigner function on the default grid (r_max = 4, 60 × 120).
pub fn wigner_polar_default(rho: &DensityMatrix) -> Result<WignerGrid> {
    wigner_polar(rho, DEFAULT_R_MAX, DEFAULT_N_R, DEFAULT_N_PHI)
}

pub fn phase_distribution(w: &WignerGrid) -> PhaseDistribution {
    let n_phi = w.n_phi();
    let p = (0..n_phi)
        .map(|j| {
            let column: Vec<f64> = (0..w.n_r()).map(|i| w.value(i, j)).collect();
            trapezoid_weighted(&w.r_axis, &column)
        })
        .collect();
    PhaseDistribution { phi_axis: w.phi_axis.clone(), p }
}

/// Mean resultant length `S = |∫ e^{iφ} P dφ|` and mean phase.
///
/// The first moment is divided by the captured mass so that probability
/// lost outside `r_max` does not bias S, and the result is clamped to
/// [0, 1] since Wigner negativity can push the raw ratio marginally above 1.
pub fn sync_measure(p: &PhaseDistribution) -> SyncMeasure {
    let dphi = p.dphi();
    let moment: C64 = p.phi_axis.iter().zip(&p.p).map(|(&phi, &v)| C64::from_polar(v * dphi, phi)).sum();
    let mass = p.mass();
    let s = if mass > 0.0 { (moment.norm() / mass).clamp(0.0, 1.0) } else { 0.0 };
    let mean_phase = (s >= MEAN_PHASE_THRESHOLD).then(|| moment.arg());
    SyncMeasure { s, mean_phase }
}

/// `Tr(ρ a)`.
pub fn mean_amplitude(rho: &DensityMatrix) -> Result<C64> {
    match rho.space() {
        Space::Phonon(n) => Ok(trace_of_product(rho.matrix(), &annihilation_matrix(n))),
        other => Err(Error::WrongSpace { expected: "phonon(N)".into(), found: other.to_string() }),
    }
}

/// `⟨a†a⟩`.
pub fn mean_occupation(rho: &DensityMatrix) -> Result<f64> {
    match rho.space() {
        Space::Phonon(_) => Ok(rho.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()),
        other => Err(Error::WrongSpace { expected: "phonon(N)".into(), found: other.to_string() }),
    }
}

/// Radius `2√((γ₁⁺ − γ₁⁻)/γ₂)` of the classical van der Pol limit cycle.
pub fn classical_limit_radius(gamma1_plus: f64, gamma1_minus: f64, gamma2: f64) -> Result<f64> {
    if !(gamma2 > 0.0) {
        return Err(Error::InvalidParameter { name: "gamma2", reason: format!("must be > 0, got {gamma2}") });
    }
    if gamma1_plus < gamma1_minus {
        return Err(Error::NoLimitCycle { plus: gamma1_plus, minus: gamma1_minus });
    }
    Ok(2.0 * ((gamma1_plus - gamma1_minus) / gamma2).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingRadius {
    pub radius: f64,
    /// S of the same grid; the radius is meaningful only for S ≤ 0.05.
    pub s: f64,
}

impl RingRadius {
    pub fn is_phase_symmetric(&self) -> bool {
        self.s <= 0.05
    }
}

/// Peak of the angle-averaged Wigner profile, refined by a parabola through
/// the grid maximum and its neighbours.
pub fn ring_radius(w: &WignerGrid) -> RingRadius {
    let profile: Vec<f64> = (0..w.n_r()).map(|i| w.row(i).iter().sum::<f64>() / w.n_phi() as f64).collect();
    let s = sync_measure(&phase_distribution(w)).s;
    let (k, _) =
        profile
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    let radius = if k == 0 || k + 1 == profile.len() {
        w.r_axis[k]
    } else {
        let (y0, y1, y2) = (profile[k - 1], profile[k], profile[k + 1]);
        let h = w.r_axis[k + 1] - w.r_axis[k];
        let denom = y0 - 2.0 * y1 + y2;
        let shift = if denom != 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
        w.r_axis[k] + shift.clamp(-0.5, 0.5) * h
    };
    RingRadius { radius, s }
}

/// `∫ f(r) r dr` by the trapezoid rule.
fn trapezoid_weighted(r: &[f64], f: &[f64]) -> f64 {
    r.windows(2).zip(f.windows(2)).map(|(rw, fw)| 0.5 * (rw[1] - rw[0]) * (fw[0] * rw[0] + fw[1] * rw[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, displaced_thermal_state, fock_state, vacuum, FockTruncation};
    use crate::operator::{CMatrix, Operator, ONE};
    use approx::assert_abs_diff_eq;

    fn trunc() -> FockTruncation {
        FockTruncation::default()
    }

    #[test]
    fn wigner_point_values() {
        let w = wigner_polar(&vacuum(&trunc()), 4.0, 41, 16).unwrap();
        assert_abs_diff_eq!(w.value(0, 0), 2.0 / PI, epsilon = 1e-12);
        // W_vac = (2/π) e^{−2r²}
        for i in [5, 10, 20] {
            let r = w.r_axis[i];
            assert_abs_diff_eq!(w.value(i, 3), 2.0 / PI * (-2.0 * r * r).exp(), epsilon = 1e-12);
        }
        let one = wigner_polar(&fock_state(&trunc(), 1).unwrap(), 4.0, 41, 16).unwrap();
        assert_abs_diff_eq!(one.value(0, 0), -2.0 / PI, epsilon = 1e-12);
    }

    #[test]
    fn coherent_state_matches_gaussian() {
        let alpha = C64::new(0.6, -0.8);
        let rho = coherent_state(&trunc(), alpha).unwrap();
        let w = wigner_polar(&rho, 4.0, 33, 24).unwrap();
        for i in 0..w.n_r() {
            for j in 0..w.n_phi() {
                let beta = C64::from_polar(w.r_axis[i], w.phi_axis[j]);
                let exact = 2.0 / PI * (-2.0 * (beta - alpha).norm_sqr()).exp();
                assert!((w.value(i, j) - exact).abs() < 1e-10);
            }
        }
        assert!(w.max_imag < 1e-12);
    }

    #[test]
    fn coherent_argmax_lands_on_alpha() {
        let rho = coherent_state(&trunc(), ONE).unwrap();
        let w = wigner_polar_default(&rho).unwrap();
        let (i, j, _) = w.argmax();
        let dr = w.r_axis[1];
        assert!((w.r_axis[i] - 1.0).abs() <= dr);
        assert!(j == 0 || j == w.n_phi() - 1);
    }

    #[test]
    fn phase_distribution_examples() {
        let p = phase_distribution(&wigner_polar_default(&vacuum(&trunc())).unwrap());
        let (lo, hi) = p.p.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi - lo < 1e-12);
        let s = sync_measure(&p);
        assert!(s.s < 1e-4);
        assert!(s.mean_phase.is_none());
        // The trapezoid rule is O(h²) in r; the value needs a fine radial grid.
        let fine = phase_distribution(&wigner_polar(&vacuum(&trunc()), 4.0, 1201, 8).unwrap());
        for v in &fine.p {
            assert_abs_diff_eq!(*v, 1.0 / TAU, epsilon = 1e-6);
        }

        let w = wigner_polar_default(&coherent_state(&trunc(), C64::new(0.0, 1.0)).unwrap()).unwrap();
        let p = phase_distribution(&w);
        let (j, _) = p.p.iter().enumerate().fold((0, f64::MIN), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
        assert!((p.phi_axis[j] - PI / 2.0).abs() <= p.dphi() + 1e-12);
        assert_abs_diff_eq!(p.mass(), w.total_mass(), epsilon = 1e-10);
        assert!(w.is_normalized());
    }

    #[test]
    fn delta_like_distribution_is_fully_synchronized() {
        let n = 360;
        let phi_axis: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let mut p = vec![0.0; n];
        p[45] = 1.0 / (TAU / n as f64);
        let s = sync_measure(&PhaseDistribution { phi_axis: phi_axis.clone(), p });
        assert_abs_diff_eq!(s.s, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.mean_phase.unwrap(), phi_axis[45], epsilon = 1e-12);
    }

    #[test]
    fn sync_of_coherent_state_matches_cartesian_quadrature() {
        // Independent route: the analytic Gaussian Wigner function of |α⟩
        // integrated on a fine Cartesian grid, S = |∫∫ W e^{iφ} dx dy|.
        let alpha = ONE;
        let h = 0.01;
        let half = 4.0;
        let steps = (2.0 * half / h) as i64;
        let mut moment = C64::new(0.0, 0.0);
        let mut mass = 0.0;
        for ix in 0..=steps {
            for iy in 0..=steps {
                let x = -half + ix as f64 * h;
                let y = -half + iy as f64 * h;
                let r = x.hypot(y);
                if r > half {
                    continue;
                }
                let w = 2.0 / PI * (-2.0 * (C64::new(x, y) - alpha).norm_sqr()).exp() * h * h;
                mass += w;
                if r > 0.0 {
                    moment += C64::new(x / r, y / r) * w;
                }
            }
        }
        let oracle = moment.norm() / mass;

        let rho = coherent_state(&trunc(), alpha).unwrap();
        let s = sync_measure(&phase_distribution(&wigner_polar_default(&rho).unwrap()));
        assert!((s.s - oracle).abs() < 1e-3, "{} vs {oracle}", s.s);
        assert_abs_diff_eq!(s.mean_phase.unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rotation_shifts_the_phase_axis() {
        let rho = displaced_thermal_state(&trunc(), 0.4, C64::new(0.9, 0.5)).unwrap();
        let n_phi = 72;
        let k = 7;
        let chi = TAU * k as f64 / n_phi as f64;
        let n = rho.dim();
        // e^{iχa†a} maps |α⟩ to |αe^{iχ}⟩.
        let rot = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| C64::from_polar(1.0, chi * i as f64)));
        let rotated =
            DensityMatrix::new(Operator::new(rho.space(), &rot * rho.matrix() * rot.adjoint()).unwrap()).unwrap();
        let w0 = wigner_polar(&rho, 4.0, 30, n_phi).unwrap();
        let w1 = wigner_polar(&rotated, 4.0, 30, n_phi).unwrap();
        for i in 0..30 {
            for j in 0..n_phi {
                // W_rot(r, φ) = W(r, φ − χ)
                let src = (j + n_phi - k) % n_phi;
                assert!((w1.value(i, j) - w0.value(i, src)).abs() < 1e-8);
            }
        }
        let s0 = sync_measure(&phase_distribution(&w0));
        let s1 = sync_measure(&phase_distribution(&w1));
        assert_abs_diff_eq!(s0.s, s1.s, epsilon = 1e-10);
        let shift = (s1.mean_phase.unwrap() - s0.mean_phase.unwrap()).rem_euclid(TAU);
        assert_abs_diff_eq!(shift, chi, epsilon = 1e-9);
    }

    #[test]
    fn sync_increases_with_coherent_amplitude() {
        let mut last = -1.0;
        for k in 0..=10 {
            let a = 0.2 * k as f64;
            let rho = coherent_state(&trunc(), C64::new(a, 0.0)).unwrap();
            let s = sync_measure(&phase_distribution(&wigner_polar_default(&rho).unwrap())).s;
            assert!(s > last, "S({a}) = {s} after {last}");
            assert!((0.0..=1.0).contains(&s));
            last = s;
        }
    }

    #[test]
    fn classical_radius_examples() {
        // γ₂/(γ₁⁺ − γ₁⁻) = 0.56
        assert_abs_diff_eq!(classical_limit_radius(1.0, 0.0, 0.56).unwrap(), 2.0 / 0.56f64.sqrt(), epsilon = 1e-12);
        assert!((classical_limit_radius(1.0, 0.0, 0.56).unwrap() - 2.67).abs() < 0.01);
        assert_eq!(classical_limit_radius(3.0, 3.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(classical_limit_radius(5.0, 2.0, 3.0).unwrap(), 2.0, epsilon = 1e-15);
        assert!(matches!(classical_limit_radius(1.0, 2.0, 1.0), Err(Error::NoLimitCycle { .. })));
    }

    #[test]
    fn ring_radius_of_fock_one_matches_dense_profile() {
        let w = wigner_polar_default(&fock_state(&trunc(), 1).unwrap()).unwrap();
        // Dense radial oracle on W₁(r) = (2/π)(4r² − 1)e^{−2r²}.
        let (mut best_r, mut best) = (0.0, f64::MIN);
        for i in 0..=400_000 {
            let r = 4.0 * i as f64 / 400_000.0;
            let v = (4.0 * r * r - 1.0) * (-2.0 * r * r).exp();
            if v > best {
                best = v;
                best_r = r;
            }
        }
        let rr = ring_radius(&w);
        assert!((rr.radius - best_r).abs() < 5e-3, "{} vs {best_r}", rr.radius);
        assert!(rr.is_phase_symmetric());
        assert_eq!(ring_radius(&wigner_polar_default(&vacuum(&trunc())).unwrap()).radius, 0.0);
    }

    #[test]
    fn mean_amplitude_examples() {
        let alpha = C64::new(-0.4, 0.9);
        assert!((mean_amplitude(&coherent_state(&trunc(), alpha).unwrap()).unwrap() - alpha).norm() < 1e-9);
        assert_eq!(mean_amplitude(&fock_state(&trunc(), 3).unwrap()).unwrap(), ZERO);
        let dt = displaced_thermal_state(&trunc(), 1.5, ONE).unwrap();
        assert!((mean_amplitude(&dt).unwrap() - ONE).norm() < 1e-4);
    }

    #[test]
    fn grid_convergence_on_a_displaced_state() {
        let rho = displaced_thermal_state(&trunc(), 0.5, C64::new(0.7, 0.3)).unwrap();
        let coarse = sync_measure(&phase_distribution(&wigner_polar(&rho, 4.0, 60, 120).unwrap())).s;
        let fine = sync_measure(&phase_distribution(&wigner_polar(&rho, 4.0, 120, 240).unwrap())).s;
        assert!((coarse - fine).abs() < 1e-3);
    }

    #[test]
    fn local_maxima_of_cat_state() {
        // (|β⟩⟨β| + |−β⟩⟨−β|)/2 has two lobes on the real axis.
        let t = trunc();
        let a = coherent_state(&t, C64::new(1.5, 0.0)).unwrap();
        let b = coherent_state(&t, C64::new(-1.5, 0.0)).unwrap();
        let mix = (a.matrix() + b.matrix()) * C64::new(0.5, 0.0);
        let rho = DensityMatrix::new(Operator::new(t.space(), mix).unwrap()).unwrap();
        let w = wigner_polar_default(&rho).unwrap();
        let (_, _, peak) = w.argmax();
        assert_eq!(w.local_maxima(0.5 * peak).len(), 2);
        let single = wigner_polar_default(&a).unwrap();
        assert_eq!(single.local_maxima(0.5 * single.argmax().2).len(), 1);
    }
}
