//! Arnold-tongue summaries of drive-strength × detuning sweeps.

use crate::config::Param;
use crate::output::ResultTable;

pub const DEFAULT_ISO_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TongueError {
    #[error("table needs sweep axes for both drive strength (omega_*) and detuning (delta_*); found {0:?}")]
    MissingAxes(Vec<String>),
    #[error("incomplete grid: no successful row for (omega, delta) = {}", fmt_points(.0))]
    Incomplete(Vec<(f64, f64)>),
}

fn fmt_points(points: &[(f64, f64)]) -> String {
    points.iter().map(|(o, d)| format!("({o}, {d})")).collect::<Vec<_>>().join(", ")
}

/// S on the rectangular (Ω, Δ) grid plus its iso-contour.
#[derive(Clone, Debug, PartialEq)]
pub struct TongueGrid {
    /// Drive strengths in config units, ascending.
    pub omega: Vec<f64>,
    /// Detunings in config units, ascending.
    pub delta: Vec<f64>,
    /// `s[i][j]` at `omega[i]`, `delta[j]`.
    pub s: Vec<Vec<f64>>,
    pub level: f64,
    /// Points `(delta, omega)` where S crosses `level`, linearly interpolated
    /// along grid edges; sorted by omega, then delta.
    pub contour: Vec<(f64, f64)>,
}

impl TongueGrid {
    pub fn row(&self, i_omega: usize) -> &[f64] {
        &self.s[i_omega]
    }

    pub fn column(&self, j_delta: usize) -> Vec<f64> {
        self.s.iter().map(|r| r[j_delta]).collect()
    }

    /// Index of Δ = 0, if on the grid.
    pub fn resonant_column(&self) -> Option<usize> {
        self.delta.iter().position(|d| *d == 0.0)
    }
}

/// Builds the S grid from an arnold-tongue table. With several rows per
/// point (time-resolved runs) the latest one is used.
pub fn arnold_tongue_summary(table: &ResultTable, level: f64) -> Result<TongueGrid, TongueError> {
    let axis = |p: Param| table.axes.iter().position(|a| Param::from_key(a).map(|(q, _)| q) == Some(p));
    let (Some(io), Some(id)) = (axis(Param::Omega), axis(Param::Delta)) else {
        return Err(TongueError::MissingAxes(table.axes.clone()));
    };
    let sorted_unique = |k: usize| {
        let mut v: Vec<f64> = table.rows.iter().map(|r| r.coords[k]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let omega = sorted_unique(io);
    let delta = sorted_unique(id);
    let mut s = vec![vec![None::<(f64, f64)>; delta.len()]; omega.len()];
    for row in &table.rows {
        let Some(obs) = row.observables else { continue };
        let i = omega.iter().position(|o| *o == row.coords[io]).expect("value taken from rows");
        let j = delta.iter().position(|d| *d == row.coords[id]).expect("value taken from rows");
        if s[i][j].is_none_or(|(t, _)| row.time_s >= t) {
            s[i][j] = Some((row.time_s, obs.s));
        }
    }
    let mut missing = Vec::new();
    for (i, o) in omega.iter().enumerate() {
        for (j, d) in delta.iter().enumerate() {
            if s[i][j].is_none() {
                missing.push((*o, *d));
            }
        }
    }
    if !missing.is_empty() {
        return Err(TongueError::Incomplete(missing));
    }
    let s: Vec<Vec<f64>> =
        s.into_iter().map(|r| r.into_iter().map(|c| c.map(|(_, v)| v).unwrap_or_default()).collect()).collect();
    let contour = iso_contour(&omega, &delta, &s, level);
    Ok(TongueGrid { omega, delta, s, level, contour })
}

fn crossing(a: f64, b: f64, level: f64) -> Option<f64> {
    if (a - level) * (b - level) < 0.0 || a == level {
        Some(if a == b { 0.0 } else { (level - a) / (b - a) })
    } else {
        None
    }
}

fn iso_contour(omega: &[f64], delta: &[f64], s: &[Vec<f64>], level: f64) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for (i, o) in omega.iter().enumerate() {
        for j in 0..delta.len() {
            if j + 1 < delta.len() {
                if let Some(f) = crossing(s[i][j], s[i][j + 1], level) {
                    pts.push((delta[j] + f * (delta[j + 1] - delta[j]), *o));
                }
            } else if s[i][j] == level {
                pts.push((delta[j], *o));
            }
            if i + 1 < omega.len() {
                if let Some(f) = crossing(s[i][j], s[i + 1][j], level) {
                    pts.push((delta[j], o + f * (omega[i + 1] - o)));
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::{Observables, ResultRow};

    fn table(omega: &[f64], delta: &[f64], f: impl Fn(f64, f64) -> f64) -> ResultTable {
        let mut rows = Vec::new();
        for o in omega {
            for d in delta {
                rows.push(ResultRow {
                    point: rows.len(),
                    coords: vec![*o, *d],
                    time_s: f64::INFINITY,
                    observables: Some(Observables {
                        s: f(*o, *d),
                        mean_phase: None,
                        re_a: 0.0,
                        im_a: 0.0,
                        n_mean: 0.0,
                        purity: 1.0,
                        ring_radius: None,
                        r_c: None,
                    }),
                    wigner_file: None,
                    error: None,
                });
            }
        }
        ResultTable { axes: vec!["omega_hz_over_2pi".into(), "delta_hz_over_2pi".into()], ring_columns: false, rows }
    }

    #[test]
    fn grid_and_contour() {
        let t = table(&[1.0, 2.0], &[-1.0, 0.0, 1.0], |o, d| 0.4 * o - 0.3 * d.abs());
        let g = arnold_tongue_summary(&t, 0.6).unwrap();
        assert_eq!(g.omega, vec![1.0, 2.0]);
        assert_eq!(g.resonant_column(), Some(1));
        assert_eq!(g.column(1), vec![0.4, 0.8]);
        let near = |d: f64, o: f64| g.contour.iter().any(|p| (p.0 - d).abs() < 1e-12 && (p.1 - o).abs() < 1e-12);
        assert!(near(0.0, 1.5), "{:?}", g.contour);
        assert!(near(-2.0 / 3.0, 2.0) && near(2.0 / 3.0, 2.0), "{:?}", g.contour);
        assert_eq!(g.contour.len(), 3);
    }

    #[test]
    fn missing_points_are_listed() {
        let mut t = table(&[1.0, 2.0], &[0.0, 1.0], |_, _| 0.1);
        t.rows.remove(3);
        t.rows[0].observables = None;
        t.rows[0].error = Some("failed".into());
        match arnold_tongue_summary(&t, 0.5).unwrap_err() {
            TongueError::Incomplete(m) => assert_eq!(m, vec![(1.0, 0.0), (2.0, 1.0)]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn axes_are_required() {
        let mut t = table(&[1.0], &[0.0], |_, _| 0.1);
        t.axes[1] = "gamma2_khz".into();
        assert!(matches!(arnold_tongue_summary(&t, 0.5), Err(TongueError::MissingAxes(_))));
    }
}
