//! Executes a config over its sweep grid.

use std::path::{Path, PathBuf};

use qvdp_core::tomography::{
    classical_limit_radius, mean_amplitude, mean_occupation, phase_distribution, ring_radius, sync_measure,
    wigner_polar, WignerGrid,
};
use qvdp_core::trotter::{run_schedule, Fidelity, PulseSchedule};
use qvdp_core::{evolve, steady_state, DensityMatrix, VdpParams};
use rayon::prelude::*;

use crate::config::{Engine, ExperimentConfig, InitialState, Mode, Scenario, ScheduleSpec, SweepPoint};
use crate::output::{wigner_to_text, Observables, OutputError, ResultRow, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot start {workers} workers: {reason}")]
    Workers { workers: usize, reason: String },
}

/// A Wigner grid with its relative file path and metadata lines.
pub type WignerDump = (String, WignerGrid, Vec<(String, String)>);

/// Rows plus the Wigner grids referenced by their `wigner_file` column.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub table: ResultTable,
    pub grids: Vec<WignerDump>,
}

impl RunOutput {
    /// Writes the CSV and Wigner files under `dir`; returns the CSV path.
    pub fn write(&self, dir: &Path, csv_name: &str) -> Result<PathBuf, OutputError> {
        std::fs::create_dir_all(dir)?;
        for (rel, grid, meta) in &self.grids {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, wigner_to_text(grid, meta))?;
        }
        let csv = dir.join(csv_name);
        self.table.write_csv(&csv)?;
        Ok(csv)
    }
}

/// Runs every sweep point on a pool of `workers` threads. Row order depends
/// only on the config: points in sorted coordinate order, then time.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<RunOutput, RunError> {
    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Workers { workers, reason: e.to_string() })?;
    let points = config.sweep_points();
    let results: Vec<Vec<RowResult>> = pool.install(|| points.par_iter().map(|p| run_point(config, p)).collect());

    let mut rows = Vec::new();
    let mut grids = Vec::new();
    for r in results.into_iter().flatten() {
        if let (Some(grid), Some(file)) = (r.grid, &r.row.wigner_file) {
            grids.push((file.clone(), grid, r.meta));
        }
        rows.push(r.row);
    }
    let table = ResultTable {
        axes: config.sweep.iter().map(|a| a.name.clone()).collect(),
        ring_columns: config.scenario == Scenario::LimitCycle,
        rows,
    };
    Ok(RunOutput { table, grids })
}

struct RowResult {
    row: ResultRow,
    grid: Option<WignerGrid>,
    meta: Vec<(String, String)>,
}

/// Times at which a point reports a state.
fn row_times(config: &ExperimentConfig) -> Vec<f64> {
    match (config.mode, config.engine, &config.schedule) {
        (Mode::Evolve, _, _) => config.sample_times.clone(),
        (Mode::Steady, engine, Some(s)) if engine.is_trotter() => vec![s.times.period * s.n_cycles as f64],
        (Mode::Steady, _, _) => vec![f64::INFINITY],
    }
}

fn run_point(config: &ExperimentConfig, point: &SweepPoint) -> Vec<RowResult> {
    let (params, initial) = config.resolve(point);
    let times = row_times(config);
    let error_rows = |msg: String| {
        times
            .iter()
            .map(|&time_s| RowResult {
                row: ResultRow {
                    point: point.index,
                    coords: point.coords.clone(),
                    time_s,
                    observables: None,
                    wigner_file: None,
                    error: Some(msg.clone()),
                },
                grid: None,
                meta: Vec::new(),
            })
            .collect()
    };
    let states = match states(config, &params, &initial) {
        Ok(s) => s,
        Err(e) => return error_rows(e.to_string()),
    };
    states
        .into_iter()
        .zip(&times)
        .enumerate()
        .map(|(k, (rho, &time_s))| {
            let mut row = ResultRow {
                point: point.index,
                coords: point.coords.clone(),
                time_s,
                observables: None,
                wigner_file: None,
                error: None,
            };
            let mut meta = Vec::new();
            let grid = match observe(config, &params, &rho) {
                Ok((obs, grid)) => {
                    row.observables = Some(obs);
                    if config.wigner.dump {
                        row.wigner_file = Some(format!("wigner/p{:04}_t{k:03}.txt", point.index));
                        meta.push(("point".to_string(), point.index.to_string()));
                        for (axis, c) in config.sweep.iter().zip(&point.coords) {
                            meta.push((axis.name.clone(), format!("{c}")));
                        }
                        meta.push(("time_s".to_string(), format!("{time_s}")));
                        if let Some(r_c) = obs.r_c {
                            meta.push(("r_c".to_string(), format!("{r_c}")));
                        }
                        if let Some(r) = obs.ring_radius {
                            meta.push(("ring_radius".to_string(), format!("{r}")));
                        }
                        Some(grid)
                    } else {
                        None
                    }
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    None
                }
            };
            RowResult { row, grid, meta }
        })
        .collect()
}

/// Phonon states at the row times of `config`.
fn states(
    config: &ExperimentConfig,
    params: &VdpParams,
    initial: &InitialState,
) -> qvdp_core::Result<Vec<DensityMatrix>> {
    let dt = config.dt();
    match (config.engine, config.mode) {
        (Engine::Exact, Mode::Steady) => Ok(vec![steady_state(params)?]),
        (Engine::Exact, Mode::Evolve) => {
            let rho0 = initial.build(&params.trunc)?;
            let t_end = config.sample_times.last().copied().unwrap_or(0.0);
            let traj = evolve(&rho0, params, t_end, dt, &config.sample_times)?;
            let skip = usize::from(config.sample_times.first() != Some(&0.0));
            Ok(traj.states.into_iter().skip(skip).collect())
        }
        (engine, mode) => {
            let spec = config.schedule.as_ref().expect("validated: trotter engines have a schedule");
            let rho0 = initial.build(&params.trunc)?;
            let period = spec.times.period;
            let n_cycles = match mode {
                Mode::Steady => spec.n_cycles,
                Mode::Evolve => config.sample_times.iter().map(|t| (t / period).round() as usize).max().unwrap_or(0),
            };
            let schedule = build_schedule(params, spec, engine, n_cycles)?;
            let mut traj = run_schedule(&rho0, &schedule, dt)?;
            match mode {
                Mode::Steady => Ok(vec![traj.states.pop().expect("trajectory starts with the initial state")]),
                Mode::Evolve => {
                    Ok(config.sample_times.iter().map(|t| traj.states[(t / period).round() as usize].clone()).collect())
                }
            }
        }
    }
}

/// Trotter program realizing `params` with the cycle layout of `spec`.
pub fn build_schedule(
    params: &VdpParams,
    spec: &ScheduleSpec,
    engine: Engine,
    n_cycles: usize,
) -> qvdp_core::Result<PulseSchedule> {
    let mut s = PulseSchedule::from_params(params, &spec.times, n_cycles)?;
    s.eta = spec.eta;
    s.omega_z = spec.omega_z;
    s.trap_frequency_offset = spec.trap_offset;
    s.stark_compensation = spec.stark_compensation;
    s.fidelity = match engine {
        Engine::TrotterFull => Fidelity::Full,
        _ => Fidelity::RotatingWave,
    };
    s.validate()?;
    Ok(s)
}

fn observe(
    config: &ExperimentConfig,
    params: &VdpParams,
    rho: &DensityMatrix,
) -> qvdp_core::Result<(Observables, WignerGrid)> {
    let w = &config.wigner;
    let grid = wigner_polar(rho, w.r_max, w.n_r, w.n_phi)?;
    let sync = sync_measure(&phase_distribution(&grid));
    let a = mean_amplitude(rho)?;
    let limit_cycle = config.scenario == Scenario::LimitCycle;
    let obs = Observables {
        s: sync.s,
        mean_phase: sync.mean_phase,
        re_a: a.re,
        im_a: a.im,
        n_mean: mean_occupation(rho)?,
        purity: rho.purity(),
        ring_radius: limit_cycle.then(|| ring_radius(&grid).radius),
        r_c: if limit_cycle {
            classical_limit_radius(params.gamma1_plus, params.gamma1_minus, params.gamma2).ok()
        } else {
            None
        },
    };
    Ok((obs, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config;

    const SMALL: &str = r#"
scenario = "custom"
mode = "steady"
n_max = 12

[params]
gamma1_plus_khz = 0.23
gamma1_minus_khz = 0.09
gamma2_khz = 1.31
drive_phase_rad = 1.5707963267948966

[[sweep]]
param = "omega_hz_over_2pi"
values = [0, 87, 173]

[wigner]
n_r = 20
n_phi = 24
"#;

    #[test]
    fn steady_rows_follow_the_sweep() {
        let config = load_config(SMALL).unwrap();
        let out = run(&config, 2).unwrap();
        let rows = &out.table.rows;
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.time_s.is_infinite() && r.error.is_none()));
        let s: Vec<f64> = rows.iter().map(|r| r.observables.unwrap().s).collect();
        assert!(s[0] < 1e-4 && s[0] < s[1] && s[1] < s[2], "{s:?}");
        assert!(out.grids.is_empty());
    }

    #[test]
    fn failed_points_keep_their_rows() {
        // Without dissipation the steady state is undefined.
        let text = SMALL
            .replace("gamma1_plus_khz = 0.23", "gamma1_plus_khz = 0")
            .replace("gamma1_minus_khz = 0.09", "gamma1_minus_khz = 0")
            .replace("gamma2_khz = 1.31", "gamma2_khz = 0");
        let out = run(&load_config(&text).unwrap(), 1).unwrap();
        assert_eq!(out.table.rows.len(), 3);
        assert!(out.table.all_failed());
    }

    #[test]
    fn wigner_dumps_are_named_per_row() {
        let text = SMALL.replace("n_phi = 24", "n_phi = 24\ndump = true");
        let out = run(&load_config(&text).unwrap(), 1).unwrap();
        let files: Vec<&str> = out.grids.iter().map(|g| g.0.as_str()).collect();
        assert_eq!(files, ["wigner/p0000_t000.txt", "wigner/p0001_t000.txt", "wigner/p0002_t000.txt"]);
        let meta = &out.grids[2].2;
        assert!(meta.contains(&("omega_hz_over_2pi".to_string(), "173".to_string())));
    }

    #[test]
    fn evolve_rows_match_sample_times() {
        let text = SMALL.replace("mode = \"steady\"", "mode = \"evolve\"\nsample_times_us = [100, 200]");
        let out = run(&load_config(&text).unwrap(), 1).unwrap();
        let times: Vec<f64> = out.table.rows.iter().map(|r| r.time_s).collect();
        assert_eq!(times, [1e-4, 2e-4, 1e-4, 2e-4, 1e-4, 2e-4]);
        // Vacuum start: the undriven point stays phase symmetric.
        assert!(out.table.rows[1].observables.unwrap().s < 1e-6);
    }
}
