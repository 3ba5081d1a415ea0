//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qvdp_cli::config::{Engine, Mode};
use qvdp_cli::presets::{self, check_ratios, HEADLINE_QUOTES};
use qvdp_cli::runner::build_schedule;
use qvdp_cli::{arnold_tongue_summary, run, ExperimentConfig, ResultTable};
use qvdp_core::tomography::{wigner_polar, WignerGrid};
use qvdp_core::trotter::{effective_rates, run_schedule, Pulse, PulseKind, PulseSchedule, MAX_DT};
use qvdp_core::{evolve, fock_state, steady_state, FockTruncation, VdpParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset(name: &str) -> ExperimentConfig {
    presets::load(name).unwrap_or_else(|| panic!("missing preset {name}"))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn table(config: &ExperimentConfig) -> ResultTable {
    let table = run(config, workers()).expect("worker pool").table;
    if let Some(row) = table.rows.iter().find(|r| r.error.is_some()) {
        panic!("point {} failed: {}", row.point, row.error.as_deref().unwrap_or_default());
    }
    table
}

fn s_values(table: &ResultTable) -> Vec<f64> {
    table.rows.iter().map(|r| r.observables.expect("successful row").s).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let t = elapsed.as_secs_f64();
    (t <= limit_s, format!("{t:.1} s of {limit_s} s"))
}

fn limit_cycle(elapsed: impl Fn() -> Duration) -> Outcome {
    let t = table(&preset("fig2"));
    let last = t.rows.last().expect("rows");
    let obs = last.observables.expect("successful row");
    let radius = obs.ring_radius.expect("limit-cycle rows carry a ring radius");
    let (fast, time) = within(elapsed(), 30.0);
    let pass = (last.time_s - 4e-3).abs() < 1e-9 && obs.s <= 0.05 && (1.0..=1.7).contains(&radius) && fast;
    outcome(
        pass,
        format!(
            "t = {} s: S = {:.4}, ring radius {radius:.3}, r_c {:.3}; {time}",
            last.time_s,
            obs.s,
            obs.r_c.unwrap_or(f64::NAN)
        ),
    )
}

fn phase_locking(elapsed: impl Fn() -> Duration) -> Outcome {
    let config = preset("fig3b");
    let t = table(&config);
    let phases: Vec<f64> = t.rows.iter().filter_map(|r| r.observables.and_then(|o| o.mean_phase)).collect();
    let last = *phases.last().expect("phases");
    let offset = (last - PI / 2.0).abs();
    let steady = ExperimentConfig { mode: Mode::Steady, engine: Engine::Exact, ..config };
    let s = s_values(&table(&steady))[0];
    let (fast, time) = within(elapsed(), 30.0);
    outcome(
        offset <= 0.2 && s >= 0.5 && fast,
        format!("final mean phase {last:.4} (|offset| {offset:.4}), steady S = {s:.4}; {time}"),
    )
}

fn narrowing(elapsed: impl Fn() -> Duration) -> Outcome {
    let cv: Vec<f64> = s_values(&table(&preset("fig3c"))).iter().map(|s| 1.0 - s).collect();
    let strict = cv.windows(2).all(|w| w[1] < w[0]);
    let (fast, time) = within(elapsed(), 60.0);
    outcome(strict && fast, format!("circular variance {}; {time}", fmt(&cv)))
}

fn arnold_tongue(elapsed: impl Fn() -> Duration) -> Outcome {
    let g = arnold_tongue_summary(&table(&preset("fig3d")), 0.5).expect("complete grid");
    let j0 = g.resonant_column().expect("resonant column");
    let resonant = g.column(j0);
    let increasing = resonant.windows(2).all(|w| w[1] > w[0]);
    let mut monotone = true;
    let mut asym: f64 = 0.0;
    for row in &g.s {
        for k in 0..j0 {
            let (left, right) = (row[j0 - k], row[j0 + k]);
            let (outer_l, outer_r) = (row[j0 - k - 1], row[j0 + k + 1]);
            monotone &= outer_l <= left + 1e-3 && outer_r <= right + 1e-3;
        }
        for k in 1..=j0 {
            asym = asym.max((row[j0 - k] - row[j0 + k]).abs());
        }
    }
    let (fast, time) = within(elapsed(), 120.0);
    outcome(
        increasing && monotone && asym <= 1e-6 && fast,
        format!("S(Δ = 0) {}, monotone in |Δ|: {monotone}, max asymmetry {asym:.1e}; {time}", fmt(&resonant)),
    )
}

fn dissipation_boost(elapsed: impl Fn() -> Duration) -> Outcome {
    let deep = s_values(&table(&preset("fig4a_deep")));
    let quantum = s_values(&table(&preset("fig4a_quantum")));
    let semiclassical = s_values(&table(&preset("fig4a_semiclassical")));
    let max_deep = deep.iter().copied().fold(f64::MIN, f64::max);
    let boost = max_deep > deep[0];
    let non_increasing = |s: &[f64]| s.windows(2).all(|w| w[1] <= w[0] + 1e-3);
    let stronger = quantum.iter().zip(&deep).all(|(q, d)| q > d);
    let (fast, time) = within(elapsed(), 180.0);
    outcome(
        boost && non_increasing(&quantum) && non_increasing(&semiclassical) && stronger && fast,
        format!(
            "deep {} (max {max_deep:.4} vs baseline {:.4}), quantum {}, semiclassical {}; {time}",
            fmt(&deep),
            deep[0],
            fmt(&quantum),
            fmt(&semiclassical)
        ),
    )
}

/// Grid value nearest to the Cartesian point `(x, y)`.
fn nearest(w: &WignerGrid, x: f64, y: f64) -> f64 {
    let dr = w.r_axis[1] - w.r_axis[0];
    let dphi = w.phi_axis[1] - w.phi_axis[0];
    let i = ((x.hypot(y) - w.r_axis[0]) / dr).round() as usize;
    let j = ((y.atan2(x).rem_euclid(2.0 * PI) - w.phi_axis[0]) / dphi).round() as usize % w.n_phi();
    w.value(i.min(w.n_r() - 1), j)
}

/// Lobes of `w`: local maxima above half-peak, merged when closer than 0.1.
/// Returns the two highest lobes `((x, y, value), ...)`, if there are two.
fn two_lobes(w: &WignerGrid) -> Option<[(f64, f64, f64); 2]> {
    let peak = w.argmax().2;
    let mut maxima: Vec<(f64, f64, f64)> = w
        .local_maxima(0.5 * peak)
        .into_iter()
        .map(|(i, j, v)| {
            let (r, phi) = (w.r_axis[i], w.phi_axis[j]);
            (r * phi.cos(), r * phi.sin(), v)
        })
        .collect();
    maxima.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut lobes: Vec<(f64, f64, f64)> = Vec::new();
    for m in maxima {
        if lobes.iter().all(|l| (l.0 - m.0).hypot(l.1 - m.1) >= 0.1) {
            lobes.push(m);
        }
    }
    (lobes.len() >= 2).then(|| [lobes[0], lobes[1]])
}

fn squeezing(elapsed: impl Fn() -> Duration) -> Outcome {
    let config = preset("fig4bc");
    let t = table(&config);
    let s_at = |omega2: f64, theta: f64| {
        t.rows.iter().find(|r| r.coords == [omega2, theta]).and_then(|r| r.observables).expect("grid point").s
    };
    let s0 = s_at(0.0, 0.0);
    let perpendicular = s_at(32.0, 0.0);
    let parallel = s_at(32.0, PI / 2.0);

    // Lobes are resolved on a finer grid than the run default.
    let point = config.sweep_points().into_iter().find(|p| p.coords == [63.0, PI / 2.0]).expect("grid point");
    let (params, _) = config.resolve(&point);
    let w = wigner_polar(&steady_state(&params).expect("steady state"), 2.0, 401, 720).expect("wigner grid");
    let (bistable, lobe_detail) = match two_lobes(&w) {
        Some([a, b]) => {
            let separation = (a.0 - b.0).hypot(a.1 - b.1);
            let saddle = (0..=200)
                .map(|k| {
                    let f = k as f64 / 200.0;
                    nearest(&w, a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
                })
                .fold(f64::INFINITY, f64::min);
            let prominence = a.2.min(b.2) - saddle;
            // Separated by more than the vacuum width, with a dip in between.
            (
                separation > 0.5 && prominence > 0.0,
                format!("lobe separation {separation:.3}, saddle prominence {:.2}% of peak", 100.0 * prominence / a.2),
            )
        }
        None => (false, "single lobe".to_string()),
    };
    let (fast, time) = within(elapsed(), 60.0);
    outcome(
        perpendicular > s0 && parallel < s0 && bistable && fast,
        format!("S(0) {s0:.4}, perpendicular {perpendicular:.4}, parallel {parallel:.4}; 63 Hz parallel: {lobe_detail}; {time}"),
    )
}

fn deep_quantum(_: impl Fn() -> Duration) -> Outcome {
    let p = VdpParams { gamma1_plus: 1.0, gamma2: 1e4, ..Default::default() };
    let pops = steady_state(&p).expect("steady state").populations();
    let err = (pops[0] - 2.0 / 3.0).abs().max((pops[1] - 1.0 / 3.0).abs());
    outcome(err <= 1e-3, format!("populations ({:.6}, {:.6}), max error {err:.1e}", pops[0], pops[1]))
}

fn trotter_equivalence(elapsed: impl Fn() -> Duration) -> Outcome {
    let config = preset("fig3b");
    let spec = config.schedule.expect("fig3b has a schedule");
    let n_cycles = config.sample_times.iter().map(|t| (t / spec.times.period).round() as usize).max().unwrap_or(0);
    let base = build_schedule(&config.params, &spec, Engine::TrotterRwa, n_cycles).expect("schedule");
    let trunc = config.params.trunc;
    let rho0 = config.initial_state.build(&trunc).expect("initial state");
    let distances = |s: &PulseSchedule| -> Vec<f64> {
        let trotter = run_schedule(&rho0, s, MAX_DT).expect("trotter run");
        let exact =
            evolve(&rho0, &s.effective_params(trunc), s.total_time(), MAX_DT, &trotter.times).expect("exact run");
        trotter.states.iter().zip(&exact.states).map(|(a, b)| a.trace_distance(b).expect("same truncation")).collect()
    };
    let d = distances(&base);
    let (worst_k, worst) = d.iter().copied().enumerate().fold((0, 0.0), |b, (k, v)| if v > b.1 { (k, v) } else { b });
    let terminal: Vec<f64> =
        [1.0, 0.5, 0.25].iter().map(|&s| *distances(&base.scaled(s)).last().expect("boundaries")).collect();
    let monotone = terminal.windows(2).all(|w| w[1] < w[0]);
    let (fast, time) = within(elapsed(), 120.0);
    outcome(
        worst <= 0.05 && monotone && fast,
        format!(
            "max trace distance {worst:.4} at cycle {worst_k}, terminal distance for T, T/2, T/4 {}; {time}",
            fmt(&terminal)
        ),
    )
}

fn single_decay(_: impl Fn() -> Duration) -> Outcome {
    let trunc = FockTruncation::new(6).expect("truncation");
    let rho0 = fock_state(&trunc, 1).expect("fock state");
    let (tau, period) = (10e-6, 50e-6);
    let mut worst: f64 = 0.0;
    for area in [0.05, 0.1, 0.2] {
        let schedule = PulseSchedule {
            pulses: vec![Pulse::new(PulseKind::Rsb1, area / tau, tau), Pulse::spin_reset(5e-6)],
            cycle_period: period,
            n_cycles: 200,
            ..Default::default()
        };
        let gamma = effective_rates(&schedule).gamma1_minus;
        let traj = run_schedule(&rho0, &schedule, MAX_DT).expect("trotter run");
        for (k, state) in traj.states.iter().enumerate() {
            let oracle = (-gamma * k as f64 * period).exp();
            worst = worst.max((state.populations()[1] / oracle - 1.0).abs());
        }
    }
    outcome(
        worst <= 0.01,
        format!("max relative deviation {:.3}% over 200 cycles, Ω τ ∈ {{0.05, 0.1, 0.2}}", 100.0 * worst),
    )
}

fn units(_: impl Fn() -> Duration) -> Outcome {
    let checks = check_ratios(&HEADLINE_QUOTES);
    let worst = checks.iter().map(|c| c.relative_error()).fold(0.0, f64::max);
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.passes())
        .map(|c| format!("{} {} = {:.3} vs {}", c.quote.preset, c.quote.ratio.label(), c.derived, c.quote.quoted))
        .collect();
    outcome(
        failing.is_empty(),
        format!("{} ratios, max relative error {:.2}% {}", checks.len(), 100.0 * worst, failing.join("; ")),
    )
}

type Criterion = fn(&dyn Fn() -> Duration) -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("limit cycle", |e| limit_cycle(e)),
        ("phase locking", |e| phase_locking(e)),
        ("phase-distribution narrowing", |e| narrowing(e)),
        ("arnold tongue", |e| arnold_tongue(e)),
        ("dissipation boost", |e| dissipation_boost(e)),
        ("squeezing", |e| squeezing(e)),
        ("deep-quantum fixed point", |e| deep_quantum(e)),
        ("trotter-exact equivalence", |e| trotter_equivalence(e)),
        ("single-decay oracle", |e| single_decay(e)),
        ("units self-test", |e| units(e)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(|| check(&|| start.elapsed()));
        let o = result.unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += usize::from(!o.pass);
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
