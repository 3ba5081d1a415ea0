use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qvdp_core::lindblad::liouvillian_apply;
use qvdp_core::tomography::{wigner_polar, DEFAULT_N_PHI, DEFAULT_N_R, DEFAULT_R_MAX};
use qvdp_core::{coherent_state, steady_state, FockTruncation, VdpParams, C64};

fn params() -> VdpParams {
    VdpParams {
        omega: 2.0 * PI * 173.0,
        drive_phase: PI / 2.0,
        gamma1_plus: 230.0,
        gamma1_minus: 90.0,
        gamma2: 1310.0,
        trunc: FockTruncation::new(30).unwrap(),
        ..Default::default()
    }
}

fn kernels(c: &mut Criterion) {
    let p = params();
    let rho = coherent_state(&p.trunc, C64::new(1.0, 0.5)).unwrap();
    c.bench_function("liouvillian_apply_n30", |b| {
        b.iter(|| liouvillian_apply(black_box(&p), black_box(&rho)).unwrap())
    });
    c.bench_function("steady_state_n30", |b| b.iter(|| steady_state(black_box(&p)).unwrap()));
    let steady = steady_state(&p).unwrap();
    c.bench_function("wigner_default_grid_n30", |b| {
        b.iter(|| wigner_polar(black_box(&steady), DEFAULT_R_MAX, DEFAULT_N_R, DEFAULT_N_PHI).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
