use proptest::prelude::*;
use qvdp_core::fock::displacement_matrix;
use qvdp_core::tomography::{phase_distribution, sync_measure, wigner_polar};
use qvdp_core::{displaced_thermal_state, tensor_with_spin, CMatrix, FockTruncation, Operator, Space, C64};

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex(), dim * dim).prop_map(move |v| CMatrix::from_vec(dim, dim, v))
}

fn alpha_within(radius: f64) -> impl Strategy<Value = C64> {
    (0.0..=radius, 0.0..std::f64::consts::TAU).prop_map(|(r, phi)| C64::from_polar(r, phi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensor_product_distributes_over_products(a in matrix(4), c in matrix(4), b in matrix(2), d in matrix(2)) {
        let op = |m: &CMatrix| Operator::new(Space::Phonon(4), m.clone()).unwrap();
        let sp = |m: &CMatrix| Operator::new(Space::Spin, m.clone()).unwrap();
        let lhs = tensor_with_spin(&op(&a), &sp(&b)).unwrap().compose(&tensor_with_spin(&op(&c), &sp(&d)).unwrap()).unwrap();
        let rhs = tensor_with_spin(&op(&(&a * &c)), &sp(&(&b * &d))).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-12);
        prop_assert_eq!(lhs.space(), Space::SpinPhonon(4));
    }

    #[test]
    fn displacement_inverts_on_low_levels(alpha in alpha_within(2.0)) {
        // Contracted over 64 levels; the exact elements leave no truncation
        // error on levels ≤ 15 at this size.
        let prod = displacement_matrix(64, alpha) * displacement_matrix(64, -alpha);
        for i in 0..=15 {
            for j in 0..=15 {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn displaced_thermal_is_a_valid_state(nbar in 0.0..=3.0f64, alpha in alpha_within(2.0)) {
        let rho = displaced_thermal_state(&FockTruncation::default(), nbar, alpha).unwrap();
        prop_assert!(rho.check().is_ok());
        prop_assert!((rho.op().trace().re - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn sync_measure_is_bounded(nbar in 0.0..=2.0f64, alpha in alpha_within(2.0)) {
        let rho = displaced_thermal_state(&FockTruncation::default(), nbar, alpha).unwrap();
        let s = sync_measure(&phase_distribution(&wigner_polar(&rho, 4.0, 40, 64).unwrap())).s;
        prop_assert!((0.0..=1.0).contains(&s));
    }

}
