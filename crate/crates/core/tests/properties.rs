use proptest::prelude::*;

use orowan_core::exec::Execution;
use orowan_core::field::{Grid1D, ScalarField};
use orowan_core::layer::LayerProfile;
use orowan_core::nonlocal::lattice::{half_laplacian, Summation};
use orowan_core::nonlocal::{particle_sum_full, particle_sum_truncated, short_window_sum};
use orowan_core::numerics::{sup_distance, trapezoid_integral};
use orowan_core::particles::{ddd_rhs, reconstruct, ParticleSystem};

fn grid() -> Grid1D {
    Grid1D::new(0.0, 4.0, 64).unwrap()
}

fn field(values: Vec<f64>) -> ScalarField {
    ScalarField::new(grid(), values, 0.0, 0.0, None).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0_f64, 64)
}

/// Strictly increasing positions with gaps of at least 0.05.
fn positions(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (-3.0..3.0_f64, prop::collection::vec(0.05..1.0_f64, 1..max_len)).prop_map(|(start, gaps)| {
        let mut x = start;
        gaps.into_iter()
            .map(|g| {
                x += g;
                x
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn sup_distance_is_a_metric(a in values(), b in values(), c in values()) {
        let (a, b, c) = (field(a), field(b), field(c));
        let w = (-2.0, 2.0);
        let ab = sup_distance(&a, &b, w).unwrap();
        prop_assert_eq!(sup_distance(&a, &a, w).unwrap(), 0.0);
        prop_assert_eq!(ab, sup_distance(&b, &a, w).unwrap());
        prop_assert!(ab <= sup_distance(&a, &c, w).unwrap() + sup_distance(&c, &b, w).unwrap() + 1e-12);
    }

    #[test]
    fn trapezoid_is_linear(a in values(), b in values(), s in -5.0..5.0_f64) {
        let combined: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let lhs = trapezoid_integral(&field(combined)).unwrap();
        let rhs = trapezoid_integral(&field(a)).unwrap() + s * trapezoid_integral(&field(b)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn half_laplacian_summations_agree(a in values()) {
        let f = field(a);
        let fft = half_laplacian(&f, Summation::Fft);
        let seq = half_laplacian(&f, Summation::Direct(Execution::Sequential));
        let par = half_laplacian(&f, Summation::Direct(Execution::Parallel));
        let scale = 1.0 + fft.max_abs();
        for ((x, y), z) in fft.values.iter().zip(&seq.values).zip(&par.values) {
            prop_assert!((x - y).abs() <= 1e-11 * scale);
            prop_assert_eq!(y, z);
        }
    }

    #[test]
    fn half_laplacian_ignores_added_constants(a in values(), c in -100.0..100.0_f64) {
        let f = field(a.clone());
        let shifted = ScalarField::new(grid(), a.iter().map(|v| v + c).collect(), c, c, None).unwrap();
        let d = sup_distance(&half_laplacian(&f, Summation::Fft), &half_laplacian(&shifted, Summation::Fft), (-4.0, 4.0)).unwrap();
        prop_assert!(d <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn ddd_velocities_sum_to_zero(y in positions(40), c0 in 0.1..10.0_f64) {
        let v = ddd_rhs(&y, c0).unwrap();
        let total: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum();
        prop_assert!(total.abs() <= 1e-12 * (1.0 + scale));
        // The outermost particles are pushed outwards.
        if y.len() > 1 {
            prop_assert!(v[0] < 0.0 && v[y.len() - 1] > 0.0);
        }
    }

    #[test]
    fn reconstruction_is_monotone(y in positions(20), eps in 0.05..0.5_f64) {
        let ps = ParticleSystem::from_positions(y, eps, 0.5, -3).unwrap();
        let lg = Grid1D::new(0.0, 40.0, 2048).unwrap();
        let layer = LayerProfile::from_fn(lg, |z| 0.5 + z.atan() / std::f64::consts::PI, 1.0).unwrap();
        let u = reconstruct(&ps, &layer, Grid1D::new(0.0, 6.0, 512).unwrap()).unwrap();
        prop_assert!(u.worst_monotonicity_violation() <= 1e-12);
        prop_assert!(u.min() >= ps.level(0) - eps - 1e-12);
    }

    #[test]
    fn window_split_reproduces_full_sum(y in positions(30), pick in 0usize..30, offset in 1e-4..0.02_f64, side in any::<bool>()) {
        let ps = ParticleSystem::from_positions(y, 0.01, 1.0, 0).unwrap();
        let x = ps.positions[pick % ps.len()] + if side { offset } else { -offset };
        let r = 0.1;
        let full = particle_sum_full(&ps, x).unwrap();
        let split = particle_sum_truncated(&ps, x, r) + short_window_sum(&ps, x, r);
        prop_assert!((full - split).abs() <= 1e-12 * (1.0 + full.abs()));
    }
}
