use eitmem_core::{
    derive_rates, make_flat_top, make_rising_exponential, mode_overlap, CavityGeometry, Complex64, TemporalMode,
    TimeGrid, Window,
};
use proptest::prelude::*;

fn geometry(t: f64, l: f64, tau: f64) -> CavityGeometry {
    CavityGeometry {
        mirror_transmission: t,
        round_trip_loss: l,
        round_trip_time: tau,
    }
}

proptest! {
    #[test]
    fn rates_linear_in_transmission_and_loss(
        t in 0.01f64..0.45,
        l in 0.0f64..0.45,
        tau in 1e-10f64..1e-6,
        s in 0.1f64..1.0,
    ) {
        let base = derive_rates(&geometry(t, l, tau)).unwrap();
        let scaled = derive_rates(&geometry(s * t, s * l, tau)).unwrap();
        prop_assert!((scaled.gamma1 - s * base.gamma1).abs() <= 1e-12 * base.gamma1);
        prop_assert!((scaled.gamma2 - s * base.gamma2).abs() <= 1e-12 * base.gamma1);

        let other = derive_rates(&geometry(t, 0.0, tau)).unwrap();
        let loss_only = derive_rates(&geometry(0.5, l, tau)).unwrap();
        prop_assert!((base.gamma1 - other.gamma1).abs() <= 1e-12 * base.gamma1);
        prop_assert!((base.gamma2 - loss_only.gamma2).abs() <= 1e-12 * base.gamma1);
        prop_assert_eq!(base.gamma, base.gamma1 + base.gamma2);
    }

    #[test]
    fn doubling_round_trip_halves_rates(t in 0.01f64..1.0, frac in 0.0f64..1.0, tau in 1e-10f64..1e-6) {
        let l = frac * (1.0 - t).min(0.99);
        let a = derive_rates(&geometry(t, l, tau)).unwrap();
        let b = derive_rates(&geometry(t, l, 2.0 * tau)).unwrap();
        prop_assert!((2.0 * b.gamma1 - a.gamma1).abs() <= 1e-12 * a.gamma1);
        prop_assert!((2.0 * b.gamma2 - a.gamma2).abs() <= 1e-12 * a.gamma1.max(a.gamma2));
    }

    #[test]
    fn rising_exponentials_have_unit_norm(rate in 0.05f64..50.0, cutoff_frac in 0.1f64..1.0, dt in 1e-3f64..2e-2) {
        let grid = TimeGrid::with_steps(0.0, dt, 1000).unwrap();
        let mode = make_rising_exponential(rate, cutoff_frac * grid.t_end(), grid).unwrap();
        prop_assert!((mode.norm_sqr() - 1.0).abs() < 1e-9);
        let peak = mode.samples().last().unwrap().norm();
        prop_assert!(mode.samples().iter().all(|z| z.norm() <= peak + 1e-12));
    }

    #[test]
    fn flat_tops_have_unit_norm(first in 0usize..400, len in 1usize..500) {
        let grid = TimeGrid::with_steps(0.0, 0.01, 1000).unwrap();
        let mode = make_flat_top(grid, Window::new(first, first + len)).unwrap();
        prop_assert!((mode.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalized_arbitrary_modes_have_unit_norm(
        samples in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..200),
        offset in 0usize..50,
    ) {
        prop_assume!(samples.iter().any(|&(re, im)| re.abs() + im.abs() > 1e-3));
        let grid = TimeGrid::with_steps(0.0, 0.01, 300).unwrap();
        let samples = samples.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let mode = TemporalMode::from_samples(grid, offset, samples).unwrap().normalized().unwrap();
        prop_assert!((mode.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overlap_is_conjugate_symmetric(
        a in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..120),
        b in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..120),
        oa in 0usize..80,
        ob in 0usize..80,
    ) {
        let grid = TimeGrid::with_steps(0.0, 0.05, 200).unwrap();
        let to_mode = |s: Vec<(f64, f64)>, off| {
            TemporalMode::from_samples(grid, off, s.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
                .unwrap()
        };
        let u = to_mode(a, oa);
        let v = to_mode(b, ob);
        let uv = mode_overlap(&u, &v).unwrap();
        let vu = mode_overlap(&v, &u).unwrap();
        prop_assert!((uv - vu.conj()).norm() <= 1e-12 * (1.0 + uv.norm()));
    }

    #[test]
    fn overlap_bounded_by_one(r1 in 0.1f64..10.0, r2 in 0.1f64..10.0) {
        let grid = TimeGrid::new(-20.0, 0.0, 1e-3).unwrap();
        let u = make_rising_exponential(r1, 0.0, grid).unwrap();
        let v = make_rising_exponential(r2, 0.0, grid).unwrap();
        let o = mode_overlap(&u, &v).unwrap().norm();
        prop_assert!(o <= 1.0 + 1e-9);
        let analytic = 2.0 * (r1 * r2).sqrt() / (r1 + r2);
        prop_assert!((o - analytic).abs() < 1e-3 * r1.max(r2));
    }
}
