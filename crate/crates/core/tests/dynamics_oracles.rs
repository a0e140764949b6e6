use eitmem_core::{
    adjoint_transfer, make_rising_exponential, propagate, retrieved_mode_shape, retrieved_variance,
    simulated_efficiency, ChannelFamily, Complex64, ControlSchedule, MemoryParams, TemporalMode,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Draw {
    params: MemoryParams,
    schedule: ControlSchedule,
    input: TemporalMode,
}

fn random_draw(rng: &mut ChaCha8Rng) -> Draw {
    let gamma1 = rng.random_range(0.3..2.0);
    let gamma2 = rng.random_range(0.0..0.6);
    let gamma0 = rng.random_range(0.0..0.3);
    let kappa = rng.random_range(0.2..2.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let params = MemoryParams::new(gamma0, gamma1, gamma2, kappa).unwrap();
    let write = rng.random_range(6.0..15.0);
    let storage = rng.random_range(0.0..3.0);
    let read = rng.random_range(6.0..15.0);
    // Anywhere up to the integrator's stability limit.
    let fastest = params.gamma().max(kappa.abs()).max(gamma0);
    let dt = rng.random_range(0.01..0.1) / fastest;
    let schedule = ControlSchedule::from_durations(write, storage, read, dt).unwrap();
    let rate = rng.random_range(0.2..3.0);
    let input = make_rising_exponential(rate, schedule.write_end(), *schedule.grid()).unwrap();
    Draw {
        params,
        schedule,
        input,
    }
}

#[test]
fn passivity_over_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..100 {
        let d = random_draw(&mut rng);
        let (_, record) = propagate(&d.params, &d.schedule, &d.input).unwrap();
        let v = retrieved_mode_shape(&record, d.schedule.read_window()).unwrap();
        let map = adjoint_transfer(&d.params, &d.schedule, &v).unwrap();
        let w = map.total_weight();
        assert!((w - 1.0).abs() < 1e-4, "draw {k}: W = {w}, {:?}", d.params);
        let (vx, vy) = retrieved_variance(&map, 0.0).unwrap();
        assert!((vx - 0.5).abs() < 1e-4 && (vy - 0.5).abs() < 1e-4);
        let channel_sum: f64 = map.channels().iter().map(|c| c.coefficient.norm_sqr()).sum();
        assert!((channel_sum - w).abs() < 1e-12);
    }
}

#[test]
fn input_coefficient_matches_simulated_efficiency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let d = random_draw(&mut rng);
        let (_, record) = propagate(&d.params, &d.schedule, &d.input).unwrap();
        let eta = simulated_efficiency(&record, &d.input, d.schedule.read_window()).unwrap();
        let v = retrieved_mode_shape(&record, d.schedule.read_window()).unwrap();
        let map = adjoint_transfer(&d.params, &d.schedule, &v).unwrap();
        let c = map.input_mode_coefficient(&d.input).unwrap();
        assert!(
            (c.norm() - eta.sqrt()).abs() < 1e-4,
            "|c| = {}, sqrt(eta) = {}",
            c.norm(),
            eta.sqrt()
        );
    }
}

#[test]
fn lossy_weight_spreads_over_every_family() {
    let p = MemoryParams::new(0.1, 1.0, 0.2, 1.2).unwrap();
    let s = ControlSchedule::from_durations(10.0, 1.0, 10.0, 0.01).unwrap();
    let u = make_rising_exponential(1.0, s.write_end(), *s.grid()).unwrap();
    let (_, record) = propagate(&p, &s, &u).unwrap();
    let v = retrieved_mode_shape(&record, s.read_window()).unwrap();
    let map = adjoint_transfer(&p, &s, &v).unwrap();
    for family in [
        ChannelFamily::ExternalInput,
        ChannelFamily::LossVacuum,
        ChannelFamily::SpinNoise,
    ] {
        assert!(map.family_weight(family) > 1e-3, "{family:?}");
    }
    assert!((map.total_weight() - 1.0).abs() < 1e-4);
}

/// Spin-noise weight of the retrieved mode from a forward Lyapunov
/// integration of the covariance of `(a, S, b)`, where `b` accumulates
/// `∫ v* √(2γ1) a dt` and only the spin-noise channel is driven.
fn spin_weight_by_covariance(params: &MemoryParams, schedule: &ControlSchedule, v: &TemporalMode) -> f64 {
    type Mat = [[Complex64; 3]; 3];
    let grid = schedule.grid();
    let dt = grid.dt();
    let c1 = (2.0 * params.gamma1).sqrt();
    let i = Complex64::i();
    let drift = |kappa: f64, vconj: Complex64| -> Mat {
        let z = Complex64::default();
        [
            [Complex64::new(-params.gamma(), 0.0), -i * kappa, z],
            [-i * kappa, Complex64::new(-params.gamma0, 0.0), z],
            [c1 * vconj, z, z],
        ]
    };
    let rhs = |a: &Mat, p: &Mat| -> Mat {
        let mut out = [[Complex64::default(); 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    out[r][c] += a[r][k] * p[k][c] + p[r][k] * a[c][k].conj();
                }
            }
        }
        out[1][1] += 2.0 * params.gamma0;
        out
    };
    let add = |p: &Mat, k: &Mat, h: f64| -> Mat {
        let mut out = *p;
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] += k[r][c] * h;
            }
        }
        out
    };
    let mut p: Mat = [[Complex64::default(); 3]; 3];
    for n in 0..grid.steps() {
        let kappa = schedule.kappa_on_step(n, params);
        let (v0, v1) = (v.at(n).conj(), v.at(n + 1).conj());
        let vm = 0.5 * (v0 + v1);
        let a0 = drift(kappa, v0);
        let am = drift(kappa, vm);
        let a1 = drift(kappa, v1);
        let k1 = rhs(&a0, &p);
        let k2 = rhs(&am, &add(&p, &k1, 0.5 * dt));
        let k3 = rhs(&am, &add(&p, &k2, 0.5 * dt));
        let k4 = rhs(&a1, &add(&p, &k3, dt));
        for r in 0..3 {
            for c in 0..3 {
                p[r][c] += dt / 6.0 * (k1[r][c] + 2.0 * k2[r][c] + 2.0 * k3[r][c] + k4[r][c]);
            }
        }
    }
    p[2][2].re
}

#[test]
fn excess_noise_matches_covariance_oracle() {
    let p = MemoryParams::new(0.15, 1.0, 0.1, 0.9).unwrap();
    let s = ControlSchedule::from_durations(8.0, 1.5, 8.0, 0.005).unwrap();
    let u = make_rising_exponential(0.8, s.write_end(), *s.grid()).unwrap();
    let (_, record) = propagate(&p, &s, &u).unwrap();
    let v = retrieved_mode_shape(&record, s.read_window()).unwrap();
    let map = adjoint_transfer(&p, &s, &v).unwrap();

    let w_adjoint = map.family_weight(ChannelFamily::SpinNoise);
    let w_oracle = spin_weight_by_covariance(&p, &s, &v);
    assert!(w_oracle > 0.05);
    assert!(
        (w_adjoint - w_oracle).abs() < 1e-4 * w_oracle,
        "adjoint {w_adjoint}, covariance {w_oracle}"
    );

    let eps = 0.02;
    let (vx, vy) = retrieved_variance(&map, eps).unwrap();
    assert_eq!(vx, vy);
    assert!((vx - 0.5 * map.total_weight() - eps * w_oracle).abs() < 1e-6);
}

#[test]
fn excitation_bookkeeping_integrated() {
    let p = MemoryParams::new(0.2, 1.0, 0.3, 1.5).unwrap();
    let s = ControlSchedule::from_durations(6.0, 1.0, 6.0, 1e-3).unwrap();
    let u = make_rising_exponential(1.2, s.write_end(), *s.grid()).unwrap();
    let (traj, _) = propagate(&p, &s, &u).unwrap();
    let dt = s.grid().dt();
    let c1 = (2.0 * p.gamma1).sqrt();
    // The input is zero on steps outside its support, including the step
    // right after the cutoff.
    let rate = |n: usize, drive: bool| {
        let a = traj.cavity()[n];
        let sw = traj.spin()[n];
        let pump = if drive { 2.0 * c1 * (u.at(n).conj() * a).re } else { 0.0 };
        -2.0 * p.gamma() * a.norm_sqr() - 2.0 * p.gamma0 * sw.norm_sqr() + pump
    };
    let energy = |n: usize| traj.cavity()[n].norm_sqr() + traj.spin()[n].norm_sqr();
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for n in 0..s.grid().steps() {
        let drive = u.support().covers_step(n);
        integral += 0.5 * dt * (rate(n, drive) + rate(n + 1, drive));
        worst = worst.max((energy(n + 1) - integral).abs());
    }
    assert!(worst < 1e-5, "worst bookkeeping residual {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagation_is_linear(re in -3.0f64..3.0, im in -3.0f64..3.0, rate in 0.2f64..3.0, kappa in 0.1f64..2.0) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let p = MemoryParams::new(0.1, 1.0, 0.2, kappa).unwrap();
        let s = ControlSchedule::from_durations(5.0, 0.5, 5.0, 0.01).unwrap();
        let u = make_rising_exponential(rate, s.write_end(), *s.grid()).unwrap();
        let (t1, r1) = propagate(&p, &s, &u).unwrap();
        let (t2, r2) = propagate(&p, &s, &u.scaled(c)).unwrap();
        let close = |x: &[Complex64], y: &[Complex64]| {
            let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max) * c.norm();
            x.iter().zip(y).all(|(a, b)| (a * c - b).norm() <= 1e-10 * scale.max(1e-300))
        };
        prop_assert!(close(t1.cavity(), t2.cavity()));
        prop_assert!(close(t1.spin(), t2.spin()));
        prop_assert!(close(&r1.output(), &r2.output()));
    }
}
