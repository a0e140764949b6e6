use eitmem_core::optimizer::{total_efficiency, OptimizationTrace};
use eitmem_core::{
    make_flat_top, optimize_exponential_rate, time_reversal_iterate, ControlSchedule, Error, MemoryParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flat_top_trace(params: &MemoryParams, schedule: &ControlSchedule, max_iter: usize) -> OptimizationTrace {
    let seed = make_flat_top(*schedule.grid(), schedule.write_window()).unwrap();
    time_reversal_iterate(params, schedule, &seed, max_iter, 1e-10).unwrap()
}

fn random_case(rng: &mut ChaCha8Rng) -> (MemoryParams, ControlSchedule) {
    let params = MemoryParams::new(
        rng.random_range(0.0..0.2),
        rng.random_range(0.5..1.5),
        rng.random_range(0.0..0.3),
        rng.random_range(0.3..1.5),
    )
    .unwrap();
    let window = rng.random_range(15.0..25.0);
    let storage = rng.random_range(0.3..3.0);
    let schedule = ControlSchedule::from_durations(window, storage, window, 0.02).unwrap();
    (params, schedule)
}

#[test]
fn time_reversal_is_monotone_with_unit_norm_iterates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let (p, s) = random_case(&mut rng);
        let trace = flat_top_trace(&p, &s, 200);
        assert!(trace.converged, "{p:?}");
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].efficiency >= pair[0].efficiency - 1e-10, "{pair:?}");
        }
        for rec in &trace.iterations {
            assert!((rec.input_norm - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn converged_mode_is_a_fixed_point() {
    let p = MemoryParams::new(0.05, 1.0, 0.1, 0.9).unwrap();
    let s = ControlSchedule::from_durations(20.0, 0.5, 20.0, 0.01).unwrap();
    let trace = flat_top_trace(&p, &s, 200);
    assert!(trace.converged);
    let again = time_reversal_iterate(&p, &s, &trace.final_mode, 10, 1e-10).unwrap();
    assert!(again.converged);
    assert_eq!(again.iterations.len(), 1);
    assert!(again.iterations[0].overlap_with_next >= 1.0 - 1e-10);
    assert!((again.final_efficiency() - trace.final_efficiency()).abs() < 1e-8);
}

#[test]
fn time_reversal_dominates_rising_exponentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..6 {
        let (p, s) = random_case(&mut rng);
        let trace = flat_top_trace(&p, &s, 200);
        let best = optimize_exponential_rate(&p, &s, (1e-3, 50.0)).unwrap();
        assert!(
            trace.final_efficiency() >= best.efficiency - 1e-4,
            "time reversal {} < exponential {} for {p:?}",
            trace.final_efficiency(),
            best.efficiency
        );
    }
}

#[test]
fn contiguous_write_and_read_still_converge() {
    // With no hold the cavity field carries over into the read window and the
    // two leading singular values are close, so convergence is slow.
    let p = MemoryParams::new(0.05, 1.0, 0.1, 0.9).unwrap();
    let s = ControlSchedule::from_durations(20.0, 0.0, 20.0, 0.01).unwrap();
    let trace = flat_top_trace(&p, &s, 1000);
    assert!(trace.converged);
    let best = optimize_exponential_rate(&p, &s, (1e-3, 50.0)).unwrap();
    assert!(trace.final_efficiency() >= best.efficiency - 1e-4);
}

#[test]
fn bare_cavity_is_impedance_matched_by_its_ring_down_rate() {
    let p = MemoryParams::new(0.0, 1.0, 0.0, 0.0).unwrap();
    let s = ControlSchedule::from_durations(30.0, 0.0, 30.0, 0.005).unwrap();
    let best = optimize_exponential_rate(&p, &s, (0.05, 20.0)).unwrap();
    assert!((best.rate - p.gamma()).abs() < 2e-3 * p.gamma(), "rate {}", best.rate);
    assert!(best.efficiency >= 0.98);
}

#[test]
fn lossless_exponential_optimum_reaches_unity() {
    let p = MemoryParams::new(0.0, 1.0, 0.0, 0.4).unwrap();
    let s = ControlSchedule::from_durations(60.0, 0.0, 60.0, 0.01).unwrap();
    let best = optimize_exponential_rate(&p, &s, (1e-3, 50.0)).unwrap();
    assert!(best.efficiency >= 0.98, "{best:?}");

    // Weak coupling with a hold: the cavity holds little of the excitation at
    // the cutoff, so little leaks out while the control is off.
    let p = MemoryParams::new(0.0, 1.0, 0.0, 0.1).unwrap();
    let s = ControlSchedule::from_durations(600.0, 1.0, 600.0, 0.02).unwrap();
    let best = optimize_exponential_rate(&p, &s, (1e-4, 1.0)).unwrap();
    assert!(best.efficiency >= 0.98, "{best:?}");
}

#[test]
fn lossless_time_reversal_reaches_unity() {
    let p = MemoryParams::new(0.0, 1.0, 0.0, 0.4).unwrap();
    let s = ControlSchedule::from_durations(60.0, 2.0, 60.0, 0.01).unwrap();
    let trace = flat_top_trace(&p, &s, 100);
    assert!(trace.converged);
    assert!(trace.final_efficiency() >= 0.98);
    assert!(trace.final_efficiency() <= 1.0 + 1e-6);
}

#[test]
fn fast_pulses_cannot_be_bracketed() {
    let p = MemoryParams::new(0.0, 1.0, 0.0, 0.0).unwrap();
    let s = ControlSchedule::from_durations(30.0, 0.0, 30.0, 0.005).unwrap();
    let err = optimize_exponential_rate(&p, &s, (100.0, 1000.0)).unwrap_err();
    assert!(matches!(err, Error::NoBracket { .. }));
}

#[test]
fn exponential_optimum_beats_neighbouring_rates() {
    let p = MemoryParams::new(0.05, 1.0, 0.1, 0.9).unwrap();
    let s = ControlSchedule::from_durations(20.0, 0.5, 20.0, 0.01).unwrap();
    let best = optimize_exponential_rate(&p, &s, (1e-3, 50.0)).unwrap();
    for factor in [0.9, 0.99, 1.01, 1.1] {
        let mode = eitmem_core::make_rising_exponential(best.rate * factor, s.write_end(), *s.grid()).unwrap();
        assert!(total_efficiency(&p, &s, &mode).unwrap() <= best.efficiency + 1e-9);
    }
}
