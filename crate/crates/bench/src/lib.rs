//! Shared fixtures for the benchmarks.

use eitmem_core::{make_rising_exponential, ControlSchedule, MemoryParams, Result, TemporalMode};

/// Effective rates near the calibrated warm-cell operating point.
pub fn operating_point() -> Result<(MemoryParams, ControlSchedule, TemporalMode)> {
    let gamma1 = 5.0e7;
    let params = MemoryParams::new(4.1667e5, gamma1, gamma1 * (1.0 / 0.95 - 1.0), 2.6e7)?;
    let schedule = ControlSchedule::from_durations(600e-9, 100e-9, 600e-9, 0.1e-9)?;
    let input = make_rising_exponential(2.0e7, schedule.write_end(), *schedule.grid())?;
    Ok((params, schedule, input))
}
