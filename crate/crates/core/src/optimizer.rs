//! Input-mode optimization: a one-parameter search over rising exponentials
//! and the time-reversal fixed-point iteration.

use num_complex::Complex64;

use crate::dynamics::{propagate, retrieved_mode_shape, simulated_efficiency};
use crate::error::{Error, Result};
use crate::model::{make_rising_exponential, mode_overlap, ControlSchedule, MemoryParams, TemporalMode};

/// Relative tolerance on the optimal exponential rate.
const RATE_TOLERANCE: f64 = 1e-4;

/// Log-spaced probes used to locate the maximum before golden-section search.
const BRACKET_PROBES: usize = 17;

/// Total write–hold–read efficiency of a unit-norm input.
pub fn total_efficiency(params: &MemoryParams, schedule: &ControlSchedule, input: &TemporalMode) -> Result<f64> {
    let (_, record) = propagate(params, schedule, input)?;
    simulated_efficiency(&record, input, schedule.read_window())
}

/// Result of [`optimize_exponential_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialOptimum {
    pub rate: f64,
    pub efficiency: f64,
}

/// Golden-section search for the rising-exponential rate that maximizes the
/// simulated efficiency. The pulse is cut off at the end of the write window.
pub fn optimize_exponential_rate(
    params: &MemoryParams,
    schedule: &ControlSchedule,
    rate_range: (f64, f64),
) -> Result<ExponentialOptimum> {
    let (lo, hi) = rate_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rate range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let cutoff = schedule.write_end();
    let eval = |log_rate: f64| -> Result<f64> {
        let mode = make_rising_exponential(log_rate.exp(), cutoff, *schedule.grid())?;
        total_efficiency(params, schedule, &mode)
    };

    let (a, b) = (lo.ln(), hi.ln());
    let probes: Vec<f64> = (0..BRACKET_PROBES)
        .map(|k| a + (b - a) * k as f64 / (BRACKET_PROBES - 1) as f64)
        .collect();
    let values = probes.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v > values[best] { k } else { best });
    if best == 0 || best == BRACKET_PROBES - 1 {
        return Err(Error::NoBracket {
            rate: probes[best].exp(),
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x0, mut x3) = (probes[best - 1], probes[best + 1]);
    let mut x1 = x3 - inv_phi * (x3 - x0);
    let mut x2 = x0 + inv_phi * (x3 - x0);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while x3 - x0 > RATE_TOLERANCE {
        if f1 >= f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - inv_phi * (x3 - x0);
            f1 = eval(x1)?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + inv_phi * (x3 - x0);
            f2 = eval(x2)?;
        }
    }
    let (x, f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(ExponentialOptimum {
        rate: x.exp(),
        efficiency: f,
    })
}

/// One evaluated iterate of the time-reversal loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Discrete norm of the input that was simulated.
    pub input_norm: f64,
    pub efficiency: f64,
    /// `|⟨u_k, u_{k+1}⟩|` between this input and the next one.
    pub overlap_with_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// The last simulated input mode.
    pub final_mode: TemporalMode,
}

impl OptimizationTrace {
    pub fn final_efficiency(&self) -> f64 {
        self.iterations.last().map_or(0.0, |r| r.efficiency)
    }

    /// Turns a non-converged trace into [`Error::Stagnation`].
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Stagnation {
                iterations: self.iterations.len(),
            })
        }
    }
}

/// Maps a retrieved mode on the read window to the write window by time
/// reversal and conjugation, ending at the write cutoff:
/// `u(t_w - τ) = v*(t_r + τ)`.
pub fn time_reverse_onto_write(retrieved: &TemporalMode, schedule: &ControlSchedule) -> Result<TemporalMode> {
    let read = schedule.read_window();
    let write_end = schedule.write_window().last;
    let span = (retrieved.support().last.min(read.last) - read.first).min(write_end);
    let samples: Vec<Complex64> = (0..=span).rev().map(|k| retrieved.at(read.first + k).conj()).collect();
    TemporalMode::from_samples(*schedule.grid(), write_end - span, samples)?.normalized()
}

/// Iterates input → retrieved mode → time-reversed input until successive
/// inputs overlap to within `tolerance`.
///
/// A trace that exhausts `max_iter` is returned with `converged = false`.
pub fn time_reversal_iterate(
    params: &MemoryParams,
    schedule: &ControlSchedule,
    seed: &TemporalMode,
    max_iter: usize,
    tolerance: f64,
) -> Result<OptimizationTrace> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let mut current = seed.normalized()?;
    let mut iterations = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        let (_, record) = propagate(params, schedule, &current)?;
        let efficiency = simulated_efficiency(&record, &current, schedule.read_window())?;
        let retrieved = retrieved_mode_shape(&record, schedule.read_window())?;
        let next = time_reverse_onto_write(&retrieved, schedule)?;
        let overlap = mode_overlap(&current, &next)?.norm();
        iterations.push(IterationRecord {
            input_norm: current.norm_sqr().sqrt(),
            efficiency,
            overlap_with_next: overlap,
        });
        if overlap >= 1.0 - tolerance {
            return Ok(OptimizationTrace {
                iterations,
                converged: true,
                final_mode: current,
            });
        }
        current = next;
    }
    Ok(OptimizationTrace {
        iterations,
        converged: false,
        final_mode: current,
    })
}
