//! Single operating points, sweeps, mode optimization and calibration runs.

use eitmem_core::calibration::generate_observables;
use eitmem_core::optimizer::OptimizationTrace;
use eitmem_core::{
    adjoint_transfer, average_fidelity, classical_benchmark, derive_coupling, efficiency_formula, fit_from_observables,
    make_flat_top, make_rising_exponential, optimize_exponential_rate, propagate, retrieved_mode_shape,
    retrieved_variance, simulated_efficiency, time_reversal_iterate, CalibratedFit, CavityGeometry, ChannelFamily,
    CoherentAlphabet, ControlSchedule, CouplingSpec, Error, ExponentialOptimum, FieldRecord, MeasuredObservables,
    MemoryParams, TemporalMode,
};
use rayon::prelude::*;

use crate::config::{InputMode, ScenarioConfig};
use crate::error::HarnessError;

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Efficiencies this far above 1 are treated as quadrature noise and clipped
/// when converted to an amplitude gain.
const GAIN_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputPlan {
    Exponential { rate: f64 },
    Optimized { max_iterations: usize, tolerance: f64 },
}

/// How retrieved states are scored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub mean_photon: f64,
    /// Passive transmission between memory output and detection.
    pub transmission: f64,
    /// Score against the attenuated input instead of the input itself.
    pub rescaled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    pub observables: MeasuredObservables,
    pub fit: CalibratedFit,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Spin-noise weight of the retrieved mode at the reference point.
    pub spin_weight: f64,
    /// Spin-channel excess noise reproducing the fitted detected variance.
    pub fitted_excess_noise: f64,
    /// Value used in the scenario; differs from the fitted one when forced.
    pub excess_noise: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: MemoryParams,
    pub schedule: ControlSchedule,
    pub input: InputPlan,
    pub detection: Detection,
    pub calibration: Option<CalibrationOutcome>,
    pub rate_range: Option<(f64, f64)>,
}

/// Simulated figures of one write–hold–read cycle.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub storage_time: f64,
    pub eta_formula: f64,
    pub eta_sim: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub spin_weight: f64,
    pub input: TemporalMode,
    pub record: FieldRecord,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub swept_value: f64,
    pub eta_formula: f64,
    pub eta_sim: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub fidelity_avg: f64,
    pub fidelity_benchmark: f64,
    pub exceeds_benchmark: bool,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub point: OperatingPoint,
    pub row: ResultRow,
    pub trace: Option<OptimizationTrace>,
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    pub exponential: ExponentialOptimum,
    pub trace: OptimizationTrace,
    pub point: OperatingPoint,
    pub row: ResultRow,
}

impl Scenario {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        let timing = config.timing()?;
        let mut schedule =
            ControlSchedule::from_durations(timing.write.0, timing.storage_time.0, timing.read.0, timing.step.0)?;
        if let Some(k) = timing.write_kappa {
            schedule = schedule.with_write_kappa(k.0);
        }
        if let Some(k) = timing.read_kappa {
            schedule = schedule.with_read_kappa(k.0);
        }
        let input = match config.input.mode {
            InputMode::Exponential => InputPlan::Exponential {
                rate: config.input.rate.map(|r| r.0).unwrap_or_default(),
            },
            InputMode::Optimized => InputPlan::Optimized {
                max_iterations: config.input.max_iterations,
                tolerance: config.input.tolerance,
            },
        };
        let detection = Detection {
            mean_photon: config.fidelity.mean_photon,
            transmission: config
                .fidelity
                .external_transmission
                .or(config.calibration.as_ref().map(|c| c.external_transmission))
                .unwrap_or(1.0),
            rescaled: config.fidelity.rescaled,
        };
        let rate_range = match (config.input.rate_min, config.input.rate_max) {
            (Some(lo), Some(hi)) => Some((lo.0, hi.0)),
            (None, None) => None,
            _ => {
                return Err(HarnessError::Config(
                    "give both input.rate_min and input.rate_max".into(),
                ))
            }
        };

        let (params, calibration) = if let Some(p) = &config.params {
            let params =
                MemoryParams::new(p.gamma0.0, p.gamma1.0, p.gamma2.0, p.kappa.0)?.with_excess_noise(p.excess_noise)?;
            (params, None)
        } else if let Some(cavity) = &config.cavity {
            let spin = config.spin.as_ref().expect("checked when loading");
            let geometry = CavityGeometry {
                mirror_transmission: cavity.mirror_transmission,
                round_trip_loss: cavity.round_trip_loss,
                round_trip_time: cavity.round_trip_time.0,
            };
            let coupling = config.coupling.as_ref().map(|c| CouplingSpec {
                atom_number: c.atom_number,
                coupling_constant: c.coupling_constant.0,
                rabi_frequency: c.rabi_frequency.0,
                detuning: c.detuning.0,
            });
            if let Some(spec) = &coupling {
                // surface a zero detuning even when a direct kappa wins
                derive_coupling(spec)?;
            }
            let params =
                MemoryParams::from_geometry(&geometry, coupling.as_ref(), cavity.kappa.map(|k| k.0), spin.gamma0.0)?
                    .with_excess_noise(spin.excess_noise)?;
            (params, None)
        } else {
            let outcome = calibrate(config, &schedule, input)?;
            let params = outcome
                .fit
                .params(outcome.gamma1, outcome.gamma2)?
                .with_excess_noise(outcome.excess_noise)?;
            (params, Some(outcome))
        };

        Ok(Scenario {
            params,
            schedule,
            input,
            detection,
            calibration,
            rate_range,
        })
    }

    /// The same scenario with a different hold time.
    pub fn with_storage_time(&self, storage_time: f64) -> Result<Self> {
        Ok(Scenario {
            schedule: self.schedule.with_storage_time(storage_time)?,
            ..self.clone()
        })
    }

    /// Input mode for this scenario and, when optimized, the iteration trace.
    pub fn prepare_input(&self) -> Result<(TemporalMode, Option<OptimizationTrace>)> {
        prepare_input(&self.params, &self.schedule, self.input)
    }

    pub fn row(&self, swept_value: f64, point: &OperatingPoint, mean_photon: f64) -> Result<ResultRow> {
        let detection = Detection {
            mean_photon,
            ..self.detection
        };
        result_row(swept_value, point, &detection)
    }
}

fn prepare_input(
    params: &MemoryParams,
    schedule: &ControlSchedule,
    plan: InputPlan,
) -> Result<(TemporalMode, Option<OptimizationTrace>)> {
    match plan {
        InputPlan::Exponential { rate } => Ok((
            make_rising_exponential(rate, schedule.write_end(), *schedule.grid())?,
            None,
        )),
        InputPlan::Optimized {
            max_iterations,
            tolerance,
        } => {
            let seed = make_flat_top(*schedule.grid(), schedule.write_window())?;
            let trace =
                time_reversal_iterate(params, schedule, &seed, max_iterations, tolerance)?.ensure_converged()?;
            Ok((trace.final_mode.clone(), Some(trace)))
        }
    }
}

/// Simulates one cycle with a given input and evaluates its noise budget.
pub fn evaluate(params: &MemoryParams, schedule: &ControlSchedule, input: &TemporalMode) -> Result<OperatingPoint> {
    let (_, record) = propagate(params, schedule, input)?;
    let read = schedule.read_window();
    let eta_sim = simulated_efficiency(&record, input, read)?;
    let (var_x, var_y, spin_weight) = match retrieved_mode_shape(&record, read) {
        Ok(mode) => {
            let map = adjoint_transfer(params, schedule, &mode)?;
            let (vx, vy) = retrieved_variance(&map, params.excess_noise)?;
            (vx, vy, map.family_weight(ChannelFamily::SpinNoise))
        }
        // nothing comes out: the detected mode holds vacuum
        Err(Error::EmptyOutput(_)) => (0.5, 0.5, 0.0),
        Err(e) => return Err(e.into()),
    };
    let storage_time = schedule.storage_time();
    Ok(OperatingPoint {
        storage_time,
        eta_formula: efficiency_formula(params, storage_time)?,
        eta_sim,
        var_x,
        var_y,
        spin_weight,
        input: input.clone(),
        record,
    })
}

/// Amplitude gain and variance seen after passive transmission `t`. A
/// variance marginally below vacuum (within the transfer map's tolerance) is
/// clipped to vacuum, like the gain.
pub fn detected(eta: f64, variance: f64, t: f64) -> Result<(f64, f64)> {
    let g2 = t * eta;
    if g2 > 1.0 + GAIN_SLACK {
        return Err(Error::OutOfRange {
            value: g2,
            reason: "detected efficiency exceeds unity",
        }
        .into());
    }
    Ok((g2.min(1.0).sqrt(), 0.5 + t * (variance.max(0.5) - 0.5)))
}

pub fn result_row(swept_value: f64, point: &OperatingPoint, detection: &Detection) -> Result<ResultRow> {
    let (gain, variance) = detected(point.eta_sim, point.var_x.max(point.var_y), detection.transmission)?;
    let alphabet = CoherentAlphabet::new(detection.mean_photon)?;
    let gain = if detection.rescaled { 1.0 } else { gain };
    let fidelity_avg = average_fidelity(&alphabet, gain, variance)?;
    let fidelity_benchmark = classical_benchmark(detection.mean_photon)?;
    Ok(ResultRow {
        swept_value,
        eta_formula: point.eta_formula,
        eta_sim: point.eta_sim,
        var_x: point.var_x,
        var_y: point.var_y,
        fidelity_avg,
        fidelity_benchmark,
        exceeds_benchmark: fidelity_avg > fidelity_benchmark,
    })
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport> {
    let (input, trace) = scenario.prepare_input()?;
    let point = evaluate(&scenario.params, &scenario.schedule, &input)?;
    let row = result_row(point.storage_time, &point, &scenario.detection)?;
    Ok(ScenarioReport { point, row, trace })
}

/// One row per mean photon number, all at the scenario's operating point.
pub fn sweep_mean_photon(scenario: &Scenario, values: &[f64]) -> Result<Vec<ResultRow>> {
    let report = run_scenario(scenario)?;
    values.par_iter().map(|&n| scenario.row(n, &report.point, n)).collect()
}

/// One row per storage time. The input is prepared once at the scenario's
/// own storage time and reused, since the write window is unchanged.
pub fn sweep_storage_time(scenario: &Scenario, values: &[f64]) -> Result<Vec<ResultRow>> {
    let (input, _) = scenario.prepare_input()?;
    values
        .par_iter()
        .map(|&t0| {
            let schedule = scenario.schedule.with_storage_time(t0)?;
            let mode = input.rebased(*schedule.grid())?;
            let point = evaluate(&scenario.params, &schedule, &mode)?;
            result_row(point.storage_time, &point, &scenario.detection)
        })
        .collect()
}

/// Best rising exponential and the time-reversal optimum at the scenario's
/// operating point.
pub fn optimize_mode(scenario: &Scenario) -> Result<OptimizeReport> {
    let gamma = scenario.params.gamma();
    let range = scenario.rate_range.unwrap_or((1e-3 * gamma, 10.0 * gamma));
    let exponential = optimize_exponential_rate(&scenario.params, &scenario.schedule, range)?;
    let (max_iterations, tolerance) = match scenario.input {
        InputPlan::Optimized {
            max_iterations,
            tolerance,
        } => (max_iterations, tolerance),
        InputPlan::Exponential { .. } => (crate::config::InputSection::default().max_iterations, 1e-10),
    };
    let (input, trace) = prepare_input(
        &scenario.params,
        &scenario.schedule,
        InputPlan::Optimized {
            max_iterations,
            tolerance,
        },
    )?;
    let trace = trace.expect("optimized input always has a trace");
    let point = evaluate(&scenario.params, &scenario.schedule, &input)?;
    let row = result_row(point.storage_time, &point, &scenario.detection)?;
    Ok(OptimizeReport {
        exponential,
        trace,
        point,
        row,
    })
}

/// Fits the effective parameters to `[calibration]` and converts the fitted
/// detected-mode variance into spin-channel excess noise at the reference
/// storage time.
fn calibrate(config: &ScenarioConfig, schedule: &ControlSchedule, input: InputPlan) -> Result<CalibrationOutcome> {
    let cal = config.calibration()?;
    let observables = MeasuredObservables {
        efficiency_measured: cal.efficiency_measured,
        reference_storage_time: cal.reference_storage_time.0,
        external_transmission: cal.external_transmission,
        lifetime: cal.lifetime.0,
        fidelity_avg: cal.fidelity_avg,
        fidelity_uncertainty: cal.fidelity_uncertainty,
        mean_photon: cal.mean_photon,
    };
    let gamma1 = cal.gamma1.0;
    let gamma2 = gamma1 * (1.0 / cal.coupling_ratio - 1.0);
    let fit = fit_from_observables(&observables, gamma1, gamma2)?;

    let params = fit.params(gamma1, gamma2)?;
    let reference = schedule.with_storage_time(observables.reference_storage_time)?;
    let (mode, _) = prepare_input(&params, &reference, input)?;
    let point = evaluate(&params, &reference, &mode)?;
    let spin_weight = point.spin_weight;
    let fitted_excess_noise = if fit.excess_variance == 0.0 {
        0.0
    } else if spin_weight > 0.0 {
        fit.excess_variance / (observables.external_transmission * spin_weight)
    } else {
        return Err(Error::Undefined("excess noise cannot be attributed: no spin-noise weight").into());
    };
    Ok(CalibrationOutcome {
        observables,
        fit,
        gamma1,
        gamma2,
        spin_weight,
        fitted_excess_noise,
        excess_noise: cal.excess_noise.unwrap_or(fitted_excess_noise),
    })
}

impl CalibrationOutcome {
    /// Observables predicted by the fitted closed-form model.
    pub fn regenerated(&self) -> Result<MeasuredObservables> {
        let params = self.fit.params(self.gamma1, self.gamma2)?;
        Ok(generate_observables(
            &params,
            self.fit.retrieved_variance(),
            self.observables.reference_storage_time,
            self.observables.external_transmission,
            self.observables.mean_photon,
        )?)
    }
}
