//! End-to-end comparison of the calibrated model with published headline
//! values.

use eitmem_core::analytics::benchmark_crossing;
use eitmem_core::calibration::lifetime_from_params;
use eitmem_core::classical_benchmark;

use crate::config::ScenarioConfig;
use crate::error::HarnessError;
use crate::scenario::{detected, run_scenario, sweep_storage_time, ResultRow, Scenario};

/// Internal efficiency after removing external losses.
const INTERNAL_EFFICIENCY: (f64, f64) = (0.78, 0.01);
/// Classical benchmark at the reference mean photon number.
const BENCHMARK_WINDOW: (f64, f64) = (0.725, 0.735);
const BENCHMARK_MEAN_PHOTON: f64 = 0.6;
/// Average fidelity at the reference mean photon number.
const AVERAGE_FIDELITY: (f64, f64) = (0.97, 0.01);
const LIFETIME: f64 = 1.2e-6;
const LIFETIME_RELATIVE_TOLERANCE: f64 = 1e-9;
/// Largest mean photon number over which the benchmark must be beaten.
const EXCEEDANCE_RANGE: f64 = 8.0;
const EXCEEDANCE_POINTS: usize = 50;
/// Storage times sampled within the lifetime.
const LIFETIME_POINTS: usize = 13;
const ROUND_TRIP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub computed: f64,
    pub target: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub checks: Vec<Check>,
    /// Rows of the mean-photon sweep behind the exceedance check.
    pub exceedance_rows: Vec<ResultRow>,
}

impl Reproduction {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn within(name: &'static str, computed: f64, (value, tol): (f64, f64)) -> Check {
    Check {
        name,
        computed,
        target: format!("target {value} ± {tol}"),
        pass: (computed - value).abs() <= tol,
    }
}

fn between(name: &'static str, computed: f64, (lo, hi): (f64, f64)) -> Check {
    Check {
        name,
        computed,
        target: format!("target in [{lo}, {hi}]"),
        pass: (lo..=hi).contains(&computed),
    }
}

fn positive(name: &'static str, margin: f64, what: &str) -> Check {
    Check {
        name,
        computed: margin,
        target: format!("{what} > 0"),
        pass: margin > 0.0,
    }
}

pub fn reproduce_paper(config: &ScenarioConfig) -> Result<Reproduction, HarnessError> {
    let cal = config.calibration()?;
    if config.params.is_some() || config.cavity.is_some() {
        return Err(HarnessError::Config(
            "reproduction fits its own parameters; remove [params] / [cavity]".into(),
        ));
    }
    let scenario = Scenario::from_config(config)?.with_storage_time(cal.reference_storage_time.0)?;
    let outcome = scenario.calibration.clone().expect("parameters come from calibration");
    let mut checks = Vec::new();

    checks.push(within(
        "internal efficiency",
        outcome.fit.efficiency_internal,
        INTERNAL_EFFICIENCY,
    ));

    let regenerated = outcome.regenerated()?;
    let obs = &outcome.observables;
    let deviation = [
        (regenerated.efficiency_measured, obs.efficiency_measured),
        (regenerated.lifetime, obs.lifetime),
        (regenerated.fidelity_avg, obs.fidelity_avg),
    ]
    .iter()
    .map(|(a, b)| ((a - b) / b).abs())
    .fold(0.0, f64::max);
    checks.push(Check {
        name: "calibration round trip",
        computed: deviation,
        target: format!("relative deviation <= {ROUND_TRIP_TOLERANCE:e}"),
        pass: deviation <= ROUND_TRIP_TOLERANCE,
    });

    checks.push(between(
        "benchmark at n=0.6",
        classical_benchmark(BENCHMARK_MEAN_PHOTON)?,
        BENCHMARK_WINDOW,
    ));

    let lifetime = lifetime_from_params(&scenario.params)?;
    checks.push(Check {
        name: "lifetime",
        computed: lifetime,
        target: format!("target {LIFETIME:e} s, relative tolerance {LIFETIME_RELATIVE_TOLERANCE:e}"),
        pass: ((lifetime - LIFETIME) / LIFETIME).abs() <= LIFETIME_RELATIVE_TOLERANCE,
    });

    let reference = run_scenario(&scenario)?;
    checks.push(within(
        "simulated efficiency",
        reference.row.eta_sim,
        INTERNAL_EFFICIENCY,
    ));

    let at_reference = scenario.row(BENCHMARK_MEAN_PHOTON, &reference.point, BENCHMARK_MEAN_PHOTON)?;
    checks.push(within(
        "average fidelity at n=0.6",
        at_reference.fidelity_avg,
        AVERAGE_FIDELITY,
    ));

    let grid: Vec<f64> = (1..=EXCEEDANCE_POINTS)
        .map(|k| EXCEEDANCE_RANGE * k as f64 / EXCEEDANCE_POINTS as f64)
        .collect();
    let exceedance_rows = grid
        .iter()
        .map(|&n| scenario.row(n, &reference.point, n))
        .collect::<Result<Vec<_>, _>>()?;
    let margin = exceedance_rows
        .iter()
        .map(|r| r.fidelity_avg - r.fidelity_benchmark)
        .fold(f64::INFINITY, f64::min);
    checks.push(positive("exceedance over n in (0, 8]", margin, "min fidelity margin"));

    let (gain, variance) = detected(
        reference.point.eta_sim,
        reference.point.var_x,
        scenario.detection.transmission,
    )?;
    let crossing = benchmark_crossing(gain, variance).unwrap_or(f64::INFINITY);
    checks.push(Check {
        name: "benchmark crossing",
        computed: crossing,
        target: format!("mean photon number > {EXCEEDANCE_RANGE}"),
        pass: crossing > EXCEEDANCE_RANGE,
    });

    let times: Vec<f64> = (0..LIFETIME_POINTS)
        .map(|k| lifetime * k as f64 / (LIFETIME_POINTS - 1) as f64)
        .collect();
    let lifetime_rows = sweep_storage_time(&scenario, &times)?;
    let margin = lifetime_rows
        .iter()
        .map(|r| r.fidelity_avg - r.fidelity_benchmark)
        .fold(f64::INFINITY, f64::min);
    checks.push(positive("exceedance within lifetime", margin, "min fidelity margin"));

    Ok(Reproduction {
        checks,
        exceedance_rows,
    })
}
