//! Scenario configuration files.
//!
//! Physical parameters come from exactly one of `[params]` (effective rates),
//! `[cavity]` + `[spin]` (+ `[coupling]`) (geometry), or, when neither is
//! present, the fit of `[calibration]`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::HarnessError;
use crate::units::{Rate, Time};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: Option<ParamsSection>,
    pub cavity: Option<CavitySection>,
    pub coupling: Option<CouplingSection>,
    pub spin: Option<SpinSection>,
    pub timing: Option<TimingSection>,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub fidelity: FidelitySection,
    #[serde(default)]
    pub sweep: SweepSection,
    pub calibration: Option<CalibrationSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma0: Rate,
    pub gamma1: Rate,
    pub gamma2: Rate,
    pub kappa: Rate,
    /// Excess noise on the spin-noise channel, vacuum units.
    #[serde(default)]
    pub excess_noise: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub mirror_transmission: f64,
    pub round_trip_loss: f64,
    pub round_trip_time: Time,
    /// Direct coupling; wins over `[coupling]`.
    pub kappa: Option<Rate>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub atom_number: f64,
    pub coupling_constant: Rate,
    pub rabi_frequency: Rate,
    pub detuning: Rate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    pub gamma0: Rate,
    #[serde(default)]
    pub excess_noise: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    pub step: Time,
    pub write: Time,
    pub storage_time: Time,
    pub read: Time,
    pub write_kappa: Option<Rate>,
    pub read_kappa: Option<Rate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Exponential,
    Optimized,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(default = "default_mode")]
    pub mode: InputMode,
    /// Rate of the rising exponential in `exponential` mode.
    pub rate: Option<Rate>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Search range of `optimize-mode`'s exponential line search.
    pub rate_min: Option<Rate>,
    pub rate_max: Option<Rate>,
}

fn default_mode() -> InputMode {
    InputMode::Optimized
}

fn default_max_iterations() -> usize {
    500
}

fn default_tolerance() -> f64 {
    1e-10
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            mode: default_mode(),
            rate: None,
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            rate_min: None,
            rate_max: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelitySection {
    #[serde(default = "default_mean_photon")]
    pub mean_photon: f64,
    /// Transmission between memory output and detection. Defaults to the
    /// calibration value when `[calibration]` is present, else 1.
    pub external_transmission: Option<f64>,
    /// Compare against the attenuated input `g·α` instead of `α`.
    #[serde(default)]
    pub rescaled: bool,
}

fn default_mean_photon() -> f64 {
    0.6
}

impl Default for FidelitySection {
    fn default() -> Self {
        FidelitySection {
            mean_photon: default_mean_photon(),
            external_transmission: None,
            rescaled: false,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mean_photon: Option<RangeSpec<f64>>,
    pub storage_time: Option<RangeSpec<Time>>,
}

/// Either an explicit list or `points` evenly spaced values from `start` to
/// `stop` inclusive.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec<T> {
    pub values: Option<Vec<T>>,
    pub start: Option<T>,
    pub stop: Option<T>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub efficiency_measured: f64,
    pub reference_storage_time: Time,
    pub external_transmission: f64,
    pub lifetime: Time,
    pub fidelity_avg: f64,
    pub fidelity_uncertainty: f64,
    pub mean_photon: f64,
    pub gamma1: Rate,
    /// γ1/γ.
    pub coupling_ratio: f64,
    /// Overrides the fitted spin-channel excess noise.
    pub excess_noise: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Summary,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.check_shape()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        ScenarioConfig::from_toml(&text)
    }

    /// Structural checks that do not need any computation.
    fn check_shape(&self) -> Result<(), HarnessError> {
        let invalid = |msg: String| Err(HarnessError::Config(msg));
        match (&self.params, &self.cavity) {
            (Some(_), Some(_)) => {
                return invalid("give either [params] or [cavity], not both".into());
            }
            (Some(_), None) if self.spin.is_some() || self.coupling.is_some() => {
                return invalid("[spin] and [coupling] belong to the [cavity] style, not [params]".into());
            }
            (None, Some(cavity)) => {
                if self.spin.is_none() {
                    return invalid("[cavity] requires a [spin] section with gamma0".into());
                }
                if cavity.kappa.is_none() && self.coupling.is_none() {
                    return invalid("[cavity] requires kappa or a [coupling] section".into());
                }
            }
            (None, None) if self.calibration.is_none() => {
                return invalid("no parameters: give [params], [cavity] or [calibration]".into());
            }
            (None, None) if self.spin.is_some() || self.coupling.is_some() => {
                return invalid("[spin] and [coupling] require a [cavity] section".into());
            }
            _ => {}
        }
        let input = &self.input;
        if input.mode == InputMode::Exponential && input.rate.is_none() {
            return invalid("input.rate is required when input.mode = \"exponential\"".into());
        }
        if input.max_iterations == 0 {
            return invalid("input.max_iterations must be at least 1".into());
        }
        if !(input.tolerance > 0.0 && input.tolerance < 1.0) {
            return invalid(format!("input.tolerance must lie in (0, 1), got {}", input.tolerance));
        }
        if !(self.fidelity.mean_photon >= 0.0) {
            return invalid(format!(
                "fidelity.mean_photon must be non-negative, got {}",
                self.fidelity.mean_photon
            ));
        }
        if let Some(t) = self.fidelity.external_transmission {
            if !(t > 0.0 && t <= 1.0) {
                return invalid(format!("fidelity.external_transmission must lie in (0, 1], got {t}"));
            }
        }
        if let Some(cal) = &self.calibration {
            if !(cal.coupling_ratio > 0.0 && cal.coupling_ratio <= 1.0) {
                return invalid(format!(
                    "calibration.coupling_ratio must lie in (0, 1], got {}",
                    cal.coupling_ratio
                ));
            }
            if !(cal.gamma1.0 > 0.0) {
                return invalid("calibration.gamma1 must be positive".into());
            }
            if !(cal.fidelity_uncertainty >= 0.0) {
                return invalid("calibration.fidelity_uncertainty must be non-negative".into());
            }
            if let Some(eps) = cal.excess_noise {
                if !(eps >= 0.0) {
                    return invalid(format!("calibration.excess_noise must be non-negative, got {eps}"));
                }
            }
        }
        Ok(())
    }

    pub fn timing(&self) -> Result<&TimingSection, HarnessError> {
        self.timing
            .as_ref()
            .ok_or_else(|| HarnessError::Config("missing [timing] section".into()))
    }

    pub fn calibration(&self) -> Result<&CalibrationSection, HarnessError> {
        self.calibration
            .as_ref()
            .ok_or_else(|| HarnessError::Config("missing [calibration] section".into()))
    }
}

impl RangeSpec<f64> {
    pub fn resolve(&self, name: &str) -> Result<Vec<f64>, HarnessError> {
        resolve_range(name, self.values.clone(), self.start, self.stop, self.points)
    }
}

impl RangeSpec<Time> {
    pub fn resolve(&self, name: &str) -> Result<Vec<f64>, HarnessError> {
        let unwrap = |t: Option<Time>| t.map(|t| t.0);
        let values = self.values.as_ref().map(|v| v.iter().map(|t| t.0).collect());
        resolve_range(name, values, unwrap(self.start), unwrap(self.stop), self.points)
    }
}

/// Sweep values sorted ascending.
fn resolve_range(
    name: &str,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
) -> Result<Vec<f64>, HarnessError> {
    let invalid = |msg: String| Err(HarnessError::Config(format!("sweep.{name}: {msg}")));
    let mut out = match (values, start, stop, points) {
        (Some(values), None, None, None) => values,
        (None, Some(start), Some(stop), Some(points)) => {
            if points == 0 {
                return invalid("points must be at least 1".into());
            }
            if stop < start {
                return invalid(format!("stop {stop} lies before start {start}"));
            }
            if points == 1 {
                vec![start]
            } else {
                (0..points)
                    .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
                    .collect()
            }
        }
        _ => return invalid("give either values = [...] or start, stop and points".into()),
    };
    if out.is_empty() {
        return invalid("sweep is empty".into());
    }
    if let Some(bad) = out.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return invalid(format!("values must be finite and non-negative, got {bad}"));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}
