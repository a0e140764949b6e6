//! Fitting effective memory parameters to measured observables.

use crate::analytics::{average_fidelity, efficiency_formula, CoherentAlphabet};
use crate::error::{Error, Result};
use crate::model::MemoryParams;

/// Slack above unity tolerated for a corrected efficiency.
const EFFICIENCY_SLACK: f64 = 0.02;

/// Relative tolerance of the κ bisection.
const KAPPA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredObservables {
    /// Efficiency seen at the detector.
    pub efficiency_measured: f64,
    /// Storage time at which the efficiency was measured.
    pub reference_storage_time: f64,
    /// Passive transmission between memory output and detector.
    pub external_transmission: f64,
    /// Memory lifetime.
    pub lifetime: f64,
    /// Average fidelity at `mean_photon`.
    pub fidelity_avg: f64,
    pub fidelity_uncertainty: f64,
    pub mean_photon: f64,
}

impl MeasuredObservables {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, what: &'static str| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::OutOfRange { value: v, reason: what })
            }
        };
        unit(self.efficiency_measured, "measured efficiency must lie in (0, 1]")?;
        unit(self.external_transmission, "external transmission must lie in (0, 1]")?;
        unit(self.fidelity_avg, "average fidelity must lie in (0, 1]")?;
        if !(self.reference_storage_time > 0.0) {
            return Err(Error::OutOfRange {
                value: self.reference_storage_time,
                reason: "reference storage time must be positive",
            });
        }
        if !(self.lifetime > 0.0) {
            return Err(Error::OutOfRange {
                value: self.lifetime,
                reason: "lifetime must be positive",
            });
        }
        if !(self.mean_photon >= 0.0) {
            return Err(Error::OutOfRange {
                value: self.mean_photon,
                reason: "mean photon number must be non-negative",
            });
        }
        Ok(())
    }
}

/// Internal efficiency after removing passive transmission losses.
pub fn external_correction(efficiency_measured: f64, external_transmission: f64) -> Result<f64> {
    if !(external_transmission > 0.0 && external_transmission <= 1.0) {
        return Err(Error::OutOfRange {
            value: external_transmission,
            reason: "external transmission must lie in (0, 1]",
        });
    }
    let internal = efficiency_measured / external_transmission;
    if !(internal <= 1.0 + EFFICIENCY_SLACK) {
        return Err(Error::OutOfRange {
            value: internal,
            reason: "corrected efficiency exceeds unity",
        });
    }
    Ok(internal)
}

/// e-folding time of the slow term of the efficiency curve,
/// `η ∝ exp(-2γ0 T0)`, i.e. `1/(2γ0)`.
pub fn lifetime_from_params(params: &MemoryParams) -> Result<f64> {
    if !(params.gamma0 > 0.0) {
        return Err(Error::Undefined("lifetime requires gamma0 > 0"));
    }
    Ok(1.0 / (2.0 * params.gamma0))
}

/// Inverse of [`lifetime_from_params`].
pub fn gamma0_from_lifetime(lifetime: f64) -> Result<f64> {
    if !(lifetime > 0.0 && lifetime.is_finite()) {
        return Err(Error::Undefined("lifetime must be positive and finite"));
    }
    Ok(1.0 / (2.0 * lifetime))
}

/// Fitted effective parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedFit {
    /// Coupling κ (reported positive; only κ² is observable).
    pub kappa: f64,
    pub gamma0: f64,
    /// Excess variance of the detected mode above vacuum, `V - 1/2`.
    pub excess_variance: f64,
    /// Efficiency after the external correction.
    pub efficiency_internal: f64,
}

impl CalibratedFit {
    /// Detected-mode quadrature variance.
    pub fn retrieved_variance(&self) -> f64 {
        0.5 + self.excess_variance
    }

    pub fn params(&self, gamma1: f64, gamma2: f64) -> Result<MemoryParams> {
        MemoryParams::new(self.gamma0, gamma1, gamma2, self.kappa)
    }
}

/// Largest efficiency reachable at `storage_time` by varying κ.
pub fn attainable_efficiency(gamma0: f64, gamma1: f64, gamma2: f64, storage_time: f64) -> f64 {
    (gamma1 * (-gamma0 * storage_time).exp() / (gamma0 + gamma1 + gamma2)).powi(2)
}

/// Finds κ > 0 such that the closed-form efficiency at `storage_time` equals
/// `target`, by bisection on κ².
///
/// Above the zero of the numerator the efficiency increases monotonically in
/// κ² towards [`attainable_efficiency`]; the search is restricted to that branch.
pub fn fit_kappa(gamma0: f64, gamma1: f64, gamma2: f64, storage_time: f64, target: f64) -> Result<f64> {
    let attainable = attainable_efficiency(gamma0, gamma1, gamma2, storage_time);
    if !(target > 0.0 && target < attainable) {
        return Err(Error::NoRoot { target, attainable });
    }
    let gamma = gamma1 + gamma2;
    let eta = |k2: f64| efficiency_formula(&MemoryParams::new(gamma0, gamma1, gamma2, k2.sqrt())?, storage_time);
    // zero of the numerator: κ² e^{-γ0 T0} = γ0² e^{-γ T0}
    let mut lo = gamma0 * gamma0 * ((gamma0 - gamma) * storage_time).exp();
    let mut hi = (gamma0 * gamma).max(gamma * gamma).max(lo * 2.0).max(f64::MIN_POSITIVE);
    while eta(hi)? < target {
        lo = hi;
        hi *= 4.0;
        if !hi.is_finite() {
            return Err(Error::NoRoot { target, attainable });
        }
    }
    // κ tolerance 1e-10 relative ⇔ κ² tolerance 2e-10 relative
    while hi - lo > 2.0 * KAPPA_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        if eta(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).sqrt())
}

/// Fits (κ, γ0, excess variance) to the observables for given cavity rates.
///
/// γ0 comes from the lifetime, κ from the efficiency at the reference storage
/// time, and the excess variance from inverting the average-fidelity formula
/// with amplitude gain `√η_measured`.
pub fn fit_from_observables(obs: &MeasuredObservables, gamma1: f64, gamma2: f64) -> Result<CalibratedFit> {
    obs.validate()?;
    MemoryParams::new(0.0, gamma1, gamma2, 0.0)?;
    let efficiency_internal = external_correction(obs.efficiency_measured, obs.external_transmission)?;
    let gamma0 = gamma0_from_lifetime(obs.lifetime)?;
    let kappa = fit_kappa(gamma0, gamma1, gamma2, obs.reference_storage_time, efficiency_internal)?;

    let loss = 1.0 - obs.efficiency_measured.sqrt();
    let variance = 0.5 * (2.0 / obs.fidelity_avg - 2.0 * obs.mean_photon * loss * loss - 1.0);
    if variance < 0.5 {
        let best = average_fidelity(&CoherentAlphabet::new(obs.mean_photon)?, 1.0 - loss, 0.5)?;
        return Err(Error::NoRoot {
            target: obs.fidelity_avg,
            attainable: best,
        });
    }
    Ok(CalibratedFit {
        kappa,
        gamma0,
        excess_variance: variance - 0.5,
        efficiency_internal,
    })
}

/// Observables a memory with these parameters would produce; the forward
/// model that [`fit_from_observables`] inverts.
pub fn generate_observables(
    params: &MemoryParams,
    retrieved_variance: f64,
    reference_storage_time: f64,
    external_transmission: f64,
    mean_photon: f64,
) -> Result<MeasuredObservables> {
    let internal = efficiency_formula(params, reference_storage_time)?;
    let measured = internal * external_transmission;
    let fidelity = average_fidelity(
        &CoherentAlphabet::new(mean_photon)?,
        measured.sqrt(),
        retrieved_variance,
    )?;
    Ok(MeasuredObservables {
        efficiency_measured: measured,
        reference_storage_time,
        external_transmission,
        lifetime: lifetime_from_params(params)?,
        fidelity_avg: fidelity,
        fidelity_uncertainty: 0.0,
        mean_photon,
    })
}
