//! Closed-form memory figures of merit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::MemoryParams;

/// Mean quadratures and per-quadrature variances (vacuum = 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl GaussianState {
    /// Coherent state `|α⟩`: means `(√2 Re α, √2 Im α)`, variances 1/2.
    pub fn coherent(alpha: Complex64) -> Self {
        let (mean_x, mean_y) = quadrature_means(alpha);
        GaussianState {
            mean_x,
            mean_y,
            var_x: 0.5,
            var_y: 0.5,
        }
    }

    /// Output of a memory with amplitude gain `gain` and symmetric variance.
    pub fn attenuated(alpha: Complex64, gain: f64, variance: f64) -> Self {
        let (mean_x, mean_y) = quadrature_means(alpha * gain);
        GaussianState {
            mean_x,
            mean_y,
            var_x: variance,
            var_y: variance,
        }
    }

    /// Checks the uncertainty relation `var_x · var_y ≥ 1/4`.
    pub fn validate(&self) -> Result<()> {
        let product = self.var_x * self.var_y;
        if !(self.var_x > 0.0 && self.var_y > 0.0 && product >= 0.25 - 1e-12) {
            return Err(Error::NonPhysicalState { product });
        }
        Ok(())
    }
}

fn quadrature_means(alpha: Complex64) -> (f64, f64) {
    let s = std::f64::consts::SQRT_2;
    (s * alpha.re, s * alpha.im)
}

/// Isotropic Gaussian distribution of coherent amplitudes with mean photon
/// number `mean_photon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAlphabet {
    pub mean_photon: f64,
}

impl CoherentAlphabet {
    pub fn new(mean_photon: f64) -> Result<Self> {
        if !(mean_photon >= 0.0 && mean_photon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean photon number must be non-negative, got {mean_photon}"
            )));
        }
        Ok(CoherentAlphabet { mean_photon })
    }
}

/// Memory efficiency after storage time `T0`:
///
/// ```text
/// η(T0) = (-γ1 γ0² e^{-γ T0} + γ1 κ² e^{-γ0 T0})² / ((γ0 + γ)² (κ² + γ0 γ)²)
/// ```
pub fn efficiency_formula(params: &MemoryParams, storage_time: f64) -> Result<f64> {
    params.validate()?;
    if !(storage_time >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "storage time must be non-negative, got {storage_time}"
        )));
    }
    let MemoryParams {
        gamma0: g0,
        gamma1: g1,
        kappa,
        ..
    } = *params;
    let g = params.gamma();
    let k2 = kappa * kappa;
    if k2 == 0.0 && g0 == 0.0 {
        return Err(Error::DegenerateFormula);
    }
    let numerator = -g1 * g0 * g0 * (-g * storage_time).exp() + g1 * k2 * (-g0 * storage_time).exp();
    let denominator = (g0 + g) * (k2 + g0 * g);
    Ok((numerator / denominator).powi(2))
}

/// Best average fidelity of a measure-and-prepare memory over a Gaussian
/// coherent-state alphabet: `(1 + n̄) / (1 + 2n̄)`.
pub fn classical_benchmark(mean_photon: f64) -> Result<f64> {
    let n = CoherentAlphabet::new(mean_photon)?.mean_photon;
    Ok((1.0 + n) / (1.0 + 2.0 * n))
}

/// Fidelity between the coherent state `|α⟩` and a Gaussian output state:
///
/// ```text
/// F = 2/√((1+2Vx)(1+2Vy)) · exp(-δx²/(1+2Vx) - δy²/(1+2Vy))
/// ```
pub fn gaussian_fidelity(input_alpha: Complex64, output: &GaussianState) -> Result<f64> {
    output.validate()?;
    let (x, y) = quadrature_means(input_alpha);
    let dx = x - output.mean_x;
    let dy = y - output.mean_y;
    let sx = 1.0 + 2.0 * output.var_x;
    let sy = 1.0 + 2.0 * output.var_y;
    Ok(2.0 / (sx * sy).sqrt() * (-dx * dx / sx - dy * dy / sy).exp())
}

/// Average of [`gaussian_fidelity`] over the alphabet for a memory mapping
/// `α → gain·α` with symmetric output variance:
/// `F̄ = 2 / ((1+2V) + 2n̄(1-g)²)`.
pub fn average_fidelity(alphabet: &CoherentAlphabet, gain: f64, variance: f64) -> Result<f64> {
    let n = CoherentAlphabet::new(alphabet.mean_photon)?.mean_photon;
    if !(0.0..=1.0).contains(&gain) {
        return Err(Error::InvalidParameter(format!("gain must lie in [0, 1], got {gain}")));
    }
    if !(variance >= 0.5 - 1e-9) {
        return Err(Error::NonPhysical { variance });
    }
    let loss = 1.0 - gain;
    Ok(2.0 / ((1.0 + 2.0 * variance) + 2.0 * n * loss * loss))
}

/// Largest mean photon number at which the average fidelity equals the
/// classical benchmark; above it the benchmark wins. `None` if the two never
/// meet for `n̄ > 0`.
///
/// With `V > 1/2` there is a second, small crossing near `n̄ = 0`, where the
/// benchmark tends to 1 and the average fidelity to `2/(1+2V)`.
pub fn benchmark_crossing(gain: f64, variance: f64) -> Option<f64> {
    // 2(1+2n) = (1+n)(c + d n)  with c = 1+2V, d = 2(1-g)²
    let c = 1.0 + 2.0 * variance;
    let d = 2.0 * (1.0 - gain).powi(2);
    let (qa, qb, qc) = (d, c + d - 4.0, c - 2.0);
    if qa == 0.0 {
        return (qb != 0.0).then(|| -qc / qb).filter(|n| *n > 0.0);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    [(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)]
        .into_iter()
        .filter(|n| *n > 1e-12)
        .reduce(f64::max)
}

/// Fidelity `⟨α|ρ|α⟩` evaluated in a truncated Fock basis, with `ρ` the
/// displaced thermal state matching `output` (symmetric variances only).
pub fn fock_fidelity_oracle(input_alpha: Complex64, output: &GaussianState, truncation: usize) -> Result<f64> {
    output.validate()?;
    if (output.var_x - output.var_y).abs() > 1e-12 {
        return Err(Error::Unsupported("Fock oracle requires var_x == var_y"));
    }
    if truncation < 20 {
        return Err(Error::TruncationTooSmall {
            truncation,
            tail: f64::NAN,
        });
    }
    let dim = truncation + 1;
    let thermal = (output.var_x - 0.5).max(0.0);
    let ratio = thermal / (1.0 + thermal);
    let beta = Complex64::new(output.mean_x, output.mean_y) / std::f64::consts::SQRT_2;

    let mut tail = ratio.powi(dim as i32);
    let alpha_ket = coherent_ket(input_alpha, dim);
    tail += (1.0 - alpha_ket.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0);

    // D(β)|n⟩ = (a† - β*)^n |β⟩ / √n!
    let mut phi = coherent_ket(beta, dim);
    let mut weight = 1.0 - ratio;
    let mut fidelity = 0.0;
    for n in 0..dim {
        if n > 0 {
            phi = raise_shifted(&phi, beta.conj(), n);
            weight *= ratio;
        }
        if weight < 1e-300 {
            break;
        }
        let norm: f64 = phi.iter().map(|c| c.norm_sqr()).sum();
        tail += weight * (1.0 - norm).max(0.0);
        let amp: Complex64 = alpha_ket.iter().zip(&phi).map(|(a, p)| a.conj() * p).sum();
        fidelity += weight * amp.norm_sqr();
    }
    if tail > 1e-10 {
        return Err(Error::TruncationTooSmall { truncation, tail });
    }
    Ok(fidelity)
}

fn coherent_ket(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut ket = Vec::with_capacity(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 0..dim {
        if m > 0 {
            c = c * alpha / (m as f64).sqrt();
        }
        ket.push(c);
    }
    ket
}

/// `(a† - shift) ψ / √n` in the truncated basis.
fn raise_shifted(psi: &[Complex64], shift: Complex64, n: usize) -> Vec<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..psi.len())
        .map(|m| {
            let raised = if m > 0 {
                psi[m - 1] * (m as f64).sqrt()
            } else {
                Complex64::default()
            };
            (raised - shift * psi[m]) * scale
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(g0: f64, g1: f64, g2: f64, k: f64) -> MemoryParams {
        MemoryParams::new(g0, g1, g2, k).unwrap()
    }

    #[test]
    fn efficiency_lossless_spin_limit() {
        let p = params(0.0, 1.0, 0.25, 0.7);
        let expected = (1.0f64 / 1.25).powi(2);
        for t0 in [0.0, 0.3, 10.0 / p.gamma(), 1e3] {
            assert_relative_eq!(efficiency_formula(&p, t0).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn efficiency_reference_value() {
        // 40-digit evaluation: 0.699369461907036996...
        let eta = efficiency_formula(&params(0.05, 1.0, 0.1, 2.0), 0.5).unwrap();
        assert!((eta - 0.699_369_461_907_037).abs() < 1e-13);
    }

    #[test]
    fn efficiency_vanishes_at_long_storage() {
        let p = params(0.05, 1.0, 0.1, 2.0);
        assert!(efficiency_formula(&p, 1e4).unwrap() < 1e-100);
        assert_eq!(
            efficiency_formula(&params(0.0, 1.0, 0.1, 0.0), 1.0),
            Err(Error::DegenerateFormula)
        );
    }

    #[test]
    fn benchmark_values() {
        assert_eq!(classical_benchmark(0.0).unwrap(), 1.0);
        assert!((classical_benchmark(0.6).unwrap() - 0.727_272_727).abs() < 1e-9);
        assert_relative_eq!(classical_benchmark(8.0).unwrap(), 9.0 / 17.0, max_relative = 1e-15);
        assert!(classical_benchmark(-0.1).is_err());
    }

    #[test]
    fn gaussian_fidelity_examples() {
        let alpha = Complex64::new(0.7, -0.4);
        assert_relative_eq!(
            gaussian_fidelity(alpha, &GaussianState::coherent(alpha)).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        let displaced = GaussianState {
            mean_x: 1.0,
            mean_y: 0.0,
            var_x: 0.5,
            var_y: 0.5,
        };
        assert_relative_eq!(
            gaussian_fidelity(Complex64::default(), &displaced).unwrap(),
            (-0.5f64).exp(),
            max_relative = 1e-15
        );
        let out = GaussianState::attenuated(Complex64::new(1.0, 0.0), 0.5, 0.5);
        assert_relative_eq!(
            gaussian_fidelity(Complex64::new(1.0, 0.0), &out).unwrap(),
            (-0.25f64).exp(),
            max_relative = 1e-15
        );
        let squeezed_too_far = GaussianState {
            var_x: 0.2,
            var_y: 0.5,
            ..displaced
        };
        assert!(matches!(
            gaussian_fidelity(Complex64::default(), &squeezed_too_far),
            Err(Error::NonPhysicalState { .. })
        ));
    }

    #[test]
    fn average_fidelity_examples() {
        let a = |n| CoherentAlphabet::new(n).unwrap();
        for n in [0.0, 0.6, 8.0, 100.0] {
            assert_eq!(average_fidelity(&a(n), 1.0, 0.5).unwrap(), 1.0);
        }
        let g = 0.67f64.sqrt();
        assert!((average_fidelity(&a(0.6), g, 0.5).unwrap() - 0.9806).abs() < 1e-4);
        let f8 = average_fidelity(&a(8.0), g, 0.5).unwrap();
        assert!((f8 - 0.7915).abs() < 1e-4);
        assert!(f8 > classical_benchmark(8.0).unwrap());
        assert!(average_fidelity(&a(0.6), 1.2, 0.5).is_err());
        assert!(average_fidelity(&a(0.6), 0.5, 0.3).is_err());
    }

    #[test]
    fn crossing_matches_estimate_at_vacuum_noise() {
        let g = 0.67f64.sqrt();
        let a = (1.0 - g).powi(2) * 2.0 / 2.0;
        let exact = benchmark_crossing(g, 0.5).unwrap();
        assert_relative_eq!(exact, (1.0 - a) / a, max_relative = 1e-12);
        let fa = average_fidelity(&CoherentAlphabet::new(exact).unwrap(), g, 0.5).unwrap();
        assert_relative_eq!(fa, classical_benchmark(exact).unwrap(), max_relative = 1e-12);
        assert_eq!(benchmark_crossing(1.0, 0.5), None);
    }

    #[test]
    fn excess_noise_adds_a_small_crossing() {
        let (g, v) = (0.67f64.sqrt(), 0.51);
        let upper = benchmark_crossing(g, v).unwrap();
        assert!(upper > 8.0);
        let f = |n: f64| average_fidelity(&CoherentAlphabet::new(n).unwrap(), g, v).unwrap();
        let b = |n: f64| classical_benchmark(n).unwrap();
        assert!((f(upper) - b(upper)).abs() < 1e-12);
        assert!(f(1e-3) < b(1e-3));
        assert!(f(0.16) > b(0.16));
        assert!(f(upper * 1.1) < b(upper * 1.1));
    }

    #[test]
    fn fock_oracle_examples() {
        let vac = GaussianState::coherent(Complex64::default());
        assert!((fock_fidelity_oracle(Complex64::default(), &vac, 60).unwrap() - 1.0).abs() < 1e-10);
        let thermal = GaussianState {
            var_x: 1.0,
            var_y: 1.0,
            ..vac
        };
        assert!((fock_fidelity_oracle(Complex64::default(), &thermal, 60).unwrap() - 2.0 / 3.0).abs() < 1e-10);
        let alpha = Complex64::new(1.0, 0.0);
        let out = GaussianState::attenuated(alpha, 0.5, 0.5);
        let f = fock_fidelity_oracle(alpha, &out, 60).unwrap();
        assert!((f - (-0.25f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn fock_oracle_guards() {
        let asym = GaussianState {
            mean_x: 0.0,
            mean_y: 0.0,
            var_x: 0.6,
            var_y: 0.7,
        };
        assert!(matches!(
            fock_fidelity_oracle(Complex64::default(), &asym, 60),
            Err(Error::Unsupported(_))
        ));
        let far = GaussianState::coherent(Complex64::new(6.0, 0.0));
        assert!(matches!(
            fock_fidelity_oracle(Complex64::new(6.0, 0.0), &far, 20),
            Err(Error::TruncationTooSmall { .. })
        ));
    }
}
