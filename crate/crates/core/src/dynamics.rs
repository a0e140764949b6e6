//! Mean-field Langevin dynamics of the cavity mode and spin wave.
//!
//! ```text
//! da/dt = -γ a - iκ(t) S + √(2γ1) A_in + √(2γ2) A_v
//! dS/dt = -γ0 S - iκ(t) a + √(2γ0) S_v
//! A_out = √(2γ1) a - A_in
//! ```
//!
//! First moments are integrated directly with fixed-step RK4. Noise is handled
//! through the adjoint (backward) propagation of the same linear system, which
//! yields the coefficient of every input operator in the retrieved mode.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{integrate, quadrature_weight, ControlSchedule, MemoryParams, TemporalMode, TimeGrid, Window};

/// Upper bound on `dt · max(γ, |κ|, γ0)`.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Energies below this norm are treated as empty.
const EMPTY_NORM: f64 = 1e-12;

/// Slack below the vacuum variance before a variance is declared nonphysical.
const VACUUM_SLACK: f64 = 1e-4;

/// Cavity and spin amplitudes at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CavityState {
    pub cavity: Complex64,
    pub spin: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    cavity: Vec<Complex64>,
    spin: Vec<Complex64>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn cavity(&self) -> &[Complex64] {
        &self.cavity
    }

    pub fn spin(&self) -> &[Complex64] {
        &self.spin
    }

    pub fn state(&self, index: usize) -> CavityState {
        CavityState {
            cavity: self.cavity[index],
            spin: self.spin[index],
        }
    }
}

/// Output field `A_out = √(2γ1) a - A_in` on the grid.
///
/// The cavity emission and the input are kept apart so that the input can be
/// restricted to a window by support rather than by sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    grid: TimeGrid,
    emission: Vec<Complex64>,
    input: Option<TemporalMode>,
}

impl FieldRecord {
    /// Record whose output equals `output` (no separate input term).
    pub fn from_output(grid: TimeGrid, output: Vec<Complex64>) -> Result<Self> {
        if output.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(FieldRecord {
            grid,
            emission: output,
            input: None,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Output field at every grid point, input taken with its sampled values.
    pub fn output(&self) -> Vec<Complex64> {
        (0..self.grid.len())
            .map(|i| self.emission[i] - self.input.as_ref().map_or(Complex64::default(), |u| u.at(i)))
            .collect()
    }

    /// Output field on `window`. The input contributes only where its support
    /// overlaps the window over at least one step.
    pub fn output_on(&self, window: Window) -> Vec<Complex64> {
        let overlap = self
            .input
            .as_ref()
            .and_then(|u| u.support().intersect(&window).map(|w| (u, w)));
        (window.first..=window.last)
            .map(|i| {
                let reflected = match overlap {
                    Some((u, w)) if w.contains(i) => u.at(i),
                    _ => Complex64::default(),
                };
                self.emission[i] - reflected
            })
            .collect()
    }
}

/// Rejects grids too coarse for the fastest rate of the system.
pub fn check_stability(params: &MemoryParams, schedule: &ControlSchedule) -> Result<()> {
    let fastest = [
        params.gamma(),
        params.gamma0,
        schedule.write_kappa(params).abs(),
        schedule.read_kappa(params).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let ratio = schedule.grid().dt() * fastest;
    if ratio > STABILITY_LIMIT {
        return Err(Error::Instability {
            ratio,
            limit: STABILITY_LIMIT,
        });
    }
    Ok(())
}

type State = [Complex64; 2];

#[inline]
fn rhs(x: &State, kappa: f64, gamma: f64, gamma0: f64, drive: Complex64) -> State {
    let ik = Complex64::new(0.0, kappa);
    [-gamma * x[0] - ik * x[1] + drive, -gamma0 * x[1] - ik * x[0]]
}

#[inline]
fn axpy(x: &State, h: f64, k: &State) -> State {
    [x[0] + h * k[0], x[1] + h * k[1]]
}

/// One RK4 step with the cavity drive given at the start, midpoint and end.
#[inline]
fn rk4_step(x: &State, kappa: f64, gamma: f64, gamma0: f64, dt: f64, drive: [Complex64; 3]) -> State {
    let k1 = rhs(x, kappa, gamma, gamma0, drive[0]);
    let k2 = rhs(&axpy(x, 0.5 * dt, &k1), kappa, gamma, gamma0, drive[1]);
    let k3 = rhs(&axpy(x, 0.5 * dt, &k2), kappa, gamma, gamma0, drive[1]);
    let k4 = rhs(&axpy(x, dt, &k3), kappa, gamma, gamma0, drive[2]);
    let h = dt / 6.0;
    [
        x[0] + h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn ensure_grid(schedule: &ControlSchedule, mode: &TemporalMode) -> Result<()> {
    if mode.grid() != schedule.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Propagates the mean fields from zero initial conditions.
pub fn propagate(
    params: &MemoryParams,
    schedule: &ControlSchedule,
    input: &TemporalMode,
) -> Result<(Trajectory, FieldRecord)> {
    propagate_with(params, schedule, Some(input), CavityState::default())
}

/// Propagates the mean fields from `initial`, optionally driven by `input`.
pub fn propagate_with(
    params: &MemoryParams,
    schedule: &ControlSchedule,
    input: Option<&TemporalMode>,
    initial: CavityState,
) -> Result<(Trajectory, FieldRecord)> {
    params.validate()?;
    check_stability(params, schedule)?;
    if let Some(u) = input {
        ensure_grid(schedule, u)?;
    }
    let grid = *schedule.grid();
    let dt = grid.dt();
    let gamma = params.gamma();
    let coupling = (2.0 * params.gamma1).sqrt();

    let mut cavity = Vec::with_capacity(grid.len());
    let mut spin = Vec::with_capacity(grid.len());
    let mut x: State = [initial.cavity, initial.spin];
    cavity.push(x[0]);
    spin.push(x[1]);
    for i in 0..grid.steps() {
        let drive = match input {
            Some(u) if u.support().covers_step(i) => {
                [coupling * u.at(i), coupling * u.midpoint(i), coupling * u.at(i + 1)]
            }
            _ => [Complex64::default(); 3],
        };
        let kappa = schedule.kappa_on_step(i, params);
        x = rk4_step(&x, kappa, gamma, params.gamma0, dt, drive);
        cavity.push(x[0]);
        spin.push(x[1]);
    }
    let emission = cavity.iter().map(|a| coupling * a).collect();
    Ok((
        Trajectory { grid, cavity, spin },
        FieldRecord {
            grid,
            emission,
            input: input.cloned(),
        },
    ))
}

/// Ratio of output energy on `read_window` to input energy.
pub fn simulated_efficiency(record: &FieldRecord, input: &TemporalMode, read_window: Window) -> Result<f64> {
    let input_energy = input.norm_sqr();
    if input_energy.sqrt() < EMPTY_NORM {
        return Err(Error::EmptyInput(input_energy));
    }
    let out = record.output_on(read_window);
    let energy: Vec<f64> = out.iter().map(|z| z.norm_sqr()).collect();
    let output_energy = integrate(&energy, record.grid.dt());
    Ok(output_energy / input_energy)
}

/// Normalized output field on `read_window`.
pub fn retrieved_mode_shape(record: &FieldRecord, read_window: Window) -> Result<TemporalMode> {
    let out = record.output_on(read_window);
    let mode = TemporalMode::from_samples(record.grid, read_window.first, out)?;
    let energy = mode.norm_sqr();
    if !(energy.sqrt() >= EMPTY_NORM) {
        return Err(Error::EmptyOutput(energy));
    }
    mode.normalized()
}

/// Input-operator families that feed the retrieved mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelFamily {
    /// External input `A_in(t)` through the coupling mirror.
    ExternalInput,
    /// Vacuum entering through intracavity loss `A_v(t)`.
    LossVacuum,
    /// Spin-wave noise `S_v(t)`.
    SpinNoise,
    /// Cavity operator at the grid start.
    InitialCavity,
    /// Spin operator at the grid start.
    InitialSpin,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 5] = [
        ChannelFamily::ExternalInput,
        ChannelFamily::LossVacuum,
        ChannelFamily::SpinNoise,
        ChannelFamily::InitialCavity,
        ChannelFamily::InitialSpin,
    ];
}

/// Continuous kernel of one channel family over a window; discretized into
/// channels with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
struct KernelPiece {
    family: ChannelFamily,
    window: Window,
    kernel: Vec<Complex64>,
}

/// One discretized input channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub family: ChannelFamily,
    pub time: f64,
    pub coefficient: Complex64,
}

/// Coefficients of every discretized input operator in the retrieved-mode
/// operator `b = ∫ v*(t) A_out(t) dt`.
///
/// For a passive system with all channels enumerated, `Σ|c_k|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMap {
    grid: TimeGrid,
    pieces: Vec<KernelPiece>,
    initial_cavity: Option<Complex64>,
    initial_spin: Option<Complex64>,
}

impl TransferMap {
    pub fn channels(&self) -> Vec<Channel> {
        let dt = self.grid.dt();
        let mut out = Vec::new();
        if let Some(c) = self.initial_cavity {
            out.push(Channel {
                family: ChannelFamily::InitialCavity,
                time: self.grid.t_start(),
                coefficient: c,
            });
        }
        if let Some(c) = self.initial_spin {
            out.push(Channel {
                family: ChannelFamily::InitialSpin,
                time: self.grid.t_start(),
                coefficient: c,
            });
        }
        for piece in &self.pieces {
            for (k, g) in piece.kernel.iter().enumerate() {
                let i = piece.window.first + k;
                let w = quadrature_weight(&piece.window, i, dt);
                if w > 0.0 {
                    out.push(Channel {
                        family: piece.family,
                        time: self.grid.time(i),
                        coefficient: g * w.sqrt(),
                    });
                }
            }
        }
        out
    }

    pub fn coefficients(&self, family: ChannelFamily) -> Vec<Complex64> {
        self.channels()
            .into_iter()
            .filter(|c| c.family == family)
            .map(|c| c.coefficient)
            .collect()
    }

    pub fn family_weight(&self, family: ChannelFamily) -> f64 {
        let dt = self.grid.dt();
        match family {
            ChannelFamily::InitialCavity => self.initial_cavity.map_or(0.0, |c| c.norm_sqr()),
            ChannelFamily::InitialSpin => self.initial_spin.map_or(0.0, |c| c.norm_sqr()),
            _ => self
                .pieces
                .iter()
                .filter(|p| p.family == family)
                .map(|p| integrate(&p.kernel.iter().map(|g| g.norm_sqr()).collect::<Vec<_>>(), dt))
                .sum(),
        }
    }

    /// Total weight `W = Σ|c_k|²` over all enumerated channels.
    pub fn total_weight(&self) -> f64 {
        ChannelFamily::ALL.iter().map(|&f| self.family_weight(f)).sum()
    }

    /// Copy of the map with one family removed.
    pub fn without_family(&self, family: ChannelFamily) -> TransferMap {
        let mut map = self.clone();
        map.pieces.retain(|p| p.family != family);
        match family {
            ChannelFamily::InitialCavity => map.initial_cavity = None,
            ChannelFamily::InitialSpin => map.initial_spin = None,
            _ => {}
        }
        map
    }

    /// Projection of the external-input kernel onto an input mode,
    /// `∫ g_in(t) u(t) dt`: the retrieved amplitude per unit input amplitude.
    pub fn input_mode_coefficient(&self, input: &TemporalMode) -> Result<Complex64> {
        if input.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let dt = self.grid.dt();
        let support = input.support();
        Ok(self
            .pieces
            .iter()
            .filter(|p| p.family == ChannelFamily::ExternalInput)
            .filter_map(|p| p.window.intersect(&support).map(|w| (p, w)))
            .map(|(p, w)| {
                (w.first..=w.last)
                    .map(|i| p.kernel[i - p.window.first] * input.at(i) * quadrature_weight(&w, i, dt))
                    .sum::<Complex64>()
            })
            .sum())
    }
}

/// Builds the transfer map of `retrieved` by one backward propagation.
///
/// With `λ(t)` the adjoint row vector,
/// `λ' = -λ M - √(2γ1) v*(t)·e_a`, `λ(T) = 0`, the coefficients are
/// `√(2γ1) λ_a - v*` (external input), `√(2γ2) λ_a` (loss), `√(2γ0) λ_S`
/// (spin noise), and `λ(t_0)` for the initial operators.
pub fn adjoint_transfer(
    params: &MemoryParams,
    schedule: &ControlSchedule,
    retrieved: &TemporalMode,
) -> Result<TransferMap> {
    params.validate()?;
    check_stability(params, schedule)?;
    ensure_grid(schedule, retrieved)?;
    let grid = *schedule.grid();
    let dt = grid.dt();
    let gamma = params.gamma();
    let c1 = (2.0 * params.gamma1).sqrt();
    let c2 = (2.0 * params.gamma2).sqrt();
    let c0 = (2.0 * params.gamma0).sqrt();
    let window = retrieved.support();
    let end = window.last;

    let mut lam_a = vec![Complex64::default(); end + 1];
    let mut lam_s = vec![Complex64::default(); end + 1];
    let mut mu: State = [Complex64::default(); 2];
    // M is complex symmetric, so λᵀ obeys the forward equations in reversed
    // time, driven by √(2γ1) v*.
    for i in (0..end).rev() {
        let drive = if window.covers_step(i) {
            [
                c1 * retrieved.at(i + 1).conj(),
                c1 * retrieved.midpoint(i).conj(),
                c1 * retrieved.at(i).conj(),
            ]
        } else {
            [Complex64::default(); 3]
        };
        let kappa = schedule.kappa_on_step(i, params);
        mu = rk4_step(&mu, kappa, gamma, params.gamma0, dt, drive);
        lam_a[i] = mu[0];
        lam_s[i] = mu[1];
    }

    // Kernels have kinks where κ switches and where the retrieved mode starts;
    // pieces break there so each is integrated as a smooth function.
    let mut breaks = vec![
        0,
        schedule.write_window().last,
        schedule.read_window().first,
        window.first,
        end,
    ];
    breaks.retain(|&b| b <= end);
    breaks.sort_unstable();
    breaks.dedup();
    let mut pieces = Vec::with_capacity(3 * breaks.len());
    for seg in breaks.windows(2).map(|b| Window::new(b[0], b[1])) {
        let range = seg.first..=seg.last;
        let input_kernel = if seg.first >= window.first {
            range.clone().map(|i| c1 * lam_a[i] - retrieved.at(i).conj()).collect()
        } else {
            range.clone().map(|i| c1 * lam_a[i]).collect()
        };
        pieces.push(KernelPiece {
            family: ChannelFamily::ExternalInput,
            window: seg,
            kernel: input_kernel,
        });
        pieces.push(KernelPiece {
            family: ChannelFamily::LossVacuum,
            window: seg,
            kernel: range.clone().map(|i| c2 * lam_a[i]).collect(),
        });
        pieces.push(KernelPiece {
            family: ChannelFamily::SpinNoise,
            window: seg,
            kernel: range.map(|i| c0 * lam_s[i]).collect(),
        });
    }

    Ok(TransferMap {
        grid,
        pieces,
        initial_cavity: Some(lam_a[0]),
        initial_spin: Some(lam_s[0]),
    })
}

/// Quadrature variances of the retrieved mode:
/// `V = W/2 + ε · Σ_spin |c_k|²` for both quadratures.
pub fn retrieved_variance(map: &TransferMap, excess_noise: f64) -> Result<(f64, f64)> {
    if !(excess_noise >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "excess noise must be non-negative, got {excess_noise}"
        )));
    }
    let v = 0.5 * map.total_weight() + excess_noise * map.family_weight(ChannelFamily::SpinNoise);
    if v < 0.5 - VACUUM_SLACK {
        return Err(Error::NonPhysical { variance: v });
    }
    Ok((v, v))
}
