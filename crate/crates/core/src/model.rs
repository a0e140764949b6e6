//! Physical parameters, time grids, temporal modes and control schedules.
//!
//! Quadratures follow `X = (a + a†)/√2`, `Y = (a - a†)/(√2 i)`, so the vacuum
//! variance is 1/2 per quadrature. All rates are angular (1/s).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance on the step count when checking that a grid span is an
/// integer number of steps.
const STEP_COUNT_SLACK: f64 = 1e-6;

/// Mirror transmission, round-trip loss and round-trip time of the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    pub mirror_transmission: f64,
    pub round_trip_loss: f64,
    pub round_trip_time: f64,
}

/// Input coupling rate, loss rate and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityRates {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma: f64,
}

/// `γ1 = T/(2τ)`, `γ2 = L/(2τ)`, `γ = γ1 + γ2`.
pub fn derive_rates(geometry: &CavityGeometry) -> Result<CavityRates> {
    let CavityGeometry {
        mirror_transmission: t,
        round_trip_loss: l,
        round_trip_time: tau,
    } = *geometry;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "round-trip time must be positive, got {tau}"
        )));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidGeometry(format!(
            "mirror transmission must lie in (0, 1], got {t}"
        )));
    }
    if !(0.0..1.0).contains(&l) {
        return Err(Error::InvalidGeometry(format!(
            "round-trip loss must lie in [0, 1), got {l}"
        )));
    }
    if t + l > 1.0 + 1e-12 {
        return Err(Error::InvalidGeometry(format!(
            "transmission plus loss exceeds unity ({})",
            t + l
        )));
    }
    let gamma1 = t / (2.0 * tau);
    let gamma2 = l / (2.0 * tau);
    Ok(CavityRates {
        gamma1,
        gamma2,
        gamma: gamma1 + gamma2,
    })
}

/// Microscopic constants entering the effective light-atom coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub atom_number: f64,
    pub coupling_constant: f64,
    pub rabi_frequency: f64,
    pub detuning: f64,
}

/// `κ = √N_a · µ · Ω / Δ`. The sign of the detuning is carried through.
pub fn derive_coupling(spec: &CouplingSpec) -> Result<f64> {
    if spec.detuning == 0.0 {
        return Err(Error::DivideByZero("detuning is zero"));
    }
    if !(spec.atom_number > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "atom number must be positive, got {}",
            spec.atom_number
        )));
    }
    Ok(spec.atom_number.sqrt() * spec.coupling_constant * spec.rabi_frequency / spec.detuning)
}

/// Effective rates of the memory.
///
/// The total cavity rate is not stored; [`MemoryParams::gamma`] always returns
/// `gamma1 + gamma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryParams {
    /// Spin-wave decoherence rate γ0.
    pub gamma0: f64,
    /// Input-mirror coupling rate γ1.
    pub gamma1: f64,
    /// Intracavity loss rate γ2.
    pub gamma2: f64,
    /// Effective light-atom coupling κ.
    pub kappa: f64,
    /// Excess noise on the spin-noise channel, in vacuum-variance units.
    pub excess_noise: f64,
}

impl MemoryParams {
    pub fn new(gamma0: f64, gamma1: f64, gamma2: f64, kappa: f64) -> Result<Self> {
        let params = MemoryParams {
            gamma0,
            gamma1,
            gamma2,
            kappa,
            excess_noise: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from a cavity geometry. A directly supplied `kappa`
    /// takes precedence over one derived from `coupling`.
    pub fn from_geometry(
        geometry: &CavityGeometry,
        coupling: Option<&CouplingSpec>,
        kappa: Option<f64>,
        gamma0: f64,
    ) -> Result<Self> {
        let rates = derive_rates(geometry)?;
        let kappa = match (kappa, coupling) {
            (Some(k), _) => k,
            (None, Some(spec)) => derive_coupling(spec)?,
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "either kappa or a coupling spec is required".into(),
                ))
            }
        };
        MemoryParams::new(gamma0, rates.gamma1, rates.gamma2, kappa)
    }

    pub fn with_excess_noise(mut self, excess_noise: f64) -> Result<Self> {
        self.excess_noise = excess_noise;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma0, self.gamma1, self.gamma2, self.kappa, self.excess_noise]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("rates must be finite".into()));
        }
        if !(self.gamma1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma1 must be positive, got {}",
                self.gamma1
            )));
        }
        if self.gamma0 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::InvalidParameter("decay rates must be non-negative".into()));
        }
        if self.excess_noise < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "excess noise must be non-negative, got {}",
                self.excess_noise
            )));
        }
        Ok(())
    }
}

/// Uniform time grid `t_start + i·dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {dt}")));
        }
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("grid bounds must be finite".into()));
        }
        let span = (t_end - t_start) / dt;
        let steps = span.round();
        if (span - steps).abs() > STEP_COUNT_SLACK * steps.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "span {} s is not an integer number of {dt} s steps",
                t_end - t_start
            )));
        }
        if steps < 2.0 {
            return Err(Error::InvalidGrid(format!("grid needs at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid {
            t_start,
            dt,
            steps: steps as usize,
        })
    }

    /// Grid with a given number of steps.
    pub fn with_steps(t_start: f64, dt: f64, steps: usize) -> Result<Self> {
        TimeGrid::new(t_start, t_start + dt * steps as f64, dt)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points (`steps + 1`).
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t_start + self.dt * index as f64
    }

    /// Nearest grid index of `t`, or `None` when `t` lies off the grid by more
    /// than half a step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = ((t - self.t_start) / self.dt).round();
        if x < 0.0 || x > self.steps as f64 {
            None
        } else {
            Some(x as usize)
        }
    }

    /// Same origin and step; lengths may differ.
    pub fn is_aligned_with(&self, other: &TimeGrid) -> bool {
        self.dt == other.dt && self.t_start == other.t_start
    }
}

/// Closed range of grid indices `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub first: usize,
    pub last: usize,
}

impl Window {
    pub fn new(first: usize, last: usize) -> Self {
        debug_assert!(first <= last);
        Window { first, last }
    }

    /// Number of steps spanned.
    pub fn span(&self) -> usize {
        self.last - self.first
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.first && index <= self.last
    }

    /// Overlap of two windows, kept only when it spans at least one step.
    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let first = self.first.max(other.first);
        let last = self.last.min(other.last);
        (last > first).then_some(Window { first, last })
    }

    /// Whether the step `[index, index + 1]` lies inside the window.
    pub fn covers_step(&self, index: usize) -> bool {
        index >= self.first && index < self.last
    }
}

/// Quadrature weight of point `index` inside `window`.
///
/// Trapezoid rule with end corrections (3/8, 7/6, 23/24 on the three outer
/// points at each end), exact for cubics. Windows of fewer than five steps use
/// the closed Newton-Cotes rule of matching length.
pub(crate) fn quadrature_weight(window: &Window, index: usize, dt: f64) -> f64 {
    const SHORT: [&[f64]; 5] = [
        &[],
        &[0.5, 0.5],
        &[1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        &[3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0],
        &[14.0 / 45.0, 64.0 / 45.0, 24.0 / 45.0, 64.0 / 45.0, 14.0 / 45.0],
    ];
    const ENDS: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    let n = window.span();
    if n == 0 || !window.contains(index) {
        return 0.0;
    }
    let k = index - window.first;
    let w = match SHORT.get(n) {
        Some(rule) => rule[k],
        None => ENDS.get(k.min(n - k)).copied().unwrap_or(1.0),
    };
    w * dt
}

/// Integral of uniformly spaced real samples.
pub(crate) fn integrate(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let window = Window::new(0, values.len() - 1);
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * quadrature_weight(&window, i, dt))
        .sum()
}

/// Complex pulse envelope sampled on a [`TimeGrid`], zero outside its support.
///
/// Integrals run over the support only, so a hard cutoff at the edge of the
/// support is not smeared across the neighbouring step.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMode {
    grid: TimeGrid,
    offset: usize,
    samples: Vec<Complex64>,
}

impl TemporalMode {
    /// Samples covering grid indices `offset..offset + samples.len()`.
    pub fn from_samples(grid: TimeGrid, offset: usize, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DegenerateMode(format!(
                "support holds {} grid points, need at least 2",
                samples.len()
            )));
        }
        if offset + samples.len() > grid.len() {
            return Err(Error::DegenerateMode("support extends past the grid".into()));
        }
        Ok(TemporalMode { grid, offset, samples })
    }

    /// Samples a function of time over `window`.
    pub fn from_fn<F>(grid: TimeGrid, window: Window, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Complex64,
    {
        let samples = (window.first..=window.last).map(|i| f(grid.time(i))).collect();
        TemporalMode::from_samples(grid, window.first, samples)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn support(&self) -> Window {
        Window::new(self.offset, self.offset + self.samples.len() - 1)
    }

    /// Samples on the support.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Value at grid index `index`; zero outside the support.
    pub fn at(&self, index: usize) -> Complex64 {
        index
            .checked_sub(self.offset)
            .and_then(|k| self.samples.get(k))
            .copied()
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        let values: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        integrate(&values, self.grid.dt())
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateMode(format!("cannot normalize, norm = {norm}")));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        TemporalMode {
            grid: self.grid,
            offset: self.offset,
            samples: self.samples.iter().map(|z| z * factor).collect(),
        }
    }

    /// Same samples on an aligned grid (same origin and step). The support must
    /// fit the new grid.
    pub fn rebased(&self, grid: TimeGrid) -> Result<Self> {
        if !self.grid.is_aligned_with(&grid) {
            return Err(Error::GridMismatch);
        }
        TemporalMode::from_samples(grid, self.offset, self.samples.clone())
    }

    /// Midpoint value between samples `index` and `index + 1` (grid indices),
    /// interpolated from up to four neighbouring samples inside the support.
    pub(crate) fn midpoint(&self, index: usize) -> Complex64 {
        let s = &self.samples;
        let j = index - self.offset;
        let n = s.len();
        let has_prev = j >= 1;
        let has_next = j + 2 < n;
        match (has_prev, has_next) {
            (true, true) => (-s[j - 1] + 9.0 * s[j] + 9.0 * s[j + 1] - s[j + 2]) / 16.0,
            (false, true) => (3.0 * s[j] + 6.0 * s[j + 1] - s[j + 2]) / 8.0,
            (true, false) => (-s[j - 1] + 6.0 * s[j] + 3.0 * s[j + 1]) / 8.0,
            (false, false) => 0.5 * (s[j] + s[j + 1]),
        }
    }
}

/// `u(t) ∝ exp(λ (t - t_c))` for `t ≤ t_c`, zero afterwards, unit norm.
pub fn make_rising_exponential(rate: f64, cutoff: f64, grid: TimeGrid) -> Result<TemporalMode> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponential rate must be positive, got {rate}"
        )));
    }
    let half = 0.5 * grid.dt();
    if cutoff < grid.t_start() - half {
        return Err(Error::DegenerateMode("cutoff precedes the grid".into()));
    }
    if cutoff > grid.t_end() + half {
        return Err(Error::InvalidParameter("cutoff lies beyond the grid".into()));
    }
    let last = grid.index_of(cutoff).unwrap_or(0);
    if last < 1 {
        return Err(Error::DegenerateMode(
            "support contains fewer than 2 grid points".into(),
        ));
    }
    let t_c = grid.time(last);
    TemporalMode::from_fn(grid, Window::new(0, last), |t| {
        Complex64::new((rate * (t - t_c)).exp(), 0.0)
    })?
    .normalized()
}

/// Flat-top pulse over `window`, unit norm.
pub fn make_flat_top(grid: TimeGrid, window: Window) -> Result<TemporalMode> {
    TemporalMode::from_fn(grid, window, |_| Complex64::new(1.0, 0.0))?.normalized()
}

/// `∫ u*(t) v(t) dt` over the common support.
pub fn mode_overlap(u: &TemporalMode, v: &TemporalMode) -> Result<Complex64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    let Some(common) = u.support().intersect(&v.support()) else {
        return Ok(Complex64::default());
    };
    let dt = u.grid.dt();
    Ok((common.first..=common.last)
        .map(|i| u.at(i).conj() * v.at(i) * quadrature_weight(&common, i, dt))
        .sum())
}

/// Piecewise-constant control: κ on during the write window, off for the
/// storage time, on again for the read window.
///
/// Boundaries are snapped to the nearest grid point. Write starts at the grid
/// origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSchedule {
    grid: TimeGrid,
    write_end: usize,
    read_start: usize,
    read_end: usize,
    write_kappa: Option<f64>,
    read_kappa: Option<f64>,
}

impl ControlSchedule {
    pub fn new(grid: TimeGrid, write_end: f64, storage_time: f64, read_end: f64) -> Result<Self> {
        if !(storage_time >= 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "storage time must be non-negative, got {storage_time}"
            )));
        }
        if !(read_end > write_end + storage_time) {
            return Err(Error::InvalidSchedule(
                "read window must end after the hold interval".into(),
            ));
        }
        let locate = |t: f64, what: &str| {
            grid.index_of(t)
                .ok_or_else(|| Error::InvalidSchedule(format!("{what} = {t} s lies outside the grid")))
        };
        let write_end_idx = locate(write_end, "write end")?;
        let read_start_idx = locate(write_end + storage_time, "read start")?;
        let read_end_idx = locate(read_end, "read end")?;
        if write_end_idx == 0 {
            return Err(Error::InvalidSchedule("write window is empty".into()));
        }
        if read_end_idx <= read_start_idx {
            return Err(Error::InvalidSchedule("read window is empty".into()));
        }
        Ok(ControlSchedule {
            grid,
            write_end: write_end_idx,
            read_start: read_start_idx,
            read_end: read_end_idx,
            write_kappa: None,
            read_kappa: None,
        })
    }

    /// Schedule with write window `[0, write]`, hold `storage`, read window of
    /// length `read`, on a grid that ends with the read window.
    pub fn from_durations(write: f64, storage_time: f64, read: f64, dt: f64) -> Result<Self> {
        let steps = |d: f64| (d / dt).round() as usize;
        let (w, h, r) = (steps(write), steps(storage_time), steps(read));
        let grid = TimeGrid::with_steps(0.0, dt, w + h + r)?;
        let at = |n: usize| n as f64 * dt;
        ControlSchedule::new(grid, at(w), at(h), at(w + h + r))
    }

    /// Overrides κ during writing (default: the parameter value).
    pub fn with_write_kappa(mut self, kappa: f64) -> Self {
        self.write_kappa = Some(kappa);
        self
    }

    /// Overrides κ during reading (default: the parameter value).
    pub fn with_read_kappa(mut self, kappa: f64) -> Self {
        self.read_kappa = Some(kappa);
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn write_window(&self) -> Window {
        Window::new(0, self.write_end)
    }

    pub fn read_window(&self) -> Window {
        Window::new(self.read_start, self.read_end)
    }

    pub fn write_end(&self) -> f64 {
        self.grid.time(self.write_end)
    }

    /// Storage time after snapping to the grid.
    pub fn storage_time(&self) -> f64 {
        (self.read_start - self.write_end) as f64 * self.grid.dt()
    }

    pub fn write_kappa(&self, params: &MemoryParams) -> f64 {
        self.write_kappa.unwrap_or(params.kappa)
    }

    pub fn read_kappa(&self, params: &MemoryParams) -> f64 {
        self.read_kappa.unwrap_or(params.kappa)
    }

    /// κ on the step `[t_i, t_{i+1}]`.
    pub fn kappa_on_step(&self, index: usize, params: &MemoryParams) -> f64 {
        if index < self.write_end {
            self.write_kappa(params)
        } else if index < self.read_start {
            0.0
        } else {
            self.read_kappa(params)
        }
    }

    /// Same windows with a different storage time; the grid is extended or
    /// shortened to end with the read window.
    pub fn with_storage_time(&self, storage_time: f64) -> Result<Self> {
        let dt = self.grid.dt();
        let read_len = self.read_end - self.read_start;
        let hold = (storage_time / dt).round() as usize;
        let total = self.write_end + hold + read_len;
        let grid = TimeGrid::with_steps(self.grid.t_start(), dt, total)?;
        Ok(ControlSchedule {
            grid,
            write_end: self.write_end,
            read_start: self.write_end + hold,
            read_end: total,
            write_kappa: self.write_kappa,
            read_kappa: self.read_kappa,
        })
    }
}
