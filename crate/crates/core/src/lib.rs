//! Simulator and analytics for a cavity-enhanced EIT quantum memory.
//!
//! - [`model`]: parameters, grids, temporal modes, control schedules
//! - [`dynamics`]: Langevin propagation, efficiency, adjoint transfer map
//! - [`analytics`]: closed-form efficiency, Gaussian fidelities, benchmark
//! - [`optimizer`]: rising-exponential line search and time-reversal iteration
//! - [`calibration`]: fitting effective parameters to measured observables

pub mod analytics;
pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod optimizer;

pub use num_complex::Complex64;

pub use analytics::{
    average_fidelity, classical_benchmark, efficiency_formula, fock_fidelity_oracle, gaussian_fidelity,
    CoherentAlphabet, GaussianState,
};
pub use calibration::{
    external_correction, fit_from_observables, lifetime_from_params, CalibratedFit, MeasuredObservables,
};
pub use dynamics::{
    adjoint_transfer, propagate, propagate_with, retrieved_mode_shape, retrieved_variance, simulated_efficiency,
    CavityState, ChannelFamily, FieldRecord, Trajectory, TransferMap,
};
pub use error::{Error, Result};
pub use model::{
    derive_coupling, derive_rates, make_flat_top, make_rising_exponential, mode_overlap, CavityGeometry, CavityRates,
    ControlSchedule, CouplingSpec, MemoryParams, TemporalMode, TimeGrid, Window,
};
pub use optimizer::{optimize_exponential_rate, time_reversal_iterate, ExponentialOptimum, OptimizationTrace};
