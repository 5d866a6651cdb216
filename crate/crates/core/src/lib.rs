//! Polarization-entangled photon pairs through first-order polarization mode
//! dispersion (PMD), and nonlocal compensation of Alice's PMD by a single
//! delay element in Bob's path.
//!
//! The pipeline is:
//!
//! 1. [`profiles`]: pump and filter spectra with calibrated rms bandwidths.
//! 2. [`biphoton`]: the joint spectral amplitude `f(ωa, ωb)` and the temporal
//!    amplitude `g(ta, tb)`.
//! 3. [`concurrence`]: the overlap `κ(τa, τb)` between the two DGD-shifted
//!    waveforms, whose modulus is the concurrence.
//! 4. [`polarization`]: the traced two-qubit density matrix and the Wootters
//!    concurrence, used as an independent check of `C = |κ|`.
//! 5. [`optimizer`]: the compensator DGD that maximizes `C`, and parameter sweeps.
//!
//! Frequencies are angular (rad/s), times in seconds, unless a function says
//! otherwise. Any consistent pair of units works, e.g. bandwidths in `1/τa` and
//! times in units of `τa`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biphoton;
pub mod concurrence;
pub mod error;
pub mod io;
pub mod optimizer;
pub mod polarization;
pub mod profiles;
mod quadrature;
pub mod units;
pub mod validation;

pub use biphoton::{
    auto_grid, build_jsa, temporal_amplitude, Axis, BiphotonAmplitude, GridChoice, GridLayout,
    GridSpec, GridThresholds, PhotonPairSource, TemporalAmplitude,
};
pub use concurrence::{
    concurrence_cw, concurrence_gaussian, concurrence_numeric, concurrence_time_domain,
    overlap_kappa, pump_limited_sensitivity_tolerance, sensitivity_tolerance, ConcurrenceModel,
    ConcurrenceResult, CwModel, Engine, GaussianModel, Method, PmdScenario,
};
pub use error::{Error, Result};
pub use optimizer::{
    optimal_dgd_gaussian, optimize_compensator, sweep_pump_bandwidth, sweep_taub,
    OptimizationResult, PumpShape, SweepCurve,
};
pub use polarization::{
    conditioned_partner_state, density_matrix_from_overlap, wootters_concurrence, JonesVector,
    TwoQubitState,
};
pub use profiles::{
    calibrate_supergaussian, eval_spectrum, parse_profile, parse_pump, rms_bandwidth, PumpSpec, Shape, SpectralProfile,
    Table,
};
pub use units::UnitSystem;
