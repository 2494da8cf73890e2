//! Linearized quantum fluctuations for absorptive optical bistability.
//!
//! The crate is organized around four layers:
//!
//! * [`model`] — physical parameters, the bistability state equation and its
//!   roots, mean-field steady states and steady-state averages with
//!   first-order fluctuation corrections;
//! * [`fluctuations`] — the 5×5 Jacobian/diffusion pair for the fluctuation
//!   variables (z, z*, ν, ν*, μ), the steady-state covariance (Lyapunov
//!   solve), two-time covariance propagation and Laplace-domain spectra;
//! * [`closed_form`] — every correlation function, Laplace transform,
//!   initial condition and asymptotic expression in explicit analytic form,
//!   used as an independent oracle for the numerical engine;
//! * [`oracle`] — an exact Lindblad master-equation simulator for a handful
//!   of atoms and a truncated photon space, validating the linearized
//!   theory's regime of validity from first principles.
//!
//! All engine dynamics use the dimensionless time τ̄ = γτ/2; rate-like
//! quantities carry a matching 2/γ scaling.

pub mod basis;
pub mod closed_form;
pub mod error;
pub mod fluctuations;
pub mod model;
pub mod oracle;

pub use basis::{FluctVar, VarPair};
pub use closed_form::WeakExcitationContext;
pub use error::{Error, Result};
pub use fluctuations::{
    build_diffusion, build_jacobian, correlation_trace, evolve_covariance, evolve_covariance_rk,
    laplace_correlation, spectrum_trace, steady_covariance, CorrelationTrace, CovarianceMatrix,
    FluctuationSystem, JacobianMode, SpectrumTrace,
};
pub use model::{
    atomic_means, derive_dimensionless, drive_for_amplitude, emission_rates, intracavity_roots,
    steady_averages, turning_points, Branch, DimensionlessParams, Drive, EmissionRates,
    OperatingPoint, PhysicalParams, SteadyAverages,
};
