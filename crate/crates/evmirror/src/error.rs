//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the routine.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// A configuration value is inconsistent or unphysical.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge: error estimate {achieved:.3e} exceeds tolerance {requested:.3e}"
    )]
    NonConvergence { achieved: f64, requested: f64 },

    /// The routine only supports a subset of the polarization presets.
    #[error("unsupported polarization: {0}")]
    UnsupportedPolarization(String),

    /// The potential barrier is too low to turn the incident atom around.
    #[error(
        "no reflection: barrier height {barrier:.6e} is below the incident kinetic energy {kinetic:.6e}"
    )]
    NoReflection { barrier: f64, kinetic: f64 },

    /// An adaptive ODE integrator collapsed its step size.
    #[error("integration step collapsed below {min_step:.3e} at t = {t:.6e}")]
    StiffnessFailure { min_step: f64, t: f64 },

    /// The momentum grid is too coarse for the transport scheme.
    #[error("momentum grid too coarse: spacing {spacing} exceeds {max_allowed} (hbar k)")]
    GridTooCoarse { spacing: f64, max_allowed: f64 },
}
