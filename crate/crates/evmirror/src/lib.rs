//! Vacuum electromagnetic field correlations above a flat vacuum–dielectric
//! interface, and the atom optics they induce in an evanescent-wave mirror.
//!
//! Everything works in reduced units built from the resonant wavevector $k$
//! and the saturated fluorescence rate $\Gamma'_\infty$ far from the wall:
//!
//! * lengths in $1/k$,
//! * rates and times in $\Gamma'_\infty$ and $1/\Gamma'_\infty$,
//! * momenta in $\hbar k$,
//! * forces in $\hbar k \Gamma'_\infty$,
//! * momentum diffusion in $\hbar^2 k^2 \Gamma'_\infty$.
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`] — adaptive Gauss–Legendre integration, the Sommerfeld
//!   integral driver and Bessel functions $J_0, J_1, J_2$;
//! * [`interface`] — Fresnel coefficients and the evanescent driving field;
//! * [`correlations`] — the correlation weights $c_0, q_0, a_1, q_2$, the
//!   one-point rates $c_\parallel, c_\perp$ and short-distance Taylor data;
//! * [`scalar`] — fluorescence rate, radiation pressure and momentum
//!   diffusion of a two-level (scalar) atom;
//! * [`spin_half`] — optical pumping, spin-dependent forces and the Wigner
//!   slice evolution for a $J_g = 1/2$ ground state;
//! * [`semiclassical`] — the bounce simulator (mean path and Langevin
//!   ensemble) plus validity checks.

pub mod correlations;
pub mod error;
pub mod interface;
#[cfg_attr(not(test), allow(dead_code))]
mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod semiclassical;
pub mod spin_half;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
