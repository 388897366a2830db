//! Pseudospectral toolkit for the viscous conservation law
//!
//! ```text
//! u_t - Δu + a·∇(u|u|^{q-1}) = 0,   u(x, 0) = u₀(x),   ∫u₀ = 0,
//! ```
//!
//! on a periodic truncation of R^n (n = 1, 2). The crate provides the spectral
//! substrate, the Fourier-multiplier operators (heat semigroup, D^β, I_β),
//! zero-mass initial data with prescribed low-frequency order β, time
//! integration of the mild formulation, independent oracles (Cole–Hopf,
//! closed-form heat flows, a real-space Riesz kernel) and the asymptotics
//! instrumentation used to measure decay rates and self-similar behavior.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod initial_data;
pub mod operators;
pub mod oracles;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{GridSpec, RealField, SpectralField};

/// The balanced exponent `q* = 1 + 1/(n + β)`.
pub fn critical_exponent(dim: usize, beta: f64) -> f64 {
    1.0 + 1.0 / (dim as f64 + beta)
}

/// Upper end `(n + 2)/(n + β)` of the first linearization regime.
pub fn linearization_threshold(dim: usize, beta: f64) -> f64 {
    (dim as f64 + 2.0) / (dim as f64 + beta)
}
