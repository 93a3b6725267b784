//! Numerical laboratory for non-Markovian quantum Brownian motion.
//!
//! The crate computes, for a harmonic oscillator bilinearly coupled to a
//! Drude-cutoff Ohmic bath:
//!
//! * the bath kernels L(t), K(t) and the four time-dependent coefficients of
//!   the Hu-Paz-Zhang master equation,
//! * the exact decoherence function mu_I(t) of a superposition of two
//!   coherent states, via the Langevin Green's function,
//! * the Wootters concurrence of two-mode entangled coherent states under
//!   Markovian and non-Markovian single-photon loss.
//!
//! All numerics are generic over the [`scalar::Real`] scalar; the `*64`
//! aliases at the crate root pin `f64`, which is what the default tolerances
//! are calibrated for.

pub mod decoherence;
pub mod entanglement;
pub mod error;
pub mod hpz;
pub mod kernels;
pub mod langevin;
pub mod model;
pub mod quad;
pub mod scalar;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};

/// `f64` aliases for the common entry types.
pub type BathSpec64 = model::BathSpec<f64>;
pub type SystemSpec64 = model::SystemSpec<f64>;
pub type Timescales64 = model::Timescales<f64>;
pub type QuadratureSettings64 = quad::QuadratureSettings<f64>;
pub type GreenFunction64 = langevin::GreenFunction<f64>;
pub type MomentState64 = langevin::MomentState<f64>;
pub type HpzCoefficients64 = hpz::HpzCoefficients<f64>;
pub type CoefficientSeries64 = hpz::CoefficientSeries<f64>;
pub type DecayTrace64 = decoherence::DecayTrace<f64>;
pub type EcsSpec64 = entanglement::EcsSpec<f64>;
pub type ConcurrenceTrace64 = entanglement::ConcurrenceTrace<f64>;
