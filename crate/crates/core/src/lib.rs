//! Distortion-rate-perception computations for output-constrained lossy
//! source coding of scalar Gaussian sources under squared error.
//!
//! - [`gaussian`]: closed-form distortion with a prescribed Gaussian
//!   reconstruction marginal, and the test channels that achieve it.
//! - [`bounds`]: moment-based lower bound for general marginals.
//! - [`kl`], [`w2`]: upper and lower bounds when the reconstruction marginal
//!   is only constrained to lie within a KL or squared-W2 ball.
//! - [`sim`]: Monte Carlo of the achieving scheme.
//! - [`curves`], [`verify`]: CSV sweeps and oracle checks.
//!
//! Rates are in nats and accept `f64::INFINITY`.

pub mod bounds;
pub mod curves;
pub mod error;
pub mod gaussian;
pub mod kl;
pub mod numerics;
pub mod sim;
pub mod verify;
pub mod w2;

#[cfg(test)]
mod properties;

pub use bounds::{BoundPair, MomentSpec, Sandwich, TestChannelOutputs};
pub use error::{Error, Result};
pub use gaussian::{
    gaussian_drf, kl_gaussians, ocsc_gaussian, test_channel_params, w2sq_gaussians, xi, GaussianSpec, RateBudget,
    TestChannelParams,
};
pub use kl::KlProblem;
pub use numerics::{Bracket, Minimum, Tolerance};
pub use sim::{SimConfig, SimReport};
pub use w2::W2Problem;
