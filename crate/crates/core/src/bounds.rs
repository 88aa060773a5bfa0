//! Moment-based sandwich for output-constrained coding with arbitrary
//! source and reconstruction distributions.
//!
//! Given the distortion-rate values `d_src = D(R | p_X)` and
//! `d_rec = D(R + Rc | p_Xhat)` (exact, or replaced by Shannon lower bounds),
//! the lower bound is
//!
//! `(mu_x - mu_rec)^2 + sigma_x^2 + sigma_rec^2 - 2 sqrt((sigma_x^2 - d_src)(sigma_rec^2 - d_rec))`.
//!
//! The matching upper bound needs the W2 distance between the true optimal
//! test-channel outputs, which moments alone do not determine; it is only
//! reported when those outputs are known to be Gaussian.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::gaussian::RateBudget;

/// First two moments and differential entropy (nats) of a scalar distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    mu: f64,
    sigma: f64,
    diff_entropy: f64,
}

impl MomentSpec {
    /// `diff_entropy` may be `-inf` for distributions without a density.
    pub fn new(mu: f64, sigma: f64, diff_entropy: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        let h_max = max_entropy(sigma);
        if diff_entropy.is_nan() || diff_entropy > h_max + 1e-12 * h_max.abs().max(1.0) {
            return Err(Error::invalid(
                "diff_entropy",
                format!("{diff_entropy} exceeds the Gaussian maximum {h_max} for sigma = {sigma}"),
            ));
        }
        Ok(Self { mu, sigma, diff_entropy })
    }

    /// Moments of `N(mu, sigma^2)` with its (maximal) entropy.
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, max_entropy(sigma))
    }

    /// A distribution with no density; its entropy is taken as `-inf`.
    pub fn without_density(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, f64::NEG_INFINITY)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn diff_entropy(&self) -> f64 {
        self.diff_entropy
    }
}

fn max_entropy(sigma: f64) -> f64 {
    0.5 * (2.0 * PI * E * sigma * sigma).ln()
}

/// Whether the optimal test-channel outputs are known to be Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestChannelOutputs {
    Gaussian,
    Unknown,
}

/// Lower bound and, when computable, upper bound on `D(R, Rc | p_X, p_Xhat)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Sandwich {
    pub fn is_tight(&self) -> bool {
        self.upper == Some(self.lower)
    }
}

/// Lower and upper bounds on a rate-distortion-perception function for a
/// Gaussian source.
///
/// `tight` is set only when a sufficient condition proves the bounds equal;
/// numerically close bounds without such a condition stay untight.
/// `argmin_sigma` is the reconstruction standard deviation that attains the
/// reported lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub tight: bool,
    pub argmin_sigma: f64,
}

impl BoundPair {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

pub fn lower_bound_from_drf(src: &MomentSpec, rec: &MomentSpec, d_src: f64, d_rec: f64) -> Result<f64> {
    check_distortion(d_src, src.variance())?;
    check_distortion(d_rec, rec.variance())?;
    let dm = src.mu - rec.mu;
    let cross = ((src.variance() - d_src) * (rec.variance() - d_rec)).sqrt();
    Ok(dm * dm + src.variance() + rec.variance() - 2.0 * cross)
}

fn check_distortion(d: f64, variance: f64) -> Result<()> {
    if d >= 0.0 && d <= variance {
        Ok(())
    } else {
        Err(Error::InvalidDistortion { value: d, variance })
    }
}

/// Shannon lower bound `e^{-2(rate - h)} / (2 pi e)` on the quadratic
/// distortion-rate function; zero when the entropy is `-inf`.
pub fn shannon_lb_drf(m: &MomentSpec, rate: f64) -> f64 {
    if m.diff_entropy == f64::NEG_INFINITY || rate == f64::INFINITY {
        return 0.0;
    }
    // Written relative to the Gaussian maximum so Gaussian inputs reproduce
    // sigma^2 e^{-2 rate} without rounding from the entropy round trip.
    let excess = m.diff_entropy - max_entropy(m.sigma);
    m.variance() * (-2.0 * (rate - excess)).exp()
}

/// Sandwich from caller-supplied distortion-rate values.
///
/// With [`TestChannelOutputs::Gaussian`] the W2 term of the upper bound
/// equals the one in the lower bound, so `upper = lower`.
pub fn sandwich(
    src: &MomentSpec,
    rec: &MomentSpec,
    d_src: f64,
    d_rec: f64,
    outputs: TestChannelOutputs,
) -> Result<Sandwich> {
    let lower = lower_bound_from_drf(src, rec, d_src, d_rec)?;
    let upper = match outputs {
        TestChannelOutputs::Gaussian => Some(lower),
        TestChannelOutputs::Unknown => None,
    };
    Ok(Sandwich { lower, upper })
}

/// Sandwich with both distortion-rate values replaced by their Shannon
/// lower bounds at `R` and `R + Rc`.
pub fn sandwich_from_slb(src: &MomentSpec, rec: &MomentSpec, rates: RateBudget, outputs: TestChannelOutputs) -> Result<Sandwich> {
    // The SLB never exceeds the variance; clamp rounding at the Gaussian maximum.
    let d_src = shannon_lb_drf(src, rates.r()).min(src.variance());
    let d_rec = shannon_lb_drf(rec, rates.total()).min(rec.variance());
    sandwich(src, rec, d_src, d_rec, outputs)
}
