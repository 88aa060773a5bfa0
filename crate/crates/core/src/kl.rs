//! Distortion-rate-perception bounds for a Gaussian source when perception
//! is measured by `KL(p_Xhat || p_X)`.
//!
//! Without loss of optimality the reconstruction has the source mean and a
//! standard deviation `sigma_hat <= sigma_x`. The perception budget `P`
//! then confines `sigma_hat` to `[sigma(P), sigma_x]`, where `sigma(P)` solves
//! `psi(sigma) = P` and `psi(sigma_hat)` is the KL divergence between the
//! Gaussian of that width and the source.
//!
//! - The upper bound restricts the reconstruction to Gaussians and is
//!   available in closed form ([`upper_bound`]).
//! - The lower bound minimizes
//!   `zeta(s) = sigma_x^2 + s^2 - 2 sigma_x s sqrt((1 - e^{-2R})(1 - e^{-2(R + Rc + P - psi(s))}))`
//!   over the admissible interval ([`lower_bound`]). No closed form exists
//!   in general, so it is found numerically.
//! - The bounds coincide whenever `sigma(P)` clears [`tightness_threshold`],
//!   and always at `P = 0` or `Rc = inf` ([`solve`]).

use crate::bounds::BoundPair;
use crate::error::{Error, Result};
use crate::gaussian::{check_extended_nonneg, decay, gain_factor, xi, GaussianSpec, RateBudget};
use crate::numerics::{bisect_root, seeded_min, Bracket, Minimum, Tolerance};

/// Points in the coarse scan that seeds the golden-section refinement.
pub const COARSE_GRID_POINTS: usize = 1024;

/// At `P = inf` the admissible interval is `(0, sigma_x]`; this fraction of
/// `sigma_x` stands in for the open end.
pub const OPEN_END_FRACTION: f64 = 1e-12;

/// Gaussian source, rates and KL perception budget `P` (nats, may be `inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlProblem {
    pub src: GaussianSpec,
    pub rates: RateBudget,
    p: f64,
}

impl KlProblem {
    pub fn new(src: GaussianSpec, rates: RateBudget, p: f64) -> Result<Self> {
        check_extended_nonneg("p", p)?;
        Ok(Self { src, rates, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `psi(sigma_hat) = ln(sigma_x / sigma_hat) + (sigma_hat^2 - sigma_x^2) / (2 sigma_x^2)`.
pub fn psi(sigma_hat: f64, sigma_x: f64) -> f64 {
    let r = sigma_hat / sigma_x;
    if r < 0.5 {
        -r.ln() + 0.5 * (r * r - 1.0)
    } else {
        // Near r = 1 both terms are O(r - 1) and cancel to O((r - 1)^2).
        let d = r - 1.0;
        -d.ln_1p() + 0.5 * d * (r + 1.0)
    }
}

/// `psi` as a function of `u = ln(sigma_hat / sigma_x)`.
fn psi_log(u: f64) -> f64 {
    -u + 0.5 * (2.0 * u).exp_m1()
}

/// The unique `sigma` in `(0, sigma_x]` with `psi(sigma) = P`;
/// `sigma_x` at `P = 0` and `0` at `P = inf`.
///
/// The root is bracketed in `ln(sigma / sigma_x)`, where `psi` has slope
/// `e^{2u} - 1` in `(-1, 0)`. An absolute tolerance there is a relative
/// tolerance on `sigma`, which keeps `psi(sigma(P)) = P` accurate even when
/// `sigma(P)` is many orders of magnitude below `sigma_x`.
pub fn sigma_of_p(sigma_x: f64, p: f64) -> Result<f64> {
    check_extended_nonneg("p", p)?;
    if p == 0.0 {
        return Ok(sigma_x);
    }
    if p.is_infinite() {
        return Ok(0.0);
    }
    // psi_log(u) >= -u - 1/2, so u = -(P + 1) already overshoots P.
    let lo = (1e-300f64).ln().min(-(p + 1.0));
    let u = bisect_root(|u| psi_log(u) - p, Bracket::new(lo, 0.0)?, Tolerance::root())?;
    Ok(sigma_x * u.exp())
}

/// Closed-form upper bound (Gaussian reconstruction).
pub fn upper_bound(prob: &KlProblem) -> Result<f64> {
    let sx = prob.src.sigma();
    let sp = sigma_of_p(sx, prob.p)?;
    Ok(upper_from_parts(sx, sp, xi(prob.rates)))
}

pub(crate) fn upper_from_parts(sx: f64, sp: f64, xi: f64) -> f64 {
    if sp <= sx * xi {
        sx * sx * (1.0 - xi * xi)
    } else {
        sx * sx + sp * sp - 2.0 * sx * sp * xi
    }
}

/// The objective `zeta` whose minimum over `[sigma(P), sigma_x]` is the
/// lower bound.
#[derive(Debug, Clone, Copy)]
pub struct LowerObjective {
    sx: f64,
    sx2: f64,
    rate_gain: f64,
    /// `-2 (R + Rc + P)`, possibly `-inf`.
    log_k: f64,
}

impl LowerObjective {
    pub fn new(prob: &KlProblem) -> Self {
        let sx = prob.src.sigma();
        Self {
            sx,
            sx2: sx * sx,
            rate_gain: gain_factor(prob.rates.r()),
            log_k: -2.0 * (prob.rates.total() + prob.p),
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.sx2;
        }
        // e^{-2(R + Rc + P - psi(s))} = e^{log_k} (sx/s)^2 e^{(s^2 - sx^2)/sx^2}
        let q = self.sx / s;
        let expo = self.log_k + (s * s - self.sx2) / self.sx2;
        let mut w = expo.exp() * q * q;
        if !w.is_finite() {
            w = (expo + 2.0 * q.ln()).exp();
        }
        let tau = (self.rate_gain * (1.0 - w).max(0.0)).sqrt();
        self.sx2 + s * s - 2.0 * self.sx * s * tau
    }
}

/// Admissible interval `[sigma(P), sigma_x]` for the lower-bound search.
pub fn admissible_interval(prob: &KlProblem) -> Result<Bracket> {
    let sx = prob.src.sigma();
    let lo = if prob.p.is_infinite() { OPEN_END_FRACTION * sx } else { sigma_of_p(sx, prob.p)? };
    Bracket::new(lo.min(sx), sx)
}

/// Numerical lower bound: coarse scan of `zeta` followed by golden-section
/// refinement around the best scan point.
pub fn lower_bound(prob: &KlProblem) -> Result<Minimum> {
    let objective = LowerObjective::new(prob);
    let interval = admissible_interval(prob)?;
    seeded_min(|s| objective.eval(s), interval, COARSE_GRID_POINTS, Tolerance::minimize())
}

/// Common value of both bounds when they coincide:
/// `sigma_x^2 + sigma(P)^2 - 2 sigma_x sigma(P) xi(R, Rc)`.
pub fn coincident_value(prob: &KlProblem) -> Result<f64> {
    let sx = prob.src.sigma();
    let sp = sigma_of_p(sx, prob.p)?;
    let x = xi(prob.rates);
    Ok(sx * sx + sp * sp - 2.0 * sx * sp * x)
}

/// Shared pieces of the threshold formulas.
struct ThresholdTerms {
    /// `sqrt(1 - e^{-2R})`
    root_gain: f64,
    /// `1 - e^{-2(R + Rc)}`
    total_gain: f64,
    /// `e^{-2(R + Rc)}`
    total_decay: f64,
}

impl ThresholdTerms {
    fn new(rates: RateBudget) -> Self {
        Self {
            root_gain: gain_factor(rates.r()).sqrt(),
            total_gain: gain_factor(rates.total()),
            total_decay: decay(rates.total()),
        }
    }

    fn beta1(&self, sx: f64) -> f64 {
        self.root_gain * self.total_decay / (sx * self.total_gain.sqrt())
    }
}

/// Positive root `(sqrt(1 + 4 b1 b2) - 1) / (2 b1)` of `b1 s^2 + s - b2`,
/// written so that it stays accurate as `b1 -> 0`.
fn positive_root(beta1: f64, beta2: f64) -> f64 {
    2.0 * beta2 / (1.0 + (1.0 + 4.0 * beta1 * beta2).sqrt())
}

/// Sufficient threshold `sigma(R, Rc, P)`: the bounds coincide once
/// `sigma(P) >= sigma(R, Rc, P)`.
pub fn tightness_threshold(prob: &KlProblem) -> f64 {
    let r = prob.rates.r();
    if r == 0.0 {
        return 0.0;
    }
    let sx = prob.src.sigma();
    let terms = ThresholdTerms::new(prob.rates);
    let tau0 = (gain_factor(r) * gain_factor(prob.rates.total() + prob.p)).sqrt();
    let beta1 = terms.beta1(sx);
    let beta2 = sx * tau0 + sx * terms.root_gain * terms.total_decay / terms.total_gain.sqrt();
    let t = positive_root(beta1, beta2);
    if r.is_finite() {
        // The exact value lies in [varsigma, varsigma']; remove rounding
        // where the envelopes nearly touch (and at P = 0 or inf, where they do).
        t.max(varsigma_unchecked(prob.rates, sx)).min(varsigma_prime_unchecked(prob.rates, sx))
    } else {
        t
    }
}

fn check_finite_positive_rate(rates: RateBudget) -> Result<()> {
    let r = rates.r();
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRate(r))
    }
}

/// Necessary threshold `varsigma(R, Rc)`: coincidence requires
/// `sigma(P) >= varsigma(R, Rc)`. Defined for `0 < R < inf`.
pub fn varsigma(rates: RateBudget, sigma_x: f64) -> Result<f64> {
    check_finite_positive_rate(rates)?;
    Ok(varsigma_unchecked(rates, sigma_x))
}

fn varsigma_unchecked(rates: RateBudget, sigma_x: f64) -> f64 {
    let t = ThresholdTerms::new(rates);
    // (sqrt(A + 4Be) - sqrt(A)) / (2 sqrt(B) e) after rationalizing.
    let a = t.total_gain;
    let b = t.root_gain * t.root_gain;
    2.0 * sigma_x * t.root_gain / ((a + 4.0 * b * t.total_decay).sqrt() + a.sqrt())
}

/// Upper envelope `varsigma'(R, Rc)` of the sufficient threshold over all `P`.
/// Defined for `0 < R < inf`.
pub fn varsigma_prime(rates: RateBudget, sigma_x: f64) -> Result<f64> {
    check_finite_positive_rate(rates)?;
    Ok(varsigma_prime_unchecked(rates, sigma_x))
}

fn varsigma_prime_unchecked(rates: RateBudget, sigma_x: f64) -> f64 {
    let t = ThresholdTerms::new(rates);
    let beta2 = sigma_x * t.root_gain * (1.0 + t.total_decay / t.total_gain.sqrt());
    positive_root(t.beta1(sigma_x), beta2)
}

/// Both bounds, with `tight` set only under a sufficient condition:
/// `P = 0`, `Rc = inf`, or `sigma(P) >= sigma(R, Rc, P)`.
pub fn solve(prob: &KlProblem) -> Result<BoundPair> {
    let sx = prob.src.sigma();
    let sp = sigma_of_p(sx, prob.p)?;
    let upper = upper_from_parts(sx, sp, xi(prob.rates));
    let lower = lower_bound(prob)?;
    let tight = prob.p == 0.0 || prob.rates.rc().is_infinite() || sp >= tightness_threshold(prob);
    debug_assert!(!tight || (upper - lower.value).abs() <= 1e-9 * upper.max(1.0));
    // Proven equal bounds report the closed form for both. Otherwise the
    // clip only removes rounding and is still a valid lower bound.
    let lower_value = if tight { upper } else { lower.value.min(upper) };
    Ok(BoundPair { lower: lower_value, upper, tight, argmin_sigma: lower.arg })
}
