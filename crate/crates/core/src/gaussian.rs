//! Scalar Gaussian building blocks and the closed-form output-constrained
//! distortion-rate function.
//!
//! Rates are in nats and may be `f64::INFINITY`; `exp(-2 * inf)` evaluates to
//! exactly `0.0` in IEEE arithmetic, so infinite-rate formulas need no limits.

use crate::error::{Error, Result};

/// Mean and standard deviation of a scalar Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub(crate) mu: f64,
    pub(crate) sigma: f64,
}

impl GaussianSpec {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    /// `N(0, 1)`.
    pub fn standard() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
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
}

/// Coding rate `r` and common-randomness rate `rc`, both in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBudget {
    pub(crate) r: f64,
    pub(crate) rc: f64,
}

impl RateBudget {
    pub fn new(r: f64, rc: f64) -> Result<Self> {
        check_extended_nonneg("r", r)?;
        check_extended_nonneg("rc", rc)?;
        Ok(Self { r, rc })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn rc(&self) -> f64 {
        self.rc
    }

    /// `r + rc`, the rate available to the reconstruction side.
    pub fn total(&self) -> f64 {
        self.r + self.rc
    }
}

pub(crate) fn check_extended_nonneg(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be >= 0 (inf allowed), got {x}")))
    }
}

/// `exp(-2 x)`, exactly zero at `x = inf`.
#[inline]
pub(crate) fn decay(x: f64) -> f64 {
    (-2.0 * x).exp()
}

/// `1 - exp(-2 x)` without cancellation for small `x`.
#[inline]
pub(crate) fn gain_factor(x: f64) -> f64 {
    -(-2.0 * x).exp_m1()
}

/// Correlation factor `sqrt((1 - e^{-2R}) (1 - e^{-2(R+Rc)}))`.
pub fn xi(rates: RateBudget) -> f64 {
    (gain_factor(rates.r) * gain_factor(rates.total())).sqrt()
}

/// Quadratic distortion-rate function of a Gaussian: `sigma^2 e^{-2 rate}`.
pub fn gaussian_drf(sigma: f64, rate: f64) -> f64 {
    sigma * sigma * decay(rate)
}

/// `KL(q || p)` for scalar Gaussians, in nats.
pub fn kl_gaussians(q: &GaussianSpec, p: &GaussianSpec) -> f64 {
    let dm = p.mu - q.mu;
    (p.sigma / q.sigma).ln() + (dm * dm + q.variance() - p.variance()) / (2.0 * p.variance())
}

/// Squared 2-Wasserstein distance between scalar Gaussians.
pub fn w2sq_gaussians(p: &GaussianSpec, q: &GaussianSpec) -> f64 {
    let dm = p.mu - q.mu;
    let ds = p.sigma - q.sigma;
    dm * dm + ds * ds
}

/// Minimum mean squared error when the reconstruction must be i.i.d. with
/// marginal `rec`, at coding rate `R` and common-randomness rate `Rc`:
///
/// `(mu_x - mu_rec)^2 + sigma_x^2 + sigma_rec^2 - 2 sigma_x sigma_rec xi(R, Rc)`.
pub fn ocsc_gaussian(src: &GaussianSpec, rec: &GaussianSpec, rates: RateBudget) -> f64 {
    ocsc_with_xi(src, rec, xi(rates))
}

pub(crate) fn ocsc_with_xi(src: &GaussianSpec, rec: &GaussianSpec, xi: f64) -> f64 {
    let dm = src.mu - rec.mu;
    dm * dm + src.variance() + rec.variance() - 2.0 * src.sigma * rec.sigma * xi
}

/// Parameters of the Gaussian test channels that achieve [`ocsc_gaussian`].
///
/// Forward channel on the source side: `Y = mu_x + gain (X - mu_x) + W` with
/// `W ~ N(0, channel_noise_sd^2)`, so that `E[X | Y] = Y` and `I(X; Y) = R`.
/// On the reconstruction side `X_hat = Y_hat + N` with
/// `N ~ N(0, backward_noise_sd^2)` independent of `Y_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestChannelParams {
    pub gain: f64,
    pub channel_noise_sd: f64,
    pub y_sd: f64,
    pub yhat_sd: f64,
    pub backward_noise_sd: f64,
}

pub fn test_channel_params(src: &GaussianSpec, rec: &GaussianSpec, rates: RateBudget) -> Result<TestChannelParams> {
    if rates.r.is_infinite() {
        return Err(Error::InfiniteRate);
    }
    let gain = gain_factor(rates.r);
    let rest = decay(rates.r);
    let rec_gain = gain_factor(rates.total());
    Ok(TestChannelParams {
        gain,
        channel_noise_sd: src.sigma * (rest * gain).sqrt(),
        y_sd: src.sigma * gain.sqrt(),
        yhat_sd: rec.sigma * rec_gain.sqrt(),
        backward_noise_sd: rec.sigma * decay(rates.total()).sqrt(),
    })
}
