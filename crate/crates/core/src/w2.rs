//! Distortion-rate-perception bounds for a Gaussian source when perception
//! is measured by the squared 2-Wasserstein distance.
//!
//! As in the KL case the reconstruction can be taken with the source mean
//! and `sigma_hat <= sigma_x`; the budget `P` then allows
//! `sigma_hat in [(sigma_x - sqrt(P))_+, sigma_x]`. W2 gives no entropy
//! floor for the reconstruction, so the lower bound instead uses
//! `D(R + Rc | p_Xhat) >= (sigma_x e^{-(R+Rc)} - sqrt(P))_+^2` and minimizes
//!
//! `g(s) = sigma_x^2 + s^2 - 2 sigma_x sqrt((1 - e^{-2R})(s^2 - c^2))`,
//! `c = (sigma_x e^{-(R+Rc)} - sqrt(P))_+`.
//!
//! That minimization has a four-branch closed form
//! ([`lower_bound_piecewise`]); [`lower_bound_numeric`] solves it by brute
//! force and serves as its oracle.

use crate::bounds::BoundPair;
use crate::error::Result;
use crate::gaussian::{check_extended_nonneg, decay, gain_factor, xi, GaussianSpec, RateBudget};
use crate::numerics::{seeded_min, Bracket, Minimum, Tolerance};

/// Resolution of the brute-force scan in [`lower_bound_numeric`].
pub const ORACLE_GRID_POINTS: usize = 1_000_000;

/// Gaussian source, rates and W2 perception budget `P` (squared source
/// units, may be `inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W2Problem {
    pub src: GaussianSpec,
    pub rates: RateBudget,
    p: f64,
}

impl W2Problem {
    pub fn new(src: GaussianSpec, rates: RateBudget, p: f64) -> Result<Self> {
        check_extended_nonneg("p", p)?;
        Ok(Self { src, rates, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `nu(R, Rc) = (e^{-2R} - e^{-2(R+Rc)}) / (2 - 2 e^{-(R+Rc)})`.
///
/// Zero when `Rc = 0` or `R = inf`.
pub fn nu(rates: RateBudget) -> f64 {
    let (r, rc) = (rates.r(), rates.rc());
    if rc == 0.0 || r.is_infinite() {
        return 0.0;
    }
    decay(r) * gain_factor(rc) / (-2.0 * (-rates.total()).exp_m1())
}

/// Closed-form upper bound (Gaussian reconstruction).
pub fn upper_bound(prob: &W2Problem) -> f64 {
    upper_from_parts(prob.src.sigma(), prob.p, xi(prob.rates))
}

pub(crate) fn upper_from_parts(sx: f64, p: f64, x: f64) -> f64 {
    let s = sx - p.sqrt();
    if s <= sx * x {
        sx * sx * (1.0 - x * x)
    } else {
        sx * sx + s * s - 2.0 * sx * s * x
    }
}

/// Which closed-form regime produced the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowerBranch {
    /// `R = 0`: `sigma_x^2 + (sigma_x - sqrt(P))_+^2`.
    ZeroRate,
    /// `sqrt(P)/sigma_x >= max(1 - sqrt(1 - e^{-2R}), e^{-(R+Rc)})`: `sigma_x^2 e^{-2R}`.
    RateLimited,
    /// `sqrt(P)/sigma_x in [e^{-(R+Rc)}, 1 - sqrt(1 - e^{-2R}))`: minimizer `sigma_x - sqrt(P)`.
    PerceptionLimited,
    /// `sqrt(P)/sigma_x in [nu, e^{-(R+Rc)})`: interior stationary point.
    Stationary,
    /// `sqrt(P)/sigma_x < min(nu, e^{-(R+Rc)})`: minimizer `sigma_x - sqrt(P)` with the
    /// reconstruction floor active.
    CoupledPerceptionLimited,
}

/// Value and minimizer of the closed-form lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W2Lower {
    pub value: f64,
    pub argmin_sigma: f64,
    pub branch: LowerBranch,
}

/// Select the regime for `sqrt(P)/sigma_x`. Half-open intervals resolve ties
/// to the branch whose closed endpoint holds the value.
pub fn select_branch(prob: &W2Problem) -> LowerBranch {
    let r = prob.rates.r();
    if r == 0.0 {
        return LowerBranch::ZeroRate;
    }
    if prob.p.is_infinite() {
        return LowerBranch::RateLimited;
    }
    let s = prob.p.sqrt() / prob.src.sigma();
    let floor_edge = (-prob.rates.total()).exp();
    if s >= floor_edge {
        // 1 - sqrt(1 - e^{-2R}), rationalized
        let rate_edge = decay(r) / (1.0 + gain_factor(r).sqrt());
        if s >= rate_edge {
            LowerBranch::RateLimited
        } else {
            LowerBranch::PerceptionLimited
        }
    } else if s >= nu(prob.rates) {
        LowerBranch::Stationary
    } else {
        LowerBranch::CoupledPerceptionLimited
    }
}

/// Closed-form lower bound.
pub fn lower_bound_piecewise(prob: &W2Problem) -> W2Lower {
    let sx = prob.src.sigma();
    let sx2 = sx * sx;
    let r = prob.rates.r();
    let sqrt_p = prob.p.sqrt();
    let gain = gain_factor(r);
    let root_gain = gain.sqrt();
    let floor_edge = (-prob.rates.total()).exp();

    let branch = select_branch(prob);
    let (value, argmin_sigma) = match branch {
        LowerBranch::ZeroRate => {
            let s = (sx - sqrt_p).max(0.0);
            (sx2 + s * s, s)
        }
        LowerBranch::RateLimited => (sx2 * decay(r), sx * root_gain),
        LowerBranch::PerceptionLimited => {
            let s = sx - sqrt_p;
            (sx2 + s * s - 2.0 * sx * s * root_gain, s)
        }
        LowerBranch::Stationary => {
            let c = sx * floor_edge - sqrt_p;
            (sx2 * decay(r) + c * c, (sx2 * gain + c * c).sqrt())
        }
        LowerBranch::CoupledPerceptionLimited => {
            let s = sx - sqrt_p;
            let one_minus_b = -(-prob.rates.total()).exp_m1();
            let spread = one_minus_b * (1.0 + floor_edge - 2.0 * sqrt_p / sx);
            (sx2 + s * s - 2.0 * sx2 * root_gain * spread.sqrt(), s)
        }
    };
    W2Lower { value, argmin_sigma, branch }
}

/// Lower bound on the reconstruction's distortion-rate function at `R + Rc`
/// implied by the W2 budget: `(sigma_x e^{-(R+Rc)} - sqrt(P))_+^2`.
pub fn reconstruction_drf_floor(prob: &W2Problem) -> f64 {
    let c = (prob.src.sigma() * (-prob.rates.total()).exp() - prob.p.sqrt()).max(0.0);
    c * c
}

/// The objective `g` minimized by the lower bound.
#[derive(Debug, Clone, Copy)]
pub struct LowerObjective {
    sx: f64,
    sx2: f64,
    rate_gain: f64,
    floor: f64,
}

impl LowerObjective {
    pub fn new(prob: &W2Problem) -> Self {
        let sx = prob.src.sigma();
        Self { sx, sx2: sx * sx, rate_gain: gain_factor(prob.rates.r()), floor: reconstruction_drf_floor(prob) }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        // Clamp guards rounding at the low end of the interval.
        let radicand = (s * s - self.floor).max(0.0);
        self.sx2 + s * s - 2.0 * self.sx * (self.rate_gain * radicand).sqrt()
    }
}

/// Admissible interval `[(sigma_x - sqrt(P))_+, sigma_x]`.
pub fn admissible_interval(prob: &W2Problem) -> Result<Bracket> {
    let sx = prob.src.sigma();
    Bracket::new((sx - prob.p.sqrt()).max(0.0), sx)
}

/// Brute-force lower bound: a [`ORACLE_GRID_POINTS`]-point scan of `g`
/// refined by golden-section search.
pub fn lower_bound_numeric(prob: &W2Problem) -> Result<Minimum> {
    lower_bound_numeric_with(prob, ORACLE_GRID_POINTS)
}

pub fn lower_bound_numeric_with(prob: &W2Problem, points: usize) -> Result<Minimum> {
    let g = LowerObjective::new(prob);
    seeded_min(|s| g.eval(s), admissible_interval(prob)?, points, Tolerance::minimize())
}

/// The factor `rho` in `g'(s) = s rho(s)` on the branch where the
/// reconstruction floor is active; zero at the interior minimizer.
pub fn stationarity_residual(prob: &W2Problem, sigma_hat: f64) -> f64 {
    let sx = prob.src.sigma();
    let gain = gain_factor(prob.rates.r());
    let c = sx * (-prob.rates.total()).exp() - prob.p.sqrt();
    2.0 - 2.0 * sx * gain / (gain * (sigma_hat * sigma_hat - c * c)).sqrt()
}

/// Both bounds; `tight` only at `P = 0` or `Rc = inf`, the two cases where
/// they are known to meet.
pub fn solve(prob: &W2Problem) -> BoundPair {
    let upper = upper_bound(prob);
    let lower = lower_bound_piecewise(prob);
    let tight = prob.p == 0.0 || prob.rates.rc().is_infinite();
    BoundPair { lower: lower.value, upper, tight, argmin_sigma: lower.argmin_sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const INF: f64 = f64::INFINITY;

    fn prob(r: f64, rc: f64, p: f64) -> W2Problem {
        W2Problem::new(GaussianSpec::standard(), RateBudget::new(r, rc).unwrap(), p).unwrap()
    }

    fn rates(r: f64, rc: f64) -> RateBudget {
        RateBudget::new(r, rc).unwrap()
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu(rates(1.0, 0.0)), 0.0);
        assert_abs_diff_eq!(nu(rates(1.0, 1.0)), 0.067_667_641_618_306_35, epsilon = 1e-15);
        assert_eq!(nu(rates(INF, 3.0)), 0.0);
        assert_eq!(nu(rates(INF, INF)), 0.0);
    }

    #[test]
    fn upper_examples() {
        assert_abs_diff_eq!(upper_bound(&prob(1.0, 1.0, 1.0)), 0.151_172_169_948_680_5, epsilon = 1e-12);
        assert_abs_diff_eq!(upper_bound(&prob(1.0, 1.0, 0.0)), 0.157_362_943_983_466_4, epsilon = 1e-12);
        for p in [0.0, 0.3, 1.0, INF] {
            assert_eq!(upper_bound(&prob(INF, 2.0, p)), 0.0);
        }
    }

    #[test]
    fn piecewise_examples() {
        let l = lower_bound_piecewise(&prob(1.0, 1.0, 0.01));
        assert_eq!(l.branch, LowerBranch::Stationary);
        assert_abs_diff_eq!(l.value, 0.136_583_865_478_024_3, epsilon = 1e-14);

        let l = lower_bound_piecewise(&prob(1.0, 1.0, 1.0));
        assert_eq!(l.branch, LowerBranch::RateLimited);
        assert_abs_diff_eq!(l.value, (-2.0f64).exp(), epsilon = 1e-15);

        let l = lower_bound_piecewise(&prob(0.0, 5.0, 4.0));
        assert_eq!(l.branch, LowerBranch::ZeroRate);
        assert_eq!(l.value, 1.0);
    }

    #[test]
    fn numeric_examples() {
        let m = lower_bound_numeric(&prob(1.0, 1.0, 0.01)).unwrap();
        assert_abs_diff_eq!(m.value, 0.136_583_865_478_024_3, epsilon = 1e-8);

        let p = prob(0.5, 0.0, 0.04);
        let m = lower_bound_numeric(&p).unwrap();
        assert_abs_diff_eq!(m.value, lower_bound_piecewise(&p).value, epsilon = 1e-8);
        // numpy scan on [0.8, 1]
        assert_abs_diff_eq!(m.value, 0.533_146_618_457_843_1, epsilon = 1e-8);

        let m = lower_bound_numeric(&prob(2.0, 0.1, 10.0)).unwrap();
        assert_abs_diff_eq!(m.value, (-4.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn infinite_budget_short_circuits() {
        let l = lower_bound_piecewise(&prob(1.5, 0.2, INF));
        assert_eq!(l.branch, LowerBranch::RateLimited);
        assert_eq!(l.value, (-3.0f64).exp());
        let l = lower_bound_piecewise(&prob(0.0, 0.2, INF));
        assert_eq!(l.value, 1.0);
    }

    #[test]
    fn each_branch_reachable() {
        // Low rate, large Rc: [e^{-(R+Rc)}, 1 - sqrt(1 - e^{-2R})) is non-empty.
        assert_eq!(select_branch(&prob(0.1, 3.0, 0.25)), LowerBranch::PerceptionLimited);
        assert_eq!(select_branch(&prob(1.0, 1.0, 1e-4)), LowerBranch::CoupledPerceptionLimited);
        assert_eq!(select_branch(&prob(1.0, 1.0, 0.01)), LowerBranch::Stationary);
        assert_eq!(select_branch(&prob(1.0, 1.0, 1.0)), LowerBranch::RateLimited);
    }

    #[test]
    fn branch_ties_go_to_closed_endpoint() {
        let r = rates(1.0, 1.0);
        let edge = (-2.0f64).exp();
        assert_eq!(select_branch(&prob(1.0, 1.0, edge * edge)), LowerBranch::RateLimited);
        let v = nu(r);
        assert_eq!(select_branch(&prob(1.0, 1.0, v * v)), LowerBranch::Stationary);
    }

    #[test]
    fn stationary_minimizer_zeroes_rho() {
        let p = prob(1.0, 1.0, 0.01);
        let l = lower_bound_piecewise(&p);
        assert_abs_diff_eq!(stationarity_residual(&p, l.argmin_sigma), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn solve_examples() {
        let b = solve(&prob(1.0, 1.0, 0.0));
        assert!(b.tight);
        assert_abs_diff_eq!(b.lower, 0.157_362_943_983_466_4, epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper, b.lower, epsilon = 1e-12);

        let b = solve(&prob(1.0, INF, 0.25));
        assert!(b.tight);
        assert_abs_diff_eq!(b.lower, (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, b.lower, epsilon = 1e-12);

        let b = solve(&prob(1.0, 1.0, 1.0));
        assert!(!b.tight);
        assert!(b.lower < b.upper);
        assert_abs_diff_eq!(b.lower, (-2.0f64).exp(), epsilon = 1e-15);
    }
}
