//! Scalar root finding and one-dimensional minimization.
//!
//! Three primitives back every bound in the crate:
//!
//! - [`bisect_root`] for monotone equations such as `psi(sigma) = P`;
//! - [`golden_min`] for golden-section refinement of a unimodal basin;
//! - [`grid_min`], an exhaustive equispaced scan used both to seed
//!   [`golden_min`] and, at high resolution, as the independent oracle the
//!   test suites compare closed forms against.

use crate::error::{Error, Result};

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Stopping rule for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
    rel_tol: f64,
    max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) || !(abs_tol + rel_tol).is_finite() {
            return Err(Error::invalid("tolerance", "abs_tol and rel_tol must be finite and >= 0"));
        }
        if abs_tol + rel_tol <= 0.0 {
            return Err(Error::invalid("tolerance", "abs_tol + rel_tol must be positive"));
        }
        if max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(Self { abs_tol, rel_tol, max_iter })
    }

    /// Default for root finding: absolute 1e-12, 200 iterations.
    pub const fn root() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 0.0, max_iter: 200 }
    }

    /// Default for minimization: absolute 1e-10, 200 iterations.
    pub const fn minimize() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_iter: 200 }
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    fn width_allowed(&self, x: f64) -> f64 {
        self.abs_tol + self.rel_tol * x.abs()
    }
}

/// Closed interval `[lo, hi]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("bracket", format!("endpoints must be finite, got [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::invalid("bracket", format!("lo > hi: [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    /// The `i`-th of `points` equispaced abscissae; both endpoints are hit exactly.
    pub(crate) fn abscissa(&self, i: usize, points: usize) -> f64 {
        if i + 1 == points {
            self.hi
        } else {
            self.lo + self.width() * (i as f64 / (points - 1) as f64)
        }
    }
}

/// A located minimum: the abscissa and the function value there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
}

/// Bisection that returns the final bracket rather than a point.
///
/// The returned bracket contains a sign change of `f` (or an exact root at
/// one of its endpoints) and its width is at most
/// `abs_tol + rel_tol * |midpoint|`.
pub fn bisect_bracket<F>(mut f: F, bracket: Bracket, tol: Tolerance) -> Result<Bracket>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Bracket { lo, hi: lo });
    }
    if f_hi == 0.0 {
        return Ok(Bracket { lo: hi, hi });
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;

    for _ in 0..tol.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol.width_allowed(mid) {
            return Ok(Bracket { lo, hi });
        }
        // Adjacent doubles: the bracket cannot shrink further.
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(Bracket { lo: mid, hi: mid });
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = lo + 0.5 * (hi - lo);
    if hi - lo <= tol.width_allowed(mid) {
        Ok(Bracket { lo, hi })
    } else {
        Err(Error::NoConvergence { iterations: tol.max_iter, width: hi - lo })
    }
}

/// Root of a monotone function by bisection; returns the midpoint of the
/// final bracket produced by [`bisect_bracket`].
pub fn bisect_root<F>(f: F, bracket: Bracket, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    bisect_bracket(f, bracket, tol).map(|b| b.midpoint())
}

/// Golden-section search for a minimum of `f` on `bracket`.
///
/// The interior search stops once the bracket is narrower than the
/// tolerance. The endpoints are then compared against the interior
/// estimate so that boundary minima are reported exactly.
pub fn golden_min<F>(mut f: F, bracket: Bracket, tol: Tolerance) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);

    let mut converged = false;
    for _ in 0..tol.max_iter {
        if b - a <= tol.width_allowed(0.5 * (a + b)) {
            converged = true;
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if !converged && b - a > tol.width_allowed(0.5 * (a + b)) {
        return Err(Error::NoConvergence { iterations: tol.max_iter, width: b - a });
    }

    let mut best = if fd < fc { Minimum { arg: d, value: fd } } else { Minimum { arg: c, value: fc } };
    for x in [bracket.lo, bracket.hi] {
        let fx = f(x);
        if fx < best.value || (fx == best.value && x < best.arg) {
            best = Minimum { arg: x, value: fx };
        }
    }
    Ok(best)
}

/// Exhaustive scan of `points` equispaced abscissae including both endpoints.
///
/// Ties resolve toward the smaller abscissa. NaN values never win.
pub fn grid_min<F>(mut f: F, bracket: Bracket, points: usize) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    if points < 2 {
        return Err(Error::invalid("points", "grid needs at least 2 points"));
    }
    let mut best = Minimum { arg: bracket.lo, value: f64::NAN };
    for i in 0..points {
        let x = bracket.abscissa(i, points);
        let fx = f(x);
        if fx < best.value || best.value.is_nan() && !fx.is_nan() {
            best = Minimum { arg: x, value: fx };
        }
    }
    Ok(best)
}

/// Grid scan to locate the best basin, then golden refinement between the
/// neighbours of the best grid point.
///
/// Returns whichever of the grid winner and the refined point is lower, so
/// the result is never worse than the scan alone.
pub(crate) fn seeded_min<F>(mut f: F, bracket: Bracket, points: usize, tol: Tolerance) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    if bracket.width() == 0.0 {
        return Ok(Minimum { arg: bracket.lo, value: f(bracket.lo) });
    }
    let coarse = grid_min(&mut f, bracket, points)?;
    let step = bracket.width() / (points - 1) as f64;
    let local = Bracket {
        lo: (coarse.arg - step).max(bracket.lo),
        hi: (coarse.arg + step).min(bracket.hi),
    };
    let refined = golden_min(&mut f, local, tol)?;
    Ok(if refined.value < coarse.value { refined } else { coarse })
}
