//! Grid checks of every closed form against its oracle or defining identity.
//!
//! Each check reports the largest deviation seen over its grid and passes
//! when that deviation is within the tolerance. The correlation factor is
//! injectable so a deliberately wrong one can be shown to fail.

use rayon::prelude::*;

use crate::bounds::{sandwich_from_slb, MomentSpec, TestChannelOutputs};
use crate::error::{Error, Result};
use crate::gaussian::{gaussian_drf, ocsc_with_xi, test_channel_params, w2sq_gaussians, xi, GaussianSpec, RateBudget};
use crate::kl::{self, KlProblem};
use crate::numerics::grid_min;
use crate::w2::{self, W2Problem};

pub type XiFn = fn(RateBudget) -> f64;

/// Brute-force resolution used by the oracle checks.
pub const ORACLE_POINTS: usize = 1_000_000;

/// `n` log-spaced points from `lo` to `hi` inclusive (`n = 1` gives `[lo]`).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
        }
    }
}

/// The `(R, Rc, P)` axes shared by the grid checks.
///
/// `R` is log-spaced on `[1e-3, 10]`. `Rc` is `0`, then log-spaced on
/// `[1e-3, 10]`, then `inf`; `P` likewise on `[1e-4, 10]`. Each axis has
/// `density` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub r: Vec<f64>,
    pub rc: Vec<f64>,
    pub p: Vec<f64>,
}

impl Grid {
    pub fn new(density: usize) -> Result<Self> {
        if density < 2 {
            return Err(Error::invalid("density", format!("must be >= 2, got {density}")));
        }
        let bracketed = |lo, hi| {
            let mut v = vec![0.0];
            v.extend(log_grid(lo, hi, density - 2));
            v.push(f64::INFINITY);
            v
        };
        Ok(Self { r: log_grid(1e-3, 10.0, density), rc: bracketed(1e-3, 10.0), p: bracketed(1e-4, 10.0) })
    }

    pub fn rate_pairs(&self) -> Vec<RateBudget> {
        let mut v = Vec::with_capacity(self.r.len() * self.rc.len());
        for &r in &self.r {
            for &rc in &self.rc {
                v.push(RateBudget { r, rc });
            }
        }
        v
    }

    /// All `(R, Rc, P)` triples, `P` varying fastest.
    pub fn triples(&self) -> Vec<(RateBudget, f64)> {
        let mut v = Vec::with_capacity(self.r.len() * self.rc.len() * self.p.len());
        for rates in self.rate_pairs() {
            for &p in &self.p {
                v.push((rates, p));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_deviation: f64,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line per check: `PASS|FAIL name max_dev=... samples=...`.
    pub fn render(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {} max_dev={:e} samples={}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_deviation,
                    c.samples
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Verifier {
    density: usize,
    tolerance: f64,
    oracle_points: usize,
    xi: XiFn,
}

fn max_dev(devs: impl IntoIterator<Item = f64>) -> (f64, usize) {
    // NaN counts as an infinite deviation.
    devs.into_iter().fold((0.0, 0), |(m, n), d| (if d.is_nan() { f64::INFINITY } else { m.max(d) }, n + 1))
}

/// Per-point KL quantities shared by several checks.
struct KlPoint {
    rates: RateBudget,
    p: f64,
    sp: f64,
    lower: f64,
    upper: f64,
    tight: bool,
    /// Golden-section lower bound before `solve` reconciles it with `upper`.
    golden: f64,
    oracle: f64,
}

impl Verifier {
    pub fn new(density: usize, tolerance: f64) -> Result<Self> {
        Grid::new(density)?;
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::invalid("tolerance", format!("must be > 0, got {tolerance}")));
        }
        Ok(Self { density, tolerance, oracle_points: ORACLE_POINTS, xi })
    }

    /// Replace the correlation factor used by the closed forms under test.
    pub fn with_xi(mut self, xi: XiFn) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_oracle_points(mut self, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid("oracle_points", format!("must be >= 2, got {points}")));
        }
        self.oracle_points = points;
        Ok(self)
    }

    fn result(&self, name: &'static str, devs: impl IntoIterator<Item = f64>) -> CheckResult {
        let (max_deviation, samples) = max_dev(devs);
        CheckResult { name, max_deviation, samples, passed: max_deviation <= self.tolerance }
    }

    pub fn run(&self) -> Result<VerifyReport> {
        let grid = Grid::new(self.density)?;
        let mut checks = vec![
            self.ocsc_decomposition(&grid)?,
            self.ocsc_endpoints(&grid),
            self.ocsc_monotone(&grid),
            self.sigma_of_p_roundtrip()?,
        ];
        checks.extend(self.kl_checks(&grid)?);
        checks.extend(self.w2_checks(&grid)?);
        checks.push(self.kl_w2_correspondence(&grid)?);
        checks.push(self.gaussian_sandwich(&grid)?);
        Ok(VerifyReport { checks })
    }

    fn pairs() -> [(GaussianSpec, GaussianSpec); 2] {
        [
            (GaussianSpec::standard(), GaussianSpec { mu: 1.0, sigma: 2.0 }),
            (GaussianSpec { mu: -0.5, sigma: 1.5 }, GaussianSpec { mu: 0.25, sigma: 0.4 }),
        ]
    }

    /// Distortion splits into the two distortion-rate terms plus the W2 cost
    /// of transporting `Y` to `Y_hat`.
    fn ocsc_decomposition(&self, grid: &Grid) -> Result<CheckResult> {
        let mut devs = Vec::new();
        for (src, rec) in Self::pairs() {
            for rates in grid.rate_pairs() {
                let t = test_channel_params(&src, &rec, rates)?;
                let y = GaussianSpec { mu: src.mu(), sigma: t.y_sd };
                let yhat = GaussianSpec { mu: rec.mu(), sigma: t.yhat_sd };
                let parts = gaussian_drf(src.sigma(), rates.r()) + gaussian_drf(rec.sigma(), rates.total()) + w2sq_gaussians(&y, &yhat);
                devs.push((parts - ocsc_with_xi(&src, &rec, (self.xi)(rates))).abs());
            }
        }
        Ok(self.result("ocsc_decomposition", devs))
    }

    /// `R = 0` gives the independent-coupling value and `R = inf` the W2 distance.
    fn ocsc_endpoints(&self, grid: &Grid) -> CheckResult {
        let mut devs = Vec::new();
        for (src, rec) in Self::pairs() {
            let dm = src.mu() - rec.mu();
            for &rc in &grid.rc {
                let zero = ocsc_with_xi(&src, &rec, (self.xi)(RateBudget { r: 0.0, rc }));
                devs.push((zero - (dm * dm + src.variance() + rec.variance())).abs());
                let full = ocsc_with_xi(&src, &rec, (self.xi)(RateBudget { r: f64::INFINITY, rc }));
                devs.push((full - w2sq_gaussians(&src, &rec)).abs());
            }
        }
        self.result("ocsc_endpoints", devs)
    }

    fn ocsc_monotone(&self, grid: &Grid) -> CheckResult {
        let mut devs = Vec::new();
        for (src, rec) in Self::pairs() {
            let d = |r, rc| ocsc_with_xi(&src, &rec, (self.xi)(RateBudget { r, rc }));
            for &rc in &grid.rc {
                devs.extend(grid.r.windows(2).map(|w| (d(w[1], rc) - d(w[0], rc)).max(0.0)));
            }
            for &r in &grid.r {
                devs.extend(grid.rc.windows(2).map(|w| (d(r, w[1]) - d(r, w[0])).max(0.0)));
            }
        }
        self.result("ocsc_monotone", devs)
    }

    /// `psi(sigma(P)) = P` on 100 log-spaced `P` in `[1e-6, 50]`, and
    /// `sigma(psi(s)) = s` on `(0, 1]`.
    fn sigma_of_p_roundtrip(&self) -> Result<CheckResult> {
        let mut devs = Vec::new();
        for p in log_grid(1e-6, 50.0, 100) {
            devs.push((kl::psi(kl::sigma_of_p(1.0, p)?, 1.0) - p).abs());
        }
        for s in log_grid(1e-3, 1.0, 100) {
            devs.push((kl::sigma_of_p(1.0, kl::psi(s, 1.0))? - s).abs());
        }
        devs.push((kl::sigma_of_p(1.0, 0.0)? - 1.0).abs());
        devs.push(kl::sigma_of_p(1.0, f64::INFINITY)?.abs());
        Ok(self.result("sigma_of_p_roundtrip", devs))
    }

    fn kl_points(&self, grid: &Grid) -> Result<Vec<KlPoint>> {
        let src = GaussianSpec::standard();
        grid.triples()
            .into_par_iter()
            .map(|(rates, p)| {
                let prob = KlProblem::new(src, rates, p)?;
                let b = kl::solve(&prob)?;
                let golden = kl::lower_bound(&prob)?.value;
                let sp = kl::sigma_of_p(1.0, p)?;
                let objective = kl::LowerObjective::new(&prob);
                let oracle = grid_min(|s| objective.eval(s), kl::admissible_interval(&prob)?, self.oracle_points)?;
                Ok(KlPoint {
                    rates,
                    p,
                    sp,
                    lower: b.lower,
                    upper: kl::upper_from_parts(1.0, sp, (self.xi)(rates)),
                    tight: b.tight,
                    golden,
                    oracle: oracle.value,
                })
            })
            .collect()
    }

    fn kl_checks(&self, grid: &Grid) -> Result<Vec<CheckResult>> {
        let pts = self.kl_points(grid)?;
        let ordering = self.result(
            "kl_ordering",
            pts.iter().map(|k| (k.lower - k.upper).max(0.0).max(k.golden - k.upper - 1e-12)),
        );
        let oracle = self.result("kl_oracle", pts.iter().map(|k| (k.golden - k.oracle).abs()));
        // Every tight point has equal bounds. The common value is the
        // coincident formula under the threshold condition or at P = 0; with
        // Rc = inf and a small sigma(P) it is sigma_x^2 e^{-2R} instead.
        let mut coincide = Vec::new();
        for k in pts.iter().filter(|k| k.tight) {
            coincide.push((k.upper - k.golden).abs());
            let prob = KlProblem::new(GaussianSpec::standard(), k.rates, k.p)?;
            if k.p == 0.0 || k.sp >= kl::tightness_threshold(&prob) {
                let c = 1.0 + k.sp * k.sp - 2.0 * k.sp * (self.xi)(k.rates);
                coincide.push((k.upper - c).abs());
            }
        }
        let coincide = self.result("kl_tight_coincide", coincide);

        let mut thresholds = Vec::new();
        for k in &pts {
            if k.p.is_finite() {
                let prob = KlProblem::new(GaussianSpec::standard(), k.rates, k.p)?;
                let t = kl::tightness_threshold(&prob);
                let lo = kl::varsigma(k.rates, 1.0)?;
                let hi = kl::varsigma_prime(k.rates, 1.0)?;
                thresholds.push((lo - t).max(0.0).max(t - hi));
            }
        }
        let threshold_order = self.result("kl_threshold_order", thresholds);

        // Non-increasing along each axis; points are stored with P fastest.
        let (np, nrc) = (grid.p.len(), grid.rc.len());
        let idx = |i: usize, j: usize, l: usize| (i * nrc + j) * np + l;
        let mut incr = Vec::new();
        for i in 0..grid.r.len() {
            for j in 0..nrc {
                for l in 0..np {
                    let here = &pts[idx(i, j, l)];
                    let mut next = Vec::new();
                    if i + 1 < grid.r.len() {
                        next.push(&pts[idx(i + 1, j, l)]);
                    }
                    if j + 1 < nrc {
                        next.push(&pts[idx(i, j + 1, l)]);
                    }
                    if l + 1 < np {
                        next.push(&pts[idx(i, j, l + 1)]);
                    }
                    for n in next {
                        incr.push((n.lower - here.lower).max(0.0));
                        incr.push((n.upper - here.upper).max(0.0));
                    }
                }
            }
        }
        let monotone = self.result("kl_monotone", incr);
        Ok(vec![ordering, oracle, coincide, threshold_order, monotone])
    }

    fn w2_checks(&self, grid: &Grid) -> Result<Vec<CheckResult>> {
        let src = GaussianSpec::standard();
        let triples = grid.triples();
        let oracle_devs: Vec<f64> = triples
            .par_iter()
            .map(|&(rates, p)| {
                let prob = W2Problem::new(src, rates, p)?;
                let numeric = w2::lower_bound_numeric_with(&prob, self.oracle_points)?;
                Ok((w2::lower_bound_piecewise(&prob).value - numeric.value).abs())
            })
            .collect::<Result<_>>()?;
        let oracle = self.result("w2_oracle", oracle_devs);

        let mut ordering = Vec::new();
        let mut exceptions = Vec::new();
        let mut intervals = Vec::new();
        for &(rates, p) in &triples {
            let prob = W2Problem::new(src, rates, p)?;
            let lower = w2::lower_bound_piecewise(&prob);
            let upper = w2::upper_from_parts(1.0, p, (self.xi)(rates));
            ordering.push((lower.value - upper - 1e-12).max(0.0));
            if p == 0.0 || rates.rc().is_infinite() {
                exceptions.push((upper - lower.value).abs());
            }
            if rates.r().is_finite() {
                // [e^{-(R+Rc)}, 1 - sqrt(1 - e^{-2R})) and [nu, e^{-(R+Rc)}) never both non-empty.
                let b = (-rates.total()).exp();
                let a = 1.0 - (1.0 - (-2.0 * rates.r()).exp()).sqrt();
                let both = b < a && w2::nu(rates) < b;
                intervals.push(if both { 1.0 } else { 0.0 });
            }
        }
        Ok(vec![
            oracle,
            self.result("w2_ordering", ordering),
            self.result("w2_exceptions", exceptions),
            self.result("w2_branch_intervals", intervals),
        ])
    }

    /// The KL upper bound at `P` equals the W2 upper bound at `(sigma_x - sigma(P))^2`.
    fn kl_w2_correspondence(&self, grid: &Grid) -> Result<CheckResult> {
        let mut devs = Vec::new();
        for (rates, p) in grid.triples() {
            let x = (self.xi)(rates);
            let sp = kl::sigma_of_p(1.0, p)?;
            let kl_upper = kl::upper_from_parts(1.0, sp, x);
            let w2_upper = w2::upper_bound(&W2Problem::new(GaussianSpec::standard(), rates, (1.0 - sp).powi(2))?);
            devs.push((kl_upper - w2_upper).abs());
        }
        Ok(self.result("kl_w2_correspondence", devs))
    }

    /// With Gaussian moments the Shannon-lower-bound sandwich collapses to
    /// the closed form.
    fn gaussian_sandwich(&self, grid: &Grid) -> Result<CheckResult> {
        let mut devs = Vec::new();
        for (src, rec) in Self::pairs() {
            let ms = MomentSpec::gaussian(src.mu(), src.sigma())?;
            let mr = MomentSpec::gaussian(rec.mu(), rec.sigma())?;
            for rates in grid.rate_pairs() {
                let s = sandwich_from_slb(&ms, &mr, rates, TestChannelOutputs::Gaussian)?;
                let exact = ocsc_with_xi(&src, &rec, (self.xi)(rates));
                devs.push((s.lower - exact).abs());
                devs.push(s.upper.map_or(f64::INFINITY, |u| (u - s.lower).abs()));
            }
        }
        Ok(self.result("gaussian_sandwich", devs))
    }
}
