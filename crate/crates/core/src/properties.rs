//! Randomized checks of the invariants every module is expected to hold.

use proptest::prelude::*;

use crate::bounds::{self, MomentSpec, TestChannelOutputs};
use crate::gaussian::{gaussian_drf, ocsc_gaussian, test_channel_params, w2sq_gaussians, xi, GaussianSpec, RateBudget};
use crate::kl::{self, KlProblem};
use crate::numerics::{bisect_bracket, grid_min, Bracket, Tolerance};
use crate::sim::{self, SimConfig};
use crate::w2::{self, LowerBranch, W2Problem};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

/// Log-uniform on `[1e-3, 10]`.
fn rate() -> impl Strategy<Value = f64> {
    (-3.0f64..1.0).prop_map(|e| 10f64.powf(e))
}

/// A rate that may also be 0 or inf.
fn ext_rate() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 1 => Just(f64::INFINITY), 6 => rate()]
}

/// Log-uniform on `[1e-4, 10]`, sometimes 0 or inf.
fn perception() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(0.0), 1 => Just(f64::INFINITY), 6 => (-4.0f64..1.0).prop_map(|e| 10f64.powf(e))]
}

fn sigma() -> impl Strategy<Value = f64> {
    0.1f64..5.0
}

fn gauss() -> impl Strategy<Value = GaussianSpec> {
    (-3.0f64..3.0, sigma()).prop_map(|(m, s)| GaussianSpec::new(m, s).unwrap())
}

fn budget(r: f64, rc: f64) -> RateBudget {
    RateBudget::new(r, rc).unwrap()
}

fn kl_bounds(sx: f64, r: f64, rc: f64, p: f64) -> (f64, f64) {
    let prob = KlProblem::new(GaussianSpec::new(0.0, sx).unwrap(), budget(r, rc), p).unwrap();
    (kl::lower_bound(&prob).unwrap().value, kl::upper_bound(&prob).unwrap())
}

fn w2_bounds(sx: f64, r: f64, rc: f64, p: f64) -> (f64, f64) {
    let prob = W2Problem::new(GaussianSpec::new(0.0, sx).unwrap(), budget(r, rc), p).unwrap();
    (w2::lower_bound_piecewise(&prob).value, w2::upper_bound(&prob))
}

/// Weak monotonicity with slack for rounding in the numerical minimum.
fn non_increasing(a: f64, b: f64, slack: f64) -> bool {
    b <= a + slack * a.abs().max(1.0)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bisect_bracket_contains_root_and_is_narrow(root in -5.0f64..5.0, abs in 1e-12f64..1e-3, rel in 0.0f64..1e-6) {
        let tol = Tolerance::new(abs, rel, 400).unwrap();
        let f = |x: f64| (x - root).powi(3) + (x - root);
        let b = bisect_bracket(f, Bracket::new(-10.0, 10.0).unwrap(), tol).unwrap();
        prop_assert!(b.width() <= abs + rel * b.midpoint().abs());
        prop_assert!(f(b.lo()) <= 0.0 && f(b.hi()) >= 0.0);
    }

    #[test]
    fn grid_min_bounds_truth_and_refines(c in 0.0f64..1.0, k in 1usize..9) {
        let f = |x: f64| (x - c).powi(2) + 0.3 * (7.0 * x).sin();
        let unit = Bracket::new(0.0, 1.0).unwrap();
        let truth = grid_min(f, unit, 200_001).unwrap().value;
        let n = 10 * k + 1;
        let coarse = grid_min(f, unit, n).unwrap().value;
        let fine = grid_min(f, unit, 2 * n - 1).unwrap().value;
        prop_assert!(coarse >= truth - 1e-4);
        prop_assert!(fine <= coarse);
    }

    #[test]
    fn xi_is_monotone_and_in_unit_interval(r in ext_rate(), rc in ext_rate(), dr in 0.0f64..2.0, drc in 0.0f64..2.0) {
        let x = xi(budget(r, rc));
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!(xi(budget(r + dr, rc)) >= x);
        prop_assert!(xi(budget(r, rc + drc)) >= x);
    }

    #[test]
    fn ocsc_monotone_symmetric_and_above_w2(a in gauss(), b in gauss(), r in rate(), rc in ext_rate(), dr in 0.01f64..2.0, drc in 0.01f64..2.0) {
        let d = ocsc_gaussian(&a, &b, budget(r, rc));
        prop_assert!(ocsc_gaussian(&a, &b, budget(r + dr, rc)) <= d + 1e-12);
        let d_more_rc = ocsc_gaussian(&a, &b, budget(r, rc + drc));
        if rc.is_finite() {
            prop_assert!(d_more_rc < d);
        } else {
            prop_assert_eq!(d_more_rc, d);
        }
        prop_assert!((ocsc_gaussian(&b, &a, budget(r, rc)) - d).abs() <= 1e-12 * d.max(1.0));
        let w = w2sq_gaussians(&a, &b);
        prop_assert!(d > w);
        prop_assert!((ocsc_gaussian(&a, &b, budget(f64::INFINITY, rc)) - w).abs() <= 1e-12 * w.max(1.0));
    }

    #[test]
    fn ocsc_decomposes_through_test_channel(a in gauss(), b in gauss(), r in prop_oneof![Just(0.0), rate()], rc in ext_rate()) {
        let rates = budget(r, rc);
        let t = test_channel_params(&a, &b, rates).unwrap();
        // y_sd is 0 at R = 0, so the output W2 is written out directly.
        let w2_outputs = (a.mu() - b.mu()).powi(2) + (t.y_sd - t.yhat_sd).powi(2);
        let sum = gaussian_drf(a.sigma(), r) + gaussian_drf(b.sigma(), rates.total()) + w2_outputs;
        let d = ocsc_gaussian(&a, &b, rates);
        prop_assert!((sum - d).abs() <= 1e-12 * d.max(1.0), "sum {} ocsc {}", sum, d);
    }

    #[test]
    fn moment_bound_is_monotone_and_slb_tight(a in gauss(), b in gauss(), u in 0.0f64..1.0, v in 0.0f64..1.0, du in 0.0f64..1.0, r in ext_rate(), rc in ext_rate()) {
        let src = MomentSpec::gaussian(a.mu(), a.sigma()).unwrap();
        let rec = MomentSpec::gaussian(b.mu(), b.sigma()).unwrap();
        let (vs, vr) = (src.variance(), rec.variance());
        let base = bounds::lower_bound_from_drf(&src, &rec, u * vs, v * vr).unwrap();
        let u2 = (u + du).min(1.0);
        prop_assert!(bounds::lower_bound_from_drf(&src, &rec, u2 * vs, v * vr).unwrap() >= base - 1e-12);
        let v2 = (v + du).min(1.0);
        prop_assert!(bounds::lower_bound_from_drf(&src, &rec, u * vs, v2 * vr).unwrap() >= base - 1e-12);

        prop_assert!((bounds::shannon_lb_drf(&src, r) - gaussian_drf(a.sigma(), r)).abs() <= 1e-12 * vs.max(1.0));
        let rates = budget(r, rc);
        let s = bounds::sandwich_from_slb(&src, &rec, rates, TestChannelOutputs::Gaussian).unwrap();
        let d = ocsc_gaussian(&a, &b, rates);
        prop_assert!((s.lower - d).abs() <= 1e-12 * d.max(1.0));
        prop_assert_eq!(s.upper, Some(s.lower));
    }

    #[test]
    fn psi_strictly_decreasing_and_inverted(sx in sigma(), u in 1e-3f64..1.0, w in 1e-3f64..1.0) {
        let (s1, s2) = (u.min(w) * sx, u.max(w) * sx);
        prop_assume!(s2 - s1 > 1e-9 * sx);
        prop_assert!(kl::psi(s1, sx) > kl::psi(s2, sx));
        let back = kl::sigma_of_p(sx, kl::psi(s1, sx)).unwrap();
        prop_assert!((back - s1).abs() <= 1e-10 * sx.max(1.0), "{} vs {}", back, s1);
    }

    #[test]
    fn kl_bounds_ordered_and_monotone(sx in sigma(), r in ext_rate(), rc in ext_rate(), p in perception(), d in 0.01f64..1.0) {
        let (lo, up) = kl_bounds(sx, r, rc, p);
        prop_assert!(lo <= up + 1e-12 * up.max(1.0));
        for (lo2, up2) in [kl_bounds(sx, r + d, rc, p), kl_bounds(sx, r, rc + d, p), kl_bounds(sx, r, rc, p + d)] {
            prop_assert!(non_increasing(up, up2, 1e-12));
            prop_assert!(non_increasing(lo, lo2, 1e-9));
        }
    }

    #[test]
    fn kl_zeta_dominates_lower_bound(sx in sigma(), r in ext_rate(), rc in ext_rate(), p in perception(), t in 0.0f64..1.0) {
        let prob = KlProblem::new(GaussianSpec::new(0.0, sx).unwrap(), budget(r, rc), p).unwrap();
        let lo = kl::lower_bound(&prob).unwrap().value;
        let interval = kl::admissible_interval(&prob).unwrap();
        let s = interval.lo() + t * interval.width();
        prop_assert!(kl::LowerObjective::new(&prob).eval(s) >= lo - 1e-12);
    }

    #[test]
    fn kl_threshold_between_envelopes(sx in sigma(), r in rate(), rc in ext_rate(), p in perception()) {
        let rates = budget(r, rc);
        let prob = KlProblem::new(GaussianSpec::new(0.0, sx).unwrap(), rates, p).unwrap();
        let t = kl::tightness_threshold(&prob);
        prop_assert!(kl::varsigma(rates, sx).unwrap() <= t);
        prop_assert!(t <= kl::varsigma_prime(rates, sx).unwrap());
    }

    #[test]
    fn kl_tight_points_take_the_coincident_value(sx in sigma(), r in ext_rate(), rc in ext_rate(), p in perception()) {
        let prob = KlProblem::new(GaussianSpec::new(0.0, sx).unwrap(), budget(r, rc), p).unwrap();
        let sp = kl::sigma_of_p(sx, p).unwrap();
        let b = kl::solve(&prob).unwrap();
        let golden = kl::lower_bound(&prob).unwrap().value;
        if b.tight {
            prop_assert!((b.upper - golden).abs() <= 1e-9);
        }
        if p == 0.0 || sp >= kl::tightness_threshold(&prob) {
            prop_assert!((b.upper - kl::coincident_value(&prob).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn w2_piecewise_matches_numeric(sx in sigma(), r in ext_rate(), rc in ext_rate(), p in perception()) {
        let prob = W2Problem::new(GaussianSpec::new(0.0, sx).unwrap(), budget(r, rc), p).unwrap();
        let closed = w2::lower_bound_piecewise(&prob);
        let numeric = w2::lower_bound_numeric(&prob).unwrap();
        prop_assert!((closed.value - numeric.value).abs() <= 1e-8 * sx * sx, "{:?} vs {:?}", closed, numeric);
        if closed.branch == LowerBranch::Stationary {
            prop_assert!(w2::stationarity_residual(&prob, closed.argmin_sigma).abs() <= 1e-8);
        }
    }

    #[test]
    fn w2_middle_intervals_are_exclusive(r in rate(), rc in ext_rate()) {
        let rates = budget(r, rc);
        let floor_edge = (-rates.total()).exp();
        let rate_edge = 1.0 - (1.0 - (-2.0 * r).exp()).sqrt();
        let perception_limited = floor_edge < rate_edge;
        let stationary = w2::nu(rates) < floor_edge;
        prop_assert!(!(perception_limited && stationary));
    }

    #[test]
    fn w2_bounds_ordered_and_monotone(sx in sigma(), r in ext_rate(), rc in ext_rate(), p in perception(), d in 0.01f64..1.0) {
        let (lo, up) = w2_bounds(sx, r, rc, p);
        prop_assert!(lo <= up + 1e-12 * up.max(1.0));
        for (lo2, up2) in [w2_bounds(sx, r + d, rc, p), w2_bounds(sx, r, rc + d, p), w2_bounds(sx, r, rc, p + d)] {
            prop_assert!(non_increasing(up, up2, 1e-12));
            prop_assert!(non_increasing(lo, lo2, 1e-12));
        }
    }

    #[test]
    fn kl_and_w2_upper_bounds_correspond(sx in sigma(), r in ext_rate(), rc in ext_rate(), p in perception()) {
        let src = GaussianSpec::new(0.0, sx).unwrap();
        let rates = budget(r, rc);
        let kl_up = kl::upper_bound(&KlProblem::new(src, rates, p).unwrap()).unwrap();
        let gap = sx - kl::sigma_of_p(sx, p).unwrap();
        let w2_up = w2::upper_bound(&W2Problem::new(src, rates, gap * gap).unwrap());
        prop_assert!((kl_up - w2_up).abs() <= 1e-10 * sx * sx.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn simulation_is_reproducible(a in gauss(), b in gauss(), r in prop_oneof![Just(0.0), rate()], rc in ext_rate(), n in 1u64..5000, seed in any::<u64>()) {
        let cfg = SimConfig::new(a, b, budget(r, rc), n, seed).unwrap();
        let first = sim::simulate(&cfg).unwrap();
        let second = sim::simulate(&cfg).unwrap();
        prop_assert_eq!(format!("{first:?}"), format!("{second:?}"));
    }
}
