//! Single-letter Monte Carlo of the Gaussian output-constrained coding
//! pipeline:
//!
//! ```text
//! X ~ N(mu_x, sigma_x^2)
//! Y     = mu_x + gain (X - mu_x) + W                   forward test channel
//! Y_hat = mu_rec + (yhat_sd / y_sd) (Y - mu_x)          monotone transport
//! X_hat = Y_hat + N                                     backward channel noise
//! ```
//!
//! Samples are generated in fixed blocks of [`BLOCK_LEN`]. Block `k` draws
//! from a ChaCha8 stream seeded with `rng_seed` on stream id `k`, so the
//! output is bit-identical for any number of worker threads.
//!
//! The reconstruction divergences are moment-based: a Gaussian is fitted to
//! the sample mean and variance of `X_hat` and compared to the target. This
//! is a proxy for the marginal constraint, which concerns the true law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{
    kl_gaussians, ocsc_gaussian, test_channel_params, w2sq_gaussians, GaussianSpec, RateBudget, TestChannelParams,
};

pub const BLOCK_LEN: u64 = 1 << 16;

/// Equiprobable bins used by [`check_markov_constraints`].
pub const MARKOV_BINS: usize = 50;

/// Offset between sub-seeds in [`sweep`] (the 64-bit golden ratio).
pub const SWEEP_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub src: GaussianSpec,
    pub rec: GaussianSpec,
    pub rates: RateBudget,
    pub n_samples: u64,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn new(src: GaussianSpec, rec: GaussianSpec, rates: RateBudget, n_samples: u64, rng_seed: u64) -> Result<Self> {
        let cfg = Self { src, rec, rates, n_samples, rng_seed };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        if self.rates.r().is_infinite() {
            return Err(Error::InfiniteRate);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub empirical_distortion: f64,
    pub rec_mean: f64,
    /// Unbiased sample variance of `X_hat`.
    pub rec_var: f64,
    /// `KL(N(rec_mean, rec_var) || rec)`.
    pub kl_to_target: f64,
    /// `W2^2(N(rec_mean, rec_var), rec)`.
    pub w2sq_to_target: f64,
    pub theory_distortion: f64,
    /// Sample sd of `(X - X_hat)^2` over `sqrt(n)`; NaN when `n = 1`.
    pub stderr_distortion: f64,
}

impl SimReport {
    /// `(empirical - theory) / stderr`.
    pub fn z_score(&self) -> f64 {
        (self.empirical_distortion - self.theory_distortion) / self.stderr_distortion
    }
}

/// Running mean and sum of squared deviations, mergeable across blocks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Self { n, mean: self.mean + d * w, m2: self.m2 + other.m2 + d * d * self.n as f64 * w }
    }

    fn sample_var(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    x: f64,
    y: f64,
    yhat: f64,
    xhat: f64,
}

fn block_count(n: u64) -> u64 {
    n.div_ceil(BLOCK_LEN)
}

fn block_len(n: u64, block: u64) -> u64 {
    (n - block * BLOCK_LEN).min(BLOCK_LEN)
}

fn for_each_sample(cfg: &SimConfig, p: &TestChannelParams, block: u64, mut f: impl FnMut(Sample)) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(block);
    let (mu_x, sx) = (cfg.src.mu(), cfg.src.sigma());
    let mu_r = cfg.rec.mu();
    let transport = if p.y_sd > 0.0 { Some(p.yhat_sd / p.y_sd) } else { None };
    for _ in 0..block_len(cfg.n_samples, block) {
        let x = mu_x + sx * rng.sample::<f64, _>(StandardNormal);
        let y = mu_x + p.gain * (x - mu_x) + p.channel_noise_sd * rng.sample::<f64, _>(StandardNormal);
        let yhat = match transport {
            Some(k) => mu_r + k * (y - mu_x),
            None => mu_r + p.yhat_sd * rng.sample::<f64, _>(StandardNormal),
        };
        let xhat = yhat + p.backward_noise_sd * rng.sample::<f64, _>(StandardNormal);
        f(Sample { x, y, yhat, xhat });
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let params = test_channel_params(&cfg.src, &cfg.rec, cfg.rates)?;

    let partials: Vec<(Moments, Moments)> = (0..block_count(cfg.n_samples))
        .into_par_iter()
        .map(|block| {
            let (mut dist, mut rec) = (Moments::default(), Moments::default());
            for_each_sample(cfg, &params, block, |s| {
                let e = s.x - s.xhat;
                dist.push(e * e);
                rec.push(s.xhat);
            });
            (dist, rec)
        })
        .collect();
    let (dist, rec) = partials
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(d, r), (bd, br)| (d.merge(bd), r.merge(br)));

    let n = cfg.n_samples as f64;
    let rec_var = if rec.n < 2 { 0.0 } else { rec.sample_var() };
    let (kl, w2) = match GaussianSpec::new(rec.mean, rec_var.sqrt()) {
        Ok(fit) => (kl_gaussians(&fit, &cfg.rec), w2sq_gaussians(&fit, &cfg.rec)),
        Err(_) => {
            let dm = rec.mean - cfg.rec.mu();
            (f64::INFINITY, dm * dm + cfg.rec.variance())
        }
    };
    Ok(SimReport {
        empirical_distortion: dist.mean,
        rec_mean: rec.mean,
        rec_var,
        kl_to_target: kl,
        w2sq_to_target: w2,
        theory_distortion: ocsc_gaussian(&cfg.src, &cfg.rec, cfg.rates),
        stderr_distortion: (dist.sample_var() / n).sqrt(),
    })
}

/// Binned conditional-mean residuals for `E[X | Y] = Y` and `E[X_hat | Y_hat] = Y_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovDiagnostics {
    /// Max over bins of `|mean(X) - mean(Y)|`, bins equiprobable in `Y`.
    pub source_residual: f64,
    /// Max over bins of `|mean(X_hat) - mean(Y_hat)|`, bins equiprobable in `Y_hat`.
    pub reconstruction_residual: f64,
    /// `5 sqrt(bins / n)` times the sd of `X - Y`.
    pub source_bound: f64,
    /// `5 sqrt(bins / n)` times the sd of `X_hat - Y_hat`.
    pub reconstruction_bound: f64,
    pub bins: usize,
}

impl MarkovDiagnostics {
    pub fn within_bounds(&self) -> bool {
        self.source_residual <= self.source_bound && self.reconstruction_residual <= self.reconstruction_bound
    }
}

/// Draws the same samples as [`simulate`] for `cfg` and checks both
/// conditional-mean constraints. A constant conditioning variable gives a
/// residual of 0.
pub fn check_markov_constraints(cfg: &SimConfig) -> Result<MarkovDiagnostics> {
    cfg.validate()?;
    let params = test_channel_params(&cfg.src, &cfg.rec, cfg.rates)?;

    let blocks: Vec<Vec<Sample>> = (0..block_count(cfg.n_samples))
        .into_par_iter()
        .map(|block| {
            let mut v = Vec::with_capacity(block_len(cfg.n_samples, block) as usize);
            for_each_sample(cfg, &params, block, |s| v.push(s));
            v
        })
        .collect();
    let samples: Vec<Sample> = blocks.into_iter().flatten().collect();

    let bins = MARKOV_BINS.min(samples.len());
    let src_pairs = if params.y_sd > 0.0 { samples.iter().map(|s| (s.y, s.x - s.y)).collect() } else { Vec::new() };
    let rec_pairs =
        if params.yhat_sd > 0.0 { samples.iter().map(|s| (s.yhat, s.xhat - s.yhat)).collect() } else { Vec::new() };

    let scale = 5.0 * (bins as f64 / cfg.n_samples as f64).sqrt();
    let src_resid_sd = cfg.src.sigma() * (-cfg.rates.r()).exp();
    Ok(MarkovDiagnostics {
        source_residual: max_bin_residual(src_pairs, bins),
        reconstruction_residual: max_bin_residual(rec_pairs, bins),
        source_bound: scale * src_resid_sd,
        reconstruction_bound: scale * params.backward_noise_sd,
        bins,
    })
}

/// `pairs` holds (conditioning value, residual). Empty input means the
/// conditioning variable is constant.
fn max_bin_residual(mut pairs: Vec<(f64, f64)>, bins: usize) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    (0..bins)
        .map(|k| {
            let chunk = &pairs[k * n / bins..(k + 1) * n / bins];
            (chunk.iter().map(|p| p.1).sum::<f64>() / chunk.len() as f64).abs()
        })
        .fold(0.0, f64::max)
}

/// Runs [`simulate`] on each config in order. Config `i` uses seed
/// `rng_seed + i * SWEEP_SEED_STRIDE` (wrapping), so a singleton sweep
/// matches a direct call.
pub fn sweep(cfgs: &[SimConfig]) -> Result<Vec<SimReport>> {
    if cfgs.is_empty() {
        return Err(Error::invalid("cfgs", "sweep needs at least one config"));
    }
    cfgs.iter()
        .enumerate()
        .map(|(i, cfg)| {
            let seed = cfg.rng_seed.wrapping_add((i as u64).wrapping_mul(SWEEP_SEED_STRIDE));
            simulate(&SimConfig { rng_seed: seed, ..*cfg })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(src: (f64, f64), rec: (f64, f64), r: f64, rc: f64, n: u64, seed: u64) -> SimConfig {
        SimConfig::new(
            GaussianSpec::new(src.0, src.1).unwrap(),
            GaussianSpec::new(rec.0, rec.1).unwrap(),
            RateBudget::new(r, rc).unwrap(),
            n,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.sample_var() - all.sample_var()).abs() < 1e-10);
    }

    #[test]
    fn zero_rate_is_independence_value() {
        let r = simulate(&cfg((0.0, 1.0), (1.0, 2.0), 0.0, 0.0, 100_000, 7)).unwrap();
        assert_eq!(r.theory_distortion, 6.0);
        assert!(r.z_score().abs() <= 4.0, "{r:?}");
        assert!((r.rec_mean - 1.0).abs() <= 4.0 * 2.0 / (1e5f64).sqrt());
        assert!((r.rec_var - 4.0).abs() <= 4.0 * 4.0 * (2.0 / 1e5f64).sqrt());
    }

    #[test]
    fn near_lossless() {
        let r = simulate(&cfg((0.0, 1.0), (0.0, 1.0), 10.0, 10.0, 100_000, 3)).unwrap();
        assert!(r.theory_distortion < 1e-8);
        assert!(r.z_score().abs() <= 4.0, "{r:?}");
        assert!((r.rec_var - 1.0).abs() <= 4.0 * (2.0 / 1e5f64).sqrt());
    }

    #[test]
    fn reproducible_and_block_partitioned() {
        let c = cfg((0.0, 1.0), (1.0, 2.0), 1.0, 1.0, 3 * BLOCK_LEN + 17, 42);
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let d = SimConfig { rng_seed: 43, ..c };
        assert_ne!(simulate(&c).unwrap(), simulate(&d).unwrap());
    }

    #[test]
    fn single_sample_has_undefined_stderr() {
        let r = simulate(&cfg((0.0, 1.0), (0.0, 1.0), 1.0, 1.0, 1, 0)).unwrap();
        assert!(r.stderr_distortion.is_nan());
        assert_eq!(r.rec_var, 0.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let g = GaussianSpec::standard();
        let inf = RateBudget::new(f64::INFINITY, 0.0).unwrap();
        assert_eq!(SimConfig::new(g, g, inf, 10, 0), Err(Error::InfiniteRate));
        assert!(SimConfig::new(g, g, RateBudget::new(1.0, 0.0).unwrap(), 0, 0).is_err());
        let raw = SimConfig { src: g, rec: g, rates: inf, n_samples: 10, rng_seed: 0 };
        assert_eq!(simulate(&raw), Err(Error::InfiniteRate));
        assert_eq!(check_markov_constraints(&raw), Err(Error::InfiniteRate));
    }

    #[test]
    fn markov_zero_rate_source_side_is_zero() {
        let d = check_markov_constraints(&cfg((0.0, 1.0), (0.0, 1.0), 0.0, 0.0, 10_000, 1)).unwrap();
        assert_eq!(d.source_residual, 0.0);
        assert_eq!(d.reconstruction_residual, 0.0);
    }

    #[test]
    fn markov_within_clt_bound() {
        let d = check_markov_constraints(&cfg((0.0, 1.0), (0.0, 1.0), 1.0, 1.0, 200_000, 11)).unwrap();
        assert_eq!(d.bins, MARKOV_BINS);
        assert!(d.within_bounds(), "{d:?}");
    }

    #[test]
    fn sweep_seeds() {
        let c = cfg((0.0, 1.0), (1.0, 2.0), 1.0, 1.0, 5_000, 9);
        assert_eq!(sweep(&[c]).unwrap(), vec![simulate(&c).unwrap()]);
        let two = sweep(&[c, c]).unwrap();
        assert_ne!(two[0], two[1]);
        assert_eq!(two, sweep(&[c, c]).unwrap());
        assert!(sweep(&[]).is_err());
    }
}
