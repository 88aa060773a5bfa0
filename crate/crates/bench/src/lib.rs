//! Shared inputs for the benchmarks under `benches/`.

use rdp_core::{GaussianSpec, KlProblem, RateBudget, SimConfig, W2Problem};

/// `(R, Rc, P)` triples spanning every W2 branch and both KL regimes.
pub const CASES: [(f64, f64, f64); 6] = [
    (0.0, 1.0, 0.5),
    (1.0, 1.0, 0.0),
    (1.0, 1.0, 0.05),
    (1.0, 1.0, 1.0),
    (0.5, f64::INFINITY, 0.1),
    (3.0, 0.2, 0.001),
];

pub fn kl_problems() -> Vec<KlProblem> {
    CASES
        .iter()
        .map(|&(r, rc, p)| KlProblem::new(GaussianSpec::standard(), RateBudget::new(r, rc).unwrap(), p).unwrap())
        .collect()
}

pub fn w2_problems() -> Vec<W2Problem> {
    CASES
        .iter()
        .map(|&(r, rc, p)| W2Problem::new(GaussianSpec::standard(), RateBudget::new(r, rc).unwrap(), p).unwrap())
        .collect()
}

pub fn sim_config(samples: u64) -> SimConfig {
    SimConfig::new(
        GaussianSpec::standard(),
        GaussianSpec::new(1.0, 2.0).unwrap(),
        RateBudget::new(1.0, 1.0).unwrap(),
        samples,
        0,
    )
    .unwrap()
}
