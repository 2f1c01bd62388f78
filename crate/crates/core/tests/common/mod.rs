#![allow(dead_code)]

use incomedist::empirical::IncomeSample;
use incomedist::model::micro_from_effective;
use incomedist::{EffectiveParams, MicroParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fig1() -> EffectiveParams {
    EffectiveParams::eu_2007()
}

pub fn fig1_micro(b: f64) -> MicroParams {
    micro_from_effective(&fig1(), b).unwrap()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Tail exponent of the gap fixture.
pub const GAP_TAIL: f64 = 0.7;
/// Factor the rich-list segment was inflated by.
pub const GAP_INFLATION: f64 = 100.0;

/// One Pareto sample split at its 99th percentile: the lower part is the
/// survey, the upper part is the rich list multiplied by 100. The
/// gap-eliminating factor is therefore 0.01.
pub fn gap_fixture(seed: u64, n: usize) -> (Vec<IncomeSample>, Vec<IncomeSample>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<f64> = (0..n)
        .map(|_| 1e4 * (1.0 - rng.gen::<f64>()).powf(-1.0 / GAP_TAIL))
        .collect();
    let mut sorted = draws.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted[(0.99 * n as f64) as usize - 1];
    let (survey, rich): (Vec<f64>, Vec<f64>) = draws.drain(..).partition(|&m| m <= cut);
    (
        survey.into_iter().map(IncomeSample::survey).collect(),
        rich.into_iter()
            .map(|m| IncomeSample::rich(m * GAP_INFLATION))
            .collect(),
    )
}
