use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{in_support, Method, RegretReport};
use crate::dist::{inverse_cdf_f64, Cdf};
use crate::error::{Error, Result};

const SAMPLE_STEPS: u32 = 50;

/// Interim utility estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityEstimate {
    pub value: f64,
    pub bid: f64,
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl UtilityEstimate {
    /// Half-width of the ±3σ band.
    pub fn band(&self) -> f64 {
        3.0 * self.std_error
    }
}

#[derive(Default, Clone)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean_and_se(&self, trials: u64) -> (f64, f64) {
        let t = trials as f64;
        let mean = self.sum / t;
        let var = if trials > 1 { ((self.sum_sq - t * mean * mean) / (t - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / t).sqrt())
    }
}

/// Highest opponent bid and how many opponents placed it.
struct Opponents {
    top: f64,
    ties: u32,
}

impl Opponents {
    fn draw(cdf: &dyn Cdf, n: usize, strategy: &dyn Fn(f64) -> f64, rng: &mut ChaCha8Rng) -> Self {
        let mut top = f64::NEG_INFINITY;
        let mut ties = 0;
        for _ in 1..n {
            let v = inverse_cdf_f64(cdf, rng.random::<f64>(), SAMPLE_STEPS);
            let b = strategy(v);
            if b > top {
                top = b;
                ties = 1;
            } else if b == top {
                ties += 1;
            }
        }
        Self { top, ties }
    }

    /// Ex-post utility of bidding `b` at value `v`, splitting ties uniformly.
    fn payoff(&self, v: f64, b: f64) -> f64 {
        if b > self.top {
            v - b
        } else if b == self.top {
            (v - b) / (self.ties + 1) as f64
        } else {
            0.0
        }
    }
}

fn check_args(n: usize, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::domain("Monte Carlo needs at least one trial"));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    Ok(())
}

/// Simulated interim utility of each `(value, bid)` pair against `n − 1` opponents
/// playing `strategy`. All pairs share the same opponent draws.
pub fn monte_carlo_utility(
    cdf: &dyn Cdf,
    n: usize,
    strategy: &dyn Fn(f64) -> f64,
    pairs: &[(f64, f64)],
    trials: u64,
    seed: u64,
) -> Result<Vec<UtilityEstimate>> {
    check_args(n, trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![Moments::default(); pairs.len()];
    for _ in 0..trials {
        let opp = Opponents::draw(cdf, n, strategy, &mut rng);
        for (m, &(v, b)) in acc.iter_mut().zip(pairs) {
            m.push(opp.payoff(v, b));
        }
    }
    Ok(pairs
        .iter()
        .zip(&acc)
        .map(|(&(value, bid), m)| {
            let (mean, std_error) = m.mean_and_se(trials);
            UtilityEstimate { value, bid, mean, std_error, trials }
        })
        .collect())
}

/// Simulated regret: for each value, the largest mean gain of a deviation over the
/// strategy's own bid, estimated on common opponent draws.
pub fn monte_carlo_regret(
    cdf: &dyn Cdf,
    n: usize,
    strategy: &dyn Fn(f64) -> f64,
    values: &[f64],
    deviations: &[f64],
    trials: u64,
    seed: u64,
) -> Result<RegretReport> {
    check_args(n, trials)?;
    let own: Vec<f64> = values.iter().map(|&v| strategy(v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = deviations.len();
    let mut acc = vec![Moments::default(); values.len() * d];
    for _ in 0..trials {
        let opp = Opponents::draw(cdf, n, strategy, &mut rng);
        for (k, (&v, &b)) in values.iter().zip(&own).enumerate() {
            let base = opp.payoff(v, b);
            for (j, &dev) in deviations.iter().enumerate() {
                acc[k * d + j].push(opp.payoff(v, dev) - base);
            }
        }
    }
    let mut report = RegretReport::new(Method::MonteCarlo);
    report.trials = Some(trials);
    report.seed = Some(seed);
    let mut se_at_max = 0.0;
    for (k, &v) in values.iter().enumerate() {
        let (mut best, mut best_b, mut best_se) = (0.0, own[k], 0.0);
        for (j, &dev) in deviations.iter().enumerate() {
            let (mean, se) = acc[k * d + j].mean_and_se(trials);
            if mean > best {
                (best, best_b, best_se) = (mean, dev, se);
            }
        }
        if report.record(v, best, best_b, in_support(cdf, v)) {
            se_at_max = best_se;
        }
    }
    report.std_error = Some(se_at_max);
    Ok(report)
}
