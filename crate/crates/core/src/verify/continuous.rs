use super::{in_support, Method, RegretReport};
use crate::dist::Cdf;
use crate::error::{Error, Result};

const INVERSION_STEPS: u32 = 60;
const MONOTONE_SLACK: f64 = 1e-12;

/// `sup{v ∈ [0,1] : pred(bid(v))}` for a predicate that holds on a prefix of `[0,1]`.
fn sup_where(bid_fn: &dyn Fn(f64) -> f64, pred: impl Fn(f64) -> bool) -> f64 {
    if pred(bid_fn(1.0)) {
        return 1.0;
    }
    if !pred(bid_fn(0.0)) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..INVERSION_STEPS {
        let mid = 0.5 * (lo + hi);
        if pred(bid_fn(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Probability of winning with bid `b` against `n − 1` opponents playing `bid_fn`,
/// splitting ties uniformly.
fn win_probability(cdf: &dyn Cdf, n: usize, bid_fn: &dyn Fn(f64) -> f64, b: f64) -> f64 {
    let below = sup_where(bid_fn, |x| x < b);
    let at_most = sup_where(bid_fn, |x| x <= b);
    phi_f64(cdf.eval_f64(below), cdf.eval_f64(at_most), n)
}

/// `(1/n) Σ aⁿ⁻¹⁻ⁱ bⁱ`.
fn phi_f64(a: f64, b: f64, n: usize) -> f64 {
    (0..n).map(|i| a.powi((n - 1 - i) as i32) * b.powi(i as i32)).sum::<f64>() / n as f64
}

/// Deviation regret of a monotone continuous-bid strategy.
///
/// Deviations range over `deviation_grid_size + 1` equally spaced bids in `[0,1]`
/// plus the strategy's own bid, values over `value_grid_size + 1` equally spaced
/// points. Winning probabilities invert the strategy by 60-step bisection.
pub fn epsilon_bne_check_ccfpa(
    cdf: &dyn Cdf,
    n: usize,
    bid_fn: &dyn Fn(f64) -> f64,
    deviation_grid_size: usize,
    value_grid_size: usize,
) -> Result<RegretReport> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    let vsize = value_grid_size.max(1);
    let values: Vec<f64> = (0..=vsize).map(|k| k as f64 / vsize as f64).collect();
    let own: Vec<f64> = values.iter().map(|&v| bid_fn(v)).collect();
    if let Some(k) = own.windows(2).position(|w| w[1] < w[0] - MONOTONE_SLACK) {
        return Err(Error::Domain(format!(
            "bid function decreases between v = {} and v = {}",
            values[k],
            values[k + 1]
        )));
    }

    let dsize = deviation_grid_size.max(1);
    let deviations: Vec<(f64, f64)> = (0..=dsize)
        .map(|k| {
            let b = k as f64 / dsize as f64;
            (b, win_probability(cdf, n, bid_fn, b))
        })
        .collect();

    let mut report = RegretReport::new(Method::Grid);
    for (&v, &b_own) in values.iter().zip(&own) {
        let own_u = (v - b_own) * win_probability(cdf, n, bid_fn, b_own);
        let (mut best, mut best_b) = (own_u, b_own);
        for &(b, w) in &deviations {
            let u = (v - b) * w;
            if u > best {
                best = u;
                best_b = b;
            }
        }
        report.record(v, best - own_u, best_b, in_support(cdf, v));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::PiecewisePolyCdf;

    #[test]
    fn canonical_uniform_has_grid_level_regret() {
        let u = PiecewisePolyCdf::uniform();
        let rep = epsilon_bne_check_ccfpa(&u, 2, &|v| v / 2.0, 1024, 256).unwrap();
        assert!(rep.max_regret <= 2f64.powi(-20), "{}", rep.max_regret);
    }

    #[test]
    fn constant_zero_bid() {
        // Everyone bids 0: own utility v/2 by tie-splitting; any positive bid wins outright.
        // At v = 1 the best grid deviation is the smallest positive bid.
        let u = PiecewisePolyCdf::uniform();
        let rep = epsilon_bne_check_ccfpa(&u, 2, &|_| 0.0, 1000, 100).unwrap();
        assert!((rep.max_regret - (0.5 - 1e-3)).abs() < 1e-9, "{}", rep.max_regret);
        assert_eq!(rep.argmax_value, 1.0);
    }

    #[test]
    fn overshading_is_detected() {
        let u = PiecewisePolyCdf::uniform();
        // Against β(v) = v/4 a bid b ≤ 1/4 wins w.p. 4b. Above v = 1/2 the best reply is
        // b = 1/4, so regret is v − 1/4 − 3v²/4, maximal at v = 2/3 with value 1/12.
        let rep = epsilon_bne_check_ccfpa(&u, 2, &|v| v / 4.0, 512, 300).unwrap();
        assert!((rep.max_regret - 1.0 / 12.0).abs() < 1e-4, "{}", rep.max_regret);
        assert!((rep.argmax_value - 2.0 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn non_monotone_is_rejected() {
        let u = PiecewisePolyCdf::uniform();
        let err = epsilon_bne_check_ccfpa(&u, 2, &|v| if v < 0.5 { v / 2.0 } else { 0.1 }, 16, 16).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn win_probability_ties() {
        let u = PiecewisePolyCdf::uniform();
        assert!((win_probability(&u, 2, &|_| 0.0, 0.0) - 0.5).abs() < 1e-15);
        assert!((win_probability(&u, 3, &|_| 0.0, 0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((win_probability(&u, 2, &|v| v / 2.0, 0.25) - 0.5).abs() < 1e-12);
    }
}
