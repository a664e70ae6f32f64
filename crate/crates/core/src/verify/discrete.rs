use rug::{Float, Rational};

use super::{in_support, Method, RegretReport};
use crate::cdfpa::{phi, BidGrid, JumpPointStrategy};
use crate::dist::Cdf;
use crate::error::Result;
use crate::numeric::{default_precision, Scalar};

/// Deviation regret of a jump-point strategy over every grid bid.
///
/// Values checked: all jump points, all bids, `value_grid_size + 1` uniform points
/// and midpoints of consecutive jump points. Arithmetic is exact when the cdf
/// evaluates exactly, otherwise binary floating at the default precision.
pub fn epsilon_bne_check_cdfpa(
    cdf: &dyn Cdf,
    n: usize,
    grid: &BidGrid,
    s: &JumpPointStrategy,
    value_grid_size: usize,
) -> Result<RegretReport> {
    s.validate_for(grid)?;
    if cdf.is_exact() {
        check::<Rational>(cdf, n, grid, s, value_grid_size, 0, Method::Exact)
    } else {
        check::<Float>(cdf, n, grid, s, value_grid_size, default_precision(), Method::Grid)
    }
}

fn value_grid(grid: &BidGrid, s: &JumpPointStrategy, size: usize) -> Vec<Rational> {
    let mut values: Vec<Rational> = s.s.clone();
    values.extend(grid.bids().iter().cloned());
    let size = size.max(1) as u64;
    values.extend((0..=size).map(|k| Rational::from((k, size))));
    values.extend(s.s.windows(2).map(|w| Rational::from(&w[0] + &w[1]) / 2u32));
    values.sort();
    values.dedup();
    values
}

fn check<S: Scalar>(
    cdf: &dyn Cdf,
    n: usize,
    grid: &BidGrid,
    s: &JumpPointStrategy,
    value_grid_size: usize,
    prec: u32,
    method: Method,
) -> Result<RegretReport> {
    let m = grid.m();
    let zero = S::from_int(0, prec);
    let f: Vec<S> = s.s.iter().map(|x| S::cdf_at(cdf, &S::from_rational(x, prec))).collect::<Result<_>>()?;
    // Bid b₁ is also played on [0, s₀], so its lower jump is 0.
    let f0 = S::cdf_at(cdf, &zero)?;
    let wins: Vec<S> = (1..=m).map(|j| phi(if j == 1 { &f0 } else { &f[j - 1] }, &f[j], n)).collect();
    let bids: Vec<S> = grid.bids().iter().map(|b| S::from_rational(b, prec)).collect();

    let mut report = RegretReport::new(method);
    let mut best_exact: Option<S> = None;
    for v in value_grid(grid, s, value_grid_size) {
        let vs = S::from_rational(&v, prec);
        let own = s.bid_index(&v);
        let own_u = (vs.clone() - bids[own - 1].clone()) * wins[own - 1].clone();
        let (mut best, mut best_j) = (own_u.clone(), own);
        for j in 1..=m {
            let u = (vs.clone() - bids[j - 1].clone()) * wins[j - 1].clone();
            if u > best {
                best = u;
                best_j = j;
            }
        }
        let regret = best - own_u;
        let supported = in_support(cdf, v.to_f64());
        if report.record(v.to_f64(), regret.to_f64(), grid.bid(best_j).to_f64(), supported) {
            best_exact = Some(regret);
        }
    }
    if method == Method::Exact {
        report.max_regret_exact = Some(best_exact.map(|r| r.to_rational()).unwrap_or_default().to_string());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cdfpa::{solve, SolveParams};
    use crate::dist::PiecewisePolyCdf;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn single_bid_pooling_has_zero_regret() {
        let g = BidGrid::new(vec![r(0, 1)]).unwrap();
        let st = JumpPointStrategy::new(vec![r(0, 1), r(1, 1)], vec![]).unwrap();
        let rep = epsilon_bne_check_cdfpa(&PiecewisePolyCdf::uniform(), 2, &g, &st, 64).unwrap();
        assert_eq!(rep.max_regret, 0.0);
        assert_eq!(rep.max_regret_exact.as_deref(), Some("0"));
    }

    #[test]
    fn solver_output_within_epsilon() {
        let g = BidGrid::equidistant(4).unwrap();
        let eps = r(1, 16);
        let out = solve(Arc::new(PiecewisePolyCdf::uniform()), 1.0, 2, &g, &eps, &SolveParams::default()).unwrap();
        let rep = epsilon_bne_check_cdfpa(&PiecewisePolyCdf::uniform(), 2, &g, &out.strategy, 256).unwrap();
        assert!(rep.max_regret <= eps.to_f64(), "{}", rep.max_regret);
    }

    #[test]
    fn perturbed_strategy_has_witness() {
        // Uniform, n = 2, bids {0, 1/2}: the equilibrium pools at 0 (s₁ = 1). With s₁ moved
        // to 3/4, Δ for bid 0 is 3/8 and for bid 1/2 is 7/8. Values v ∈ (3/4, 7/8) bid 1/2
        // but gain 3v/8 − 7(v − 1/2)/8 = 7/16 − v/2 by bidding 0. The first grid value past
        // 3/4 on the 1/64 grid is 49/64, with regret 7/128.
        let g = BidGrid::new(vec![r(0, 1), r(1, 2)]).unwrap();
        let st = JumpPointStrategy::new(vec![r(0, 1), r(3, 4), r(1, 1)], vec![]).unwrap();
        let rep = epsilon_bne_check_cdfpa(&PiecewisePolyCdf::uniform(), 2, &g, &st, 64).unwrap();
        assert_eq!(rep.max_regret_exact.as_deref(), Some("7/128"));
        assert_eq!(rep.argmax_value, 49.0 / 64.0);
        assert_eq!(rep.argmax_bid, 0.0);
    }

    #[test]
    fn float_path_for_inexact_cdfs() {
        let mixed = crate::dist::MixedCdf::new(Arc::new(crate::dist::CdfOracle::new(|x| x * x, 2.0)), r(1, 8)).unwrap();
        let g = BidGrid::new(vec![r(0, 1)]).unwrap();
        let st = JumpPointStrategy::new(vec![r(0, 1), r(1, 1)], vec![]).unwrap();
        let rep = epsilon_bne_check_cdfpa(&mixed, 3, &g, &st, 16).unwrap();
        assert_eq!(rep.method, Method::Grid);
        assert_eq!(rep.max_regret, 0.0);
    }
}
