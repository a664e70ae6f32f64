//! ε-equilibrium bidding from cdf queries alone.
//!
//! With `K = ⌈1/ε⌉`, `ε̂ = 1/K` and grid `a_j = jε̂`, the bid at `x` is the upper
//! Riemann sum `U(x)` of `β*(x) = ∫₀ˣ g_x`, `g_x(t) = 1 − F^{n−1}(t)/F^{n−1}(x)`,
//! over the partition `a₀ < … < a_{k_x} ≤ x`, `k_x = ⌊xK⌋`. The plan caches
//! `F^{n−1}(a_j)` and its prefix sums, so each bid costs one query and O(n) work.

use rug::{Integer, Rational};

use crate::dist::Cdf;
use crate::error::{Error, Result};
use crate::numeric::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    /// Query `F(0)` too instead of using `F(0) = 0`; the budget becomes `K`.
    pub strict_count: bool,
    /// Working precision for floating plans; ignored in exact arithmetic.
    pub precision: u32,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { strict_count: false, precision: crate::numeric::default_precision() }
    }
}

#[derive(Debug, Clone)]
pub struct BlackBoxPlan<S: Scalar> {
    n: usize,
    epsilon: Rational,
    clamped: bool,
    k: u64,
    eps_hat: Rational,
    power_table: Vec<S>,
    /// `prefix[j] = Σ_{i<j} power_table[i]`, length `K + 2`.
    prefix: Vec<S>,
    precompute_queries: u64,
    prec: u32,
}

impl<S: Scalar> BlackBoxPlan<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The ε actually used (after clamping to 1).
    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// Whether the requested ε exceeded 1 and was clamped.
    pub fn was_clamped(&self) -> bool {
        self.clamped
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn eps_hat(&self) -> &Rational {
        &self.eps_hat
    }

    /// `a_j = j/K`, `j = 0..=K`.
    pub fn grid(&self) -> Vec<Rational> {
        (0..=self.k).map(|j| Rational::from((j, self.k))).collect()
    }

    /// `F^{n−1}(a_j)`, `j = 0..=K`.
    pub fn power_table(&self) -> &[S] {
        &self.power_table
    }

    /// Oracle queries issued while building the plan.
    pub fn precompute_queries(&self) -> u64 {
        self.precompute_queries
    }

    /// Queries per bid when the precompute is shared by `calls` bids.
    pub fn amortized_queries(&self, calls: u64) -> f64 {
        1.0 + self.precompute_queries as f64 / calls.max(1) as f64
    }
}

/// Evaluate the oracle on the grid and tabulate `F^{n−1}(a_j)`.
pub fn precompute<S: Scalar>(oracle: &dyn Cdf, n: usize, epsilon: &Rational) -> Result<BlackBoxPlan<S>> {
    precompute_with(oracle, n, epsilon, PlanOptions::default())
}

pub fn precompute_with<S: Scalar>(
    oracle: &dyn Cdf,
    n: usize,
    epsilon: &Rational,
    opts: PlanOptions,
) -> Result<BlackBoxPlan<S>> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    if *epsilon <= 0 {
        return Err(Error::Domain(format!("epsilon = {epsilon} must be positive")));
    }
    let clamped = *epsilon > 1;
    let epsilon = if clamped { Rational::from(1) } else { epsilon.clone() };
    let k_int = Rational::from(epsilon.recip_ref()).ceil().into_numer_denom().0;
    let k = k_int
        .to_u64()
        .filter(|&k| k <= 1 << 32)
        .ok_or_else(|| Error::Domain(format!("epsilon = {epsilon} needs too many grid points")))?;
    let eps_hat = Rational::from((1, k));
    let prec = opts.precision;
    let e = (n - 1) as u32;

    let mut queries = 0;
    let mut power_table = Vec::with_capacity(k as usize + 1);
    let first = if opts.strict_count {
        queries += 1;
        S::cdf_at(oracle, &S::from_int(0, prec))?.powu(e)
    } else {
        S::from_int(0, prec)
    };
    power_table.push(first);
    for j in 1..k {
        let a = S::from_rational(&Rational::from((j, k)), prec);
        queries += 1;
        power_table.push(S::cdf_at(oracle, &a)?.powu(e));
    }
    if k >= 1 {
        power_table.push(S::from_int(1, prec));
    }
    let mut prefix = Vec::with_capacity(power_table.len() + 1);
    let mut acc = S::from_int(0, prec);
    prefix.push(acc.clone());
    for p in &power_table {
        acc = acc + p.clone();
        prefix.push(acc.clone());
    }
    Ok(BlackBoxPlan { n, epsilon, clamped, k, eps_hat, power_table, prefix, precompute_queries: queries, prec })
}

/// One bid with its Riemann bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct BidEvaluation<S> {
    pub x: Rational,
    pub bid: S,
    pub lower: S,
    pub upper: S,
    pub queries_used: u64,
}

fn evaluate<S: Scalar>(plan: &BlackBoxPlan<S>, oracle: &dyn Cdf, x: &Rational) -> Result<BidEvaluation<S>> {
    if *x < 0 || *x > 1 {
        return Err(Error::Domain(format!("value {x} outside [0,1]")));
    }
    let prec = plan.prec;
    let xs = S::from_rational(x, prec);
    let fx = S::cdf_at(oracle, &xs)?;
    if fx.is_zero() {
        return Ok(BidEvaluation { x: x.clone(), bid: xs.clone(), lower: xs.clone(), upper: xs, queries_used: 1 });
    }
    let px = fx.powu((plan.n - 1) as u32);
    let kx_int: Integer = Rational::from(x * plan.k).floor().into_numer_denom().0;
    let kx = kx_int.to_usize().expect("k_x <= K");
    let eps_hat = S::from_rational(&plan.eps_hat, prec);
    let partial = S::from_rational(&(x - Rational::from((kx as u64, plan.k))), prec);

    // Left endpoints of g_x on each cell.
    let upper_mass = eps_hat.clone() * plan.prefix[kx].clone() + partial * plan.power_table[kx].clone();
    let upper = xs.clone() - upper_mass / px.clone();
    // Right endpoints; the last (partial) cell contributes g_x(x) = 0.
    let right_sum = plan.prefix[kx + 1].clone() - plan.power_table[0].clone();
    let lower = S::from_rational(&Rational::from((kx as u64, plan.k)), prec) - eps_hat * right_sum / px;
    Ok(BidEvaluation { x: x.clone(), bid: upper.clone(), lower, upper, queries_used: 1 })
}

/// `β(x) = U(x)`; issues exactly one oracle query.
pub fn bid<S: Scalar>(plan: &BlackBoxPlan<S>, oracle: &dyn Cdf, x: &Rational) -> Result<BidEvaluation<S>> {
    evaluate(plan, oracle, x)
}

/// `(L(x), U(x))`; issues exactly one oracle query.
pub fn riemann_bounds<S: Scalar>(plan: &BlackBoxPlan<S>, oracle: &dyn Cdf, x: &Rational) -> Result<(S, S)> {
    let e = evaluate(plan, oracle, x)?;
    Ok((e.lower, e.upper))
}

/// `β` as a plain function of a double, for verifiers and sampling.
pub fn bid_f64<S: Scalar>(plan: &BlackBoxPlan<S>, oracle: &dyn Cdf, x: f64) -> Result<f64> {
    let r = Rational::from_f64(x).ok_or_else(|| Error::Domain(format!("value {x} is not finite")))?;
    Ok(bid(plan, oracle, &r)?.bid.to_f64())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rug::Float;

    use super::*;
    use crate::dist::{CdfOracle, PiecewisePolyCdf};

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn uniform_oracle() -> CdfOracle {
        CdfOracle::from_cdf(Arc::new(PiecewisePolyCdf::uniform()), 1.0)
    }

    #[test]
    fn uniform_plan_quarter() {
        let o = uniform_oracle();
        let plan: BlackBoxPlan<Rational> = precompute(&o, 2, &r(1, 4)).unwrap();
        assert_eq!(plan.k(), 4);
        assert_eq!(plan.grid(), vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(1, 1)]);
        assert_eq!(plan.power_table(), &[r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(1, 1)]);
        assert_eq!(o.query_count(), 3);
    }

    #[test]
    fn single_cell_plan() {
        let o = uniform_oracle();
        let plan: BlackBoxPlan<Rational> = precompute(&o, 2, &r(1, 1)).unwrap();
        assert_eq!(plan.grid(), vec![r(0, 1), r(1, 1)]);
        assert_eq!(plan.power_table(), &[r(0, 1), r(1, 1)]);
        assert_eq!(o.query_count(), 0);
    }

    #[test]
    fn squares_for_three_bidders() {
        let o = uniform_oracle();
        let plan: BlackBoxPlan<Rational> = precompute(&o, 3, &r(1, 2)).unwrap();
        assert_eq!(plan.power_table(), &[r(0, 1), r(1, 4), r(1, 1)]);
    }

    #[test]
    fn strict_mode_queries_origin() {
        let o = uniform_oracle();
        let opts = PlanOptions { strict_count: true, ..PlanOptions::default() };
        let plan: BlackBoxPlan<Rational> = precompute_with(&o, 2, &r(1, 4), opts).unwrap();
        assert_eq!(plan.precompute_queries(), 4);
        assert_eq!(o.query_count(), 4);
    }

    #[test]
    fn hand_evaluated_bids() {
        let o = uniform_oracle();
        let plan: BlackBoxPlan<Rational> = precompute(&o, 2, &r(1, 4)).unwrap();
        o.reset();
        let top = bid(&plan, &o, &r(1, 1)).unwrap();
        assert_eq!(top.bid, r(5, 8));
        assert_eq!((top.lower, top.upper), (r(3, 8), r(5, 8)));
        assert_eq!(bid(&plan, &o, &r(1, 2)).unwrap().bid, r(3, 8));
        assert_eq!(o.query_count(), 2);
    }

    #[test]
    fn zero_cdf_returns_value() {
        let f = PiecewisePolyCdf::new(
            vec![r(0, 1), r(1, 4), r(1, 1)],
            vec![vec![r(0, 1), r(0, 1)], vec![r(-1, 3), r(4, 3)]],
        )
        .unwrap();
        let o = CdfOracle::from_cdf(Arc::new(f), 4.0 / 3.0);
        let plan: BlackBoxPlan<Rational> = precompute(&o, 3, &r(1, 8)).unwrap();
        let e = bid(&plan, &o, &r(1, 5)).unwrap();
        assert_eq!((e.bid, e.lower, e.upper), (r(1, 5), r(1, 5), r(1, 5)));
    }

    #[test]
    fn bracket_width_at_most_eps() {
        let o = CdfOracle::from_cdf(Arc::new(PiecewisePolyCdf::power(2)), 2.0);
        let eps = r(1, 16);
        let plan: BlackBoxPlan<Rational> = precompute(&o, 3, &eps).unwrap();
        for t in 0..=200 {
            let (l, u) = riemann_bounds(&plan, &o, &r(t, 200)).unwrap();
            assert!(l <= u);
            assert!(Rational::from(&u - &l) <= eps);
            assert!(u <= r(t, 200));
        }
    }

    #[test]
    fn float_plan_agrees_with_exact() {
        let o = CdfOracle::from_cdf(Arc::new(PiecewisePolyCdf::power(3)), 3.0);
        let exact: BlackBoxPlan<Rational> = precompute(&o, 4, &r(1, 10)).unwrap();
        let float: BlackBoxPlan<Float> =
            precompute_with(&o, 4, &r(1, 10), PlanOptions { precision: 128, ..Default::default() }).unwrap();
        for t in 1..=50 {
            let x = r(t, 50);
            let a = bid(&exact, &o, &x).unwrap().bid.to_f64();
            let b = bid(&float, &o, &x).unwrap().bid.to_f64();
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn f64_oracle_runs_in_float_only() {
        let o = CdfOracle::new(|x| x, 1.0);
        assert!(precompute::<Rational>(&o, 2, &r(1, 4)).is_err());
        let plan: BlackBoxPlan<Float> = precompute(&o, 2, &r(1, 4)).unwrap();
        assert!((bid_f64(&plan, &o, 1.0).unwrap() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn input_errors_and_clamping() {
        let o = uniform_oracle();
        assert!(matches!(precompute::<Rational>(&o, 2, &r(0, 1)), Err(Error::Domain(_))));
        assert!(matches!(precompute::<Rational>(&o, 1, &r(1, 2)), Err(Error::Domain(_))));
        let plan: BlackBoxPlan<Rational> = precompute(&o, 2, &r(3, 1)).unwrap();
        assert!(plan.was_clamped());
        assert_eq!(plan.k(), 1);
        assert!(matches!(bid(&plan, &o, &r(3, 2)), Err(Error::Domain(_))));
    }
}
