//! Symmetric equilibria over a finite bid grid `0 = b₁ < … < b_m < 1`.
//!
//! A monotone strategy is stored by its jump points `s₀ ≤ … ≤ s_m = 1`: values in
//! `(s_{j−1}, s_j]` bid `b_j`, and values at or below `s₀` bid `b₁`.

mod algorithm;
mod certificate;

pub use algorithm::{compute_strategy, solve, transformed_cdf, DeltaChoice, SolveOutput, SolveParams};
pub use certificate::{check_conditions, Certificate, ConditionCheck};

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::dist::Cdf;
use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Strictly increasing bids starting at 0 and ending below 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BidGrid {
    bids: Vec<Rational>,
    alpha: Rational,
}

impl BidGrid {
    pub fn new(bids: Vec<Rational>) -> Result<Self> {
        if bids.is_empty() {
            return Err(Error::domain("bid grid is empty"));
        }
        if bids[0] != 0 {
            return Err(Error::Domain(format!("first bid must be 0, got {}", bids[0])));
        }
        if *bids.last().unwrap() >= 1 {
            return Err(Error::Domain(format!("last bid must be below 1, got {}", bids.last().unwrap())));
        }
        let mut alpha = 1 - bids.last().unwrap().clone();
        for (i, w) in bids.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::Domain(format!("bids not strictly increasing at index {}", i + 1)));
            }
            let gap = Rational::from(&w[1] - &w[0]);
            if gap < alpha {
                alpha = gap;
            }
        }
        Ok(Self { bids, alpha })
    }

    /// `{0, 1/m, …, (m−1)/m}`.
    pub fn equidistant(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("bid grid is empty"));
        }
        Self::new((0..m).map(|i| Rational::from((i as u64, m as u64))).collect())
    }

    pub fn bids(&self) -> &[Rational] {
        &self.bids
    }

    /// `b_i` for `i ∈ 1..=m`.
    pub fn bid(&self, i: usize) -> &Rational {
        &self.bids[i - 1]
    }

    pub fn m(&self) -> usize {
        self.bids.len()
    }

    /// Smallest gap, counting `1 − b_m`.
    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }
}

/// Jump points with their utility ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPointStrategy {
    #[serde(with = "crate::serde_rational::vec")]
    pub s: Vec<Rational>,
    #[serde(rename = "U", with = "crate::serde_rational::vec", default)]
    pub u: Vec<Rational>,
}

impl JumpPointStrategy {
    /// Checks `0 ≤ s₀ ≤ … ≤ s_m = 1` and, when given, a ledger of matching length.
    pub fn new(s: Vec<Rational>, u: Vec<Rational>) -> Result<Self> {
        let st = Self { s, u };
        st.check_shape()?;
        Ok(st)
    }

    pub fn m(&self) -> usize {
        self.s.len() - 1
    }

    fn check_shape(&self) -> Result<()> {
        if self.s.len() < 2 {
            return Err(Error::domain("strategy needs at least s_0 and s_1"));
        }
        if self.s[0] < 0 {
            return Err(Error::Domain(format!("s_0 = {} is negative", self.s[0])));
        }
        if let Some(i) = self.s.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Domain(format!("jump points decrease at index {}", i + 1)));
        }
        if *self.s.last().unwrap() != 1 {
            return Err(Error::Domain(format!("s_m = {} must equal 1", self.s.last().unwrap())));
        }
        if !self.u.is_empty() && self.u.len() != self.s.len() {
            return Err(Error::Domain(format!(
                "utility ledger has {} entries, expected {}",
                self.u.len(),
                self.s.len()
            )));
        }
        Ok(())
    }

    /// Shape checks plus `s_{i−1} ≥ b_i` and a length matching the grid.
    pub fn validate_for(&self, grid: &BidGrid) -> Result<()> {
        self.check_shape()?;
        if self.m() != grid.m() {
            return Err(Error::Domain(format!("strategy has m = {}, grid has m = {}", self.m(), grid.m())));
        }
        for i in 1..=grid.m() {
            if self.s[i - 1] < *grid.bid(i) {
                return Err(Error::Domain(format!("s_{} < b_{}", i - 1, i)));
            }
        }
        Ok(())
    }

    /// 1-based index of the bid played at value `v`.
    pub fn bid_index(&self, v: &Rational) -> usize {
        if *v <= self.s[0] {
            return 1;
        }
        self.s[1..].partition_point(|s| s < v).min(self.m() - 1) + 1
    }

    pub fn bid_index_f64(&self, v: f64) -> usize {
        match Rational::from_f64(v) {
            Some(r) => self.bid_index(&r),
            None => 1,
        }
    }

    /// `β(v)` as a double.
    pub fn bid_f64(&self, grid: &BidGrid, v: f64) -> f64 {
        grid.bid(self.bid_index_f64(v)).to_f64()
    }
}

/// `φ(a, b) = (1/n) Σ_{i<n} a^{n−1−i} b^i`.
pub fn phi<S: Scalar>(a: &S, b: &S, n: usize) -> S {
    let prec = a.prec().max(b.prec());
    let powers = |x: &S| {
        let mut out = Vec::with_capacity(n);
        out.push(S::from_int(1, prec));
        for k in 1..n {
            out.push(out[k - 1].clone() * x.clone());
        }
        out
    };
    let (ap, bp) = (powers(a), powers(b));
    let mut sum = S::from_int(0, prec);
    for i in 0..n {
        sum = sum + ap[n - 1 - i].clone() * bp[i].clone();
    }
    sum / S::from_int(n as i64, prec)
}

/// Probability of winning with the bid whose opponents' jump interval is `[x, y]`.
pub fn delta_win_prob<S: Scalar>(cdf: &dyn Cdf, n: usize, x: &S, y: &S) -> Result<S> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    if x > y {
        return Err(Error::Domain(format!("delta needs x <= y, got {:?} > {:?}", x, y)));
    }
    let fx = S::cdf_at(cdf, x)?;
    let fy = S::cdf_at(cdf, y)?;
    Ok(phi(&fx, &fy, n))
}

/// `u(b_j; v) = (v − b_j) Δ(s_{j−1}, s_j)`.
pub fn utility<S: Scalar>(cdf: &dyn Cdf, n: usize, s: &[S], grid: &BidGrid, j: usize, v: &S) -> Result<S> {
    if j == 0 || j > grid.m() || s.len() != grid.m() + 1 {
        return Err(Error::Domain(format!("bid index {j} out of range 1..={}", grid.m())));
    }
    let prec = v.prec();
    let b = S::from_rational(grid.bid(j), prec);
    Ok((v.clone() - b) * delta_win_prob(cdf, n, &s[j - 1], &s[j])?)
}
