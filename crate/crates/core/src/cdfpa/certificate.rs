use rug::Rational;
use serde::Serialize;

use super::{delta_win_prob, BidGrid};
use crate::dist::Cdf;
use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Tolerance for `U_{i−1} = U_i` on unused bids.
const LEDGER_TOLERANCE_LOG2: u32 = 40;

/// One checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    /// Bid index `i ∈ 1..=m`.
    pub index: usize,
    /// 1: effective bid matches the ledger at both ends. 2: unused bid is not
    /// profitable. 3: `s_{i−1} ≥ b_i`.
    pub condition: u8,
    pub residual: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Pass/fail for the jump-point equilibrium conditions. A pass at `γ` implies a `2γm`-BNE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(with = "crate::serde_rational")]
    pub gamma: Rational,
    pub pass: bool,
    pub max_residual: f64,
    pub checks: Vec<ConditionCheck>,
}

impl Certificate {
    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

/// Check conditions (1)–(3) for jump points `s` with ledger `u` at tolerance `γ`.
pub fn check_conditions<S: Scalar>(
    cdf: &dyn Cdf,
    n: usize,
    grid: &BidGrid,
    s: &[S],
    u: &[S],
    gamma: &S,
) -> Result<Certificate> {
    let m = grid.m();
    if s.len() != m + 1 || u.len() != m + 1 {
        return Err(Error::Domain(format!(
            "expected {} jump points and ledger entries, got {} and {}",
            m + 1,
            s.len(),
            u.len()
        )));
    }
    let prec = gamma.prec();
    let zero = S::from_int(0, prec);
    let ledger_tol = S::from_rational(&(Rational::from(1) >> LEDGER_TOLERANCE_LOG2), prec.max(64));
    let mut checks = Vec::with_capacity(3 * m);
    let mut push = |index: usize, condition: u8, residual: S, tolerance: &S| {
        let ok = residual <= *tolerance;
        checks.push(ConditionCheck {
            index,
            condition,
            residual: residual.to_f64(),
            tolerance: tolerance.to_f64(),
            ok,
        });
    };

    for i in 1..=m {
        let b = S::from_rational(grid.bid(i), prec);
        let (lo, hi) = (&s[i - 1], &s[i]);
        if lo > hi {
            return Err(Error::Domain(format!("jump points decrease at index {i}")));
        }
        let w = delta_win_prob(cdf, n, lo, hi)?;
        let at_hi = (hi.clone() - b.clone()) * w.clone();
        if lo < hi {
            let at_lo = (lo.clone() - b.clone()) * w;
            push(i, 1, (at_hi - u[i].clone()).abs(), gamma);
            push(i, 1, (at_lo - u[i - 1].clone()).abs(), gamma);
        } else {
            push(i, 2, (u[i - 1].clone() - u[i].clone()).abs(), &ledger_tol);
            let excess = at_hi - u[i].clone();
            push(i, 2, if excess > zero { excess } else { zero.clone() }, gamma);
        }
        let short = b - lo.clone();
        push(i, 3, if short > zero { short } else { zero.clone() }, &zero);
    }
    let pass = checks.iter().all(|c| c.ok);
    let max_residual = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(Certificate { gamma: gamma.to_rational(), pass, max_residual, checks })
}
