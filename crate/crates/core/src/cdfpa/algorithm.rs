use std::sync::Arc;

use rug::ops::Pow;
use rug::{Float, Rational};

use super::{check_conditions, phi, BidGrid, Certificate, JumpPointStrategy};
use crate::dist::{Cdf, MixedCdf};
use crate::error::{Error, Result};
use crate::numeric::{log2_inverse_ceil, Scalar};

/// Jump points for a target utility `U` at `v = 1`, built from the top bid down.
///
/// Returns `(s, U)` with `s_m = 1`. In the bisection branch the search runs on
/// `(b_i, s_i)` for at most `⌈log₂(nL/δ)⌉` midpoints and stops at the first one
/// whose residual is within `δ`.
pub fn compute_strategy<S: Scalar>(
    cdf: &dyn Cdf,
    lipschitz: f64,
    n: usize,
    grid: &BidGrid,
    u: &S,
    delta: &Rational,
) -> Result<(Vec<S>, Vec<S>)> {
    if *delta <= 0 {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    let prec = u.prec();
    let m = grid.m();
    let steps = bisection_steps(n, lipschitz, delta)?;
    let delta_s = S::from_rational(delta, prec);
    let mut s = vec![S::from_int(0, prec); m + 1];
    let mut uv = vec![S::from_int(0, prec); m + 1];
    s[m] = S::from_int(1, prec);
    uv[m] = u.clone();

    for i in (1..=m).rev() {
        let b = S::from_rational(grid.bid(i), prec);
        let si = s[i].clone();
        let ui = uv[i].clone();
        if si <= b {
            return Err(Error::Internal(format!("s_{i} does not exceed b_{i}")));
        }
        let margin = si.clone() - b.clone();
        let fs = S::cdf_at(cdf, &si)?;
        if margin.clone() * phi(&fs, &fs, n) <= ui {
            s[i - 1] = si;
            uv[i - 1] = ui;
            continue;
        }
        let fb = S::cdf_at(cdf, &b)?;
        if margin.clone() * phi(&fb, &fs, n) >= ui {
            s[i - 1] = b;
            uv[i - 1] = S::from_int(0, prec);
            continue;
        }
        let (mut lo, mut hi) = (b.clone(), si.clone());
        let mut found = None;
        for _ in 0..steps {
            let mid = S::midpoint(&lo, &hi);
            let w = phi(&S::cdf_at(cdf, &mid)?, &fs, n);
            let r = margin.clone() * w.clone() - ui.clone();
            if r.clone().abs() <= delta_s {
                found = Some((mid, w));
                break;
            }
            if r < S::from_int(0, prec) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x, w) = found.ok_or_else(|| Error::Precision {
            detail: format!("bisection for s_{} missed the residual target after {steps} steps", i - 1),
            hint: "raise precision_bits or FPA_PRECISION_BITS, or check the Lipschitz constant".into(),
        })?;
        uv[i - 1] = (x.clone() - b) * w;
        s[i - 1] = x;
    }
    Ok((s, uv))
}

fn bisection_steps(n: usize, lipschitz: f64, delta: &Rational) -> Result<u32> {
    let l = Rational::from_f64(lipschitz)
        .filter(|l| *l > 0)
        .ok_or_else(|| Error::Domain(format!("Lipschitz constant {lipschitz} must be positive and finite")))?;
    let ratio = delta / (l * Rational::from(n as u64));
    Ok(log2_inverse_ceil(&ratio).max(1))
}

/// How the outer search precision is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaChoice {
    /// `δ = (ε^{5n} α^{3n} / (100 n³ L⁴))^m`, which needs no certificate.
    Theoretical,
    /// Start from the given δ (or a default near `ε/4m`) and shrink until the
    /// certificate passes and `s₀ʳ ≤ α/2`.
    Practical(Option<Rational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    pub delta: DeltaChoice,
    /// Lower bound on working precision; the solver always uses at least `⌈log₂(1/δ)⌉ + 16`.
    pub precision_bits: Option<u32>,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self { delta: DeltaChoice::Practical(None), precision_bits: None }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// `(0, s₁ʳ, …, s_mʳ)` with the ledger of the same run (`U₀ = 0`).
    pub strategy: JumpPointStrategy,
    /// Certificate under the transformed cdf with `γ = ε′/2m`, `ε′ = ε/3n`.
    pub certificate: Certificate,
    pub delta: Rational,
    pub precision_bits: u32,
    /// Mixing weight `ε/3n` of the internal transform.
    pub transform_weight: Rational,
    /// `s₀` of the last right-endpoint strategy, before it is reset to 0.
    pub s0_right: Rational,
    pub attempts: u32,
    pub outer_iterations: u32,
}

/// The δ-strongly increasing cdf `solve` actually works on.
pub fn transformed_cdf(cdf: Arc<dyn Cdf>, n: usize, epsilon: &Rational) -> Result<MixedCdf> {
    MixedCdf::new(cdf, epsilon / Rational::from(3 * n as u64))
}

/// ε-BNE over the bid grid for an L-Lipschitz cdf.
pub fn solve(
    cdf: Arc<dyn Cdf>,
    lipschitz: f64,
    n: usize,
    grid: &BidGrid,
    epsilon: &Rational,
    params: &SolveParams,
) -> Result<SolveOutput> {
    if *epsilon <= 0 || *epsilon >= 1 {
        return Err(Error::Domain(format!("epsilon = {epsilon} not in (0,1)")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::Domain(format!("Lipschitz constant {lipschitz} must be positive and finite")));
    }
    let mixed = transformed_cdf(cdf, n, epsilon)?;
    let eps_alg = mixed.delta().clone();
    let lip = mixed.delta().to_f64() + (1.0 - mixed.delta().to_f64()) * lipschitz;
    let m = grid.m();
    let gamma = &eps_alg / Rational::from(2 * m as u64);
    let half_alpha = Rational::from(grid.alpha() / 2u32);
    let theory = theoretical_delta(&eps_alg, grid.alpha(), n, lip, m);

    let mut delta = match &params.delta {
        DeltaChoice::Theoretical => theory.clone(),
        DeltaChoice::Practical(Some(d)) => {
            if *d <= 0 {
                return Err(Error::Domain(format!("delta = {d} must be positive")));
            }
            d.clone()
        }
        DeltaChoice::Practical(None) => (&eps_alg / Rational::from(4 * m as u64)) / Rational::from(1u32 << 10),
    };
    if delta < theory {
        delta = theory.clone();
    }

    let mut attempts = 0;
    loop {
        attempts += 1;
        let prec = (log2_inverse_ceil(&delta) + 16).max(params.precision_bits.unwrap_or(0)).max(64);
        let run = outer_search(&mixed, lip, n, grid, &delta, prec)?;
        let gamma_f = Float::with_val(prec, &gamma);
        let certificate = check_conditions(&mixed, n, grid, &run.s, &run.u, &gamma_f)?;
        let s0_right = Scalar::to_rational(&run.s0_right);
        let accepted = certificate.pass && s0_right <= half_alpha;
        let is_theory = delta == theory;
        if accepted || is_theory || params.delta == DeltaChoice::Theoretical {
            let strategy = JumpPointStrategy::new(
                run.s.iter().map(Scalar::to_rational).collect(),
                run.u.iter().map(Scalar::to_rational).collect(),
            )?;
            return Ok(SolveOutput {
                strategy,
                certificate,
                delta,
                precision_bits: prec,
                transform_weight: eps_alg,
                s0_right,
                attempts,
                outer_iterations: run.iterations,
            });
        }
        let squared = Rational::from((&delta).pow(2));
        let scaled = Rational::from(&delta >> 32u32);
        delta = std::cmp::max(std::cmp::min(squared, scaled), theory.clone());
    }
}

fn theoretical_delta(eps: &Rational, alpha: &Rational, n: usize, lipschitz: f64, m: usize) -> Rational {
    let l = Rational::from_f64(lipschitz).expect("finite");
    let n32 = n as u32;
    let num = Rational::from(eps.pow(5 * n32)) * Rational::from(alpha.pow(3 * n32));
    let den = Rational::from(100u32) * Rational::from(n32.pow(3)) * l.pow(4u32);
    (num / den).pow(m as u32)
}

struct OuterRun {
    s: Vec<Float>,
    u: Vec<Float>,
    s0_right: Float,
    iterations: u32,
}

fn outer_search(
    cdf: &dyn Cdf,
    lipschitz: f64,
    n: usize,
    grid: &BidGrid,
    delta: &Rational,
    prec: u32,
) -> Result<OuterRun> {
    let mut ul = Float::with_val(prec, 0);
    let mut ur = Float::with_val(prec, 1);
    let (mut sr, mut uvr) = compute_strategy(cdf, lipschitz, n, grid, &ur, delta)?;
    if sr[0].is_zero() {
        return Err(Error::Internal("s_0 = 0 at U = 1; the endpoint invariant fails".into()));
    }
    let delta_f = Float::with_val(prec, delta);
    let mut iterations = 0;
    while Float::with_val(prec, &ur - &ul) > delta_f {
        iterations += 1;
        let mid = Float::with_val(prec, &ul + &ur) / 2u32;
        let (s, uv) = compute_strategy(cdf, lipschitz, n, grid, &mid, delta)?;
        if s[0].is_zero() {
            ul = mid;
        } else {
            ur = mid;
            sr = s;
            uvr = uv;
        }
    }
    let s0_right = sr[0].clone();
    sr[0] = Float::with_val(prec, 0);
    uvr[0] = Float::with_val(prec, 0);
    Ok(OuterRun { s: sr, u: uvr, s0_right, iterations })
}
