//! Exact canonical equilibrium `β*(x) = x − ∫₀ˣ F^{n−1}(t) dt / F^{n−1}(x)` for
//! piecewise-polynomial cdfs, as a piecewise rational function.

use rug::ops::Pow;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::dist::PiecewisePolyCdf;
use crate::error::{Error, Result};
use crate::poly;

/// Coefficients `b_{j,κ,ℓ}` of `F_j^κ` on each piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    n: usize,
    /// `top[j]` holds the coefficients of `F_j^{n−1}`.
    top: Vec<Vec<Rational>>,
    /// `layers[j][κ−1]` holds `F_j^κ` when all layers were retained.
    layers: Option<Vec<Vec<Vec<Rational>>>>,
}

impl PowerTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pieces(&self) -> usize {
        self.top.len()
    }

    /// Coefficients of `F_j^{n−1}` (0-based piece index).
    pub fn piece(&self, j: usize) -> &[Rational] {
        &self.top[j]
    }

    /// Coefficients of `F_j^κ`, available only when built with all layers.
    pub fn layer(&self, j: usize, kappa: usize) -> Option<&[Rational]> {
        let layers = self.layers.as_ref()?;
        layers.get(j)?.get(kappa.checked_sub(1)?).map(Vec::as_slice)
    }

    /// `(d+1)^{n−2} M_j^{n−1}` with `M_j = max_ℓ |a_{j,ℓ}|`.
    fn bound(dist: &PiecewisePolyCdf, j: usize, n: usize) -> Rational {
        let d = dist.degree() as u32;
        let m = dist.coeffs()[j].iter().map(|c| Rational::from(c.abs_ref())).max().unwrap_or_default();
        let width = Rational::from(d + 1).pow((n as u32).saturating_sub(2));
        width * m.pow(n as u32 - 1)
    }

    /// `|b_{j,n−1,ℓ}| ≤ (d+1)^{n−2} (max_ℓ |a_{j,ℓ}|)^{n−1}` for every entry.
    pub fn magnitude_bound_holds(&self, dist: &PiecewisePolyCdf) -> bool {
        self.top.iter().enumerate().all(|(j, row)| {
            let b = Self::bound(dist, j, self.n);
            row.iter().all(|c| Rational::from(c.abs_ref()) <= b)
        })
    }

    /// `Σ_ℓ b_{j,n−1,ℓ} v^ℓ = F_j(v)^{n−1}` at each given point, on every piece.
    pub fn matches_powers_at(&self, dist: &PiecewisePolyCdf, points: &[Rational]) -> bool {
        let e = self.n as u32 - 1;
        self.top
            .iter()
            .zip(dist.coeffs())
            .all(|(row, a)| points.iter().all(|v| poly::eval(row, v) == poly::eval(a, v).pow(e)))
    }
}

fn build_power_table(dist: &PiecewisePolyCdf, n: usize, keep_layers: bool) -> Result<PowerTable> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2 bidders, got {n}")));
    }
    let mut top = Vec::with_capacity(dist.pieces());
    let mut layers = keep_layers.then(Vec::new);
    for a in dist.coeffs() {
        let mut cur = a.clone();
        let mut kept = vec![cur.clone()];
        for _ in 2..n {
            cur = poly::mul(&cur, a);
            if keep_layers {
                kept.push(cur.clone());
            }
        }
        if let Some(l) = layers.as_mut() {
            l.push(kept);
        }
        top.push(cur);
    }
    Ok(PowerTable { n, top, layers })
}

/// `F_j^{n−1}` on every piece by repeated convolution.
pub fn power_coefficients(dist: &PiecewisePolyCdf, n: usize) -> Result<PowerTable> {
    build_power_table(dist, n, false)
}

/// As [`power_coefficients`], keeping every intermediate power `κ = 1..n−1`.
pub fn power_coefficients_all_layers(dist: &PiecewisePolyCdf, n: usize) -> Result<PowerTable> {
    build_power_table(dist, n, true)
}

/// Coefficients `c_{j,ℓ}` of the piecewise polynomial `x ↦ ∫₀ˣ F^{n−1}(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTable {
    breakpoints: Vec<Rational>,
    rows: Vec<Vec<Rational>>,
}

impl IntegralTable {
    pub fn piece(&self, j: usize) -> &[Rational] {
        &self.rows[j]
    }

    pub fn pieces(&self) -> usize {
        self.rows.len()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let k = self.rows.len();
        let j = self.breakpoints[1..k].partition_point(|v| v < x);
        poly::eval(&self.rows[j], x)
    }

    /// Left and right pieces agree exactly at every interior breakpoint.
    pub fn is_continuous(&self) -> bool {
        (1..self.rows.len()).all(|j| {
            let v = &self.breakpoints[j];
            poly::eval(&self.rows[j - 1], v) == poly::eval(&self.rows[j], v)
        })
    }
}

pub fn integral_coefficients(pt: &PowerTable, dist: &PiecewisePolyCdf) -> Result<IntegralTable> {
    if pt.pieces() != dist.pieces() {
        return Err(Error::Consistency(format!("power table has {} pieces, cdf has {}", pt.pieces(), dist.pieces())));
    }
    let bp = dist.breakpoints();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(pt.pieces());
    for j in 0..pt.pieces() {
        let mut row = poly::antiderivative(pt.piece(j));
        if let Some(prev) = rows.last() {
            // Match the previous piece's value at the shared breakpoint.
            let v = &bp[j];
            row[0] = poly::eval(prev, v) - poly::eval(&row, v);
        }
        rows.push(row);
    }
    Ok(IntegralTable { breakpoints: bp.to_vec(), rows })
}

/// One piece of `β*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BidPiece {
    /// The piece lies at or left of the support infimum, where `β*(x) = x`.
    Identity,
    Ratio {
        #[serde(with = "crate::serde_rational::vec")]
        numerator: Vec<Rational>,
        #[serde(with = "crate::serde_rational::vec")]
        denominator: Vec<Rational>,
    },
}

/// `β*` as a piecewise ratio of polynomials over the cdf's breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalBidFunction {
    pub n: usize,
    #[serde(with = "crate::serde_rational::vec")]
    pub breakpoints: Vec<Rational>,
    #[serde(with = "crate::serde_rational")]
    pub support_infimum: Rational,
    pub pieces: Vec<BidPiece>,
}

pub fn canonical_bid_function(dist: &PiecewisePolyCdf, n: usize) -> Result<RationalBidFunction> {
    let pt = power_coefficients(dist, n)?;
    let it = integral_coefficients(&pt, dist)?;
    let lo = dist.support_infimum();
    let bp = dist.breakpoints();
    let pieces = (0..dist.pieces())
        .map(|j| {
            if bp[j + 1] <= lo {
                return BidPiece::Identity;
            }
            let b = pt.piece(j);
            let c = it.piece(j);
            // x·F^{n−1}(x) − ∫₀ˣ F^{n−1}
            let mut numerator: Vec<Rational> = c.iter().map(|v| Rational::from(-v)).collect();
            for (l, bl) in b.iter().enumerate() {
                numerator[l + 1] += bl;
            }
            BidPiece::Ratio { numerator, denominator: b.to_vec() }
        })
        .collect();
    Ok(RationalBidFunction { n, breakpoints: bp.to_vec(), support_infimum: lo, pieces })
}

impl RationalBidFunction {
    fn check_domain(x: &Rational) -> Result<()> {
        if *x < 0 || *x > 1 {
            return Err(Error::Domain(format!("value {x} outside [0,1]")));
        }
        Ok(())
    }

    /// Shape checks for a bid function read from JSON.
    pub fn check_shape(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("need n >= 2 bidders, got {}", self.n)));
        }
        if self.pieces.is_empty() || self.breakpoints.len() != self.pieces.len() + 1 {
            return Err(Error::Domain(format!(
                "{} breakpoints for {} pieces",
                self.breakpoints.len(),
                self.pieces.len()
            )));
        }
        if self.breakpoints[0] != 0 || *self.breakpoints.last().unwrap() != 1 {
            return Err(Error::domain("breakpoints must run from 0 to 1"));
        }
        if self.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("breakpoints not strictly increasing"));
        }
        Ok(())
    }

    /// `β*(x)`, extended by the identity on `[0, v̱]`.
    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        Self::check_domain(x)?;
        if *x <= self.support_infimum {
            return Ok(x.clone());
        }
        let k = self.pieces.len();
        let j = self.breakpoints[1..k].partition_point(|v| v < x);
        match &self.pieces[j] {
            BidPiece::Identity => Ok(x.clone()),
            BidPiece::Ratio { numerator, denominator } => {
                let den = poly::eval(denominator, x);
                if den == 0 {
                    return Err(Error::Internal(format!("F^(n-1) vanishes at {x} above the support infimum")));
                }
                Ok(poly::eval(numerator, x) / den)
            }
        }
    }

    /// `β*(x)` on `[v̱, 1]` only; values below the support infimum are a domain error.
    pub fn eval_unextended(&self, x: &Rational) -> Result<Rational> {
        Self::check_domain(x)?;
        if *x < self.support_infimum {
            return Err(Error::Domain(format!("value {x} below the support infimum {}", self.support_infimum)));
        }
        self.eval(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        match Rational::from_f64(x.clamp(0.0, 1.0)) {
            Some(r) => self.eval(&r).map(|b| b.to_f64()).unwrap_or(f64::NAN),
            None => f64::NAN,
        }
    }
}

pub fn eval_canonical(rbf: &RationalBidFunction, x: &Rational) -> Result<Rational> {
    rbf.eval(x)
}
