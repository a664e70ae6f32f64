//! Scalar abstraction shared by the solvers.
//!
//! Every solver is written once against [`Scalar`] and runs either in exact
//! rational arithmetic (for cdfs that can be evaluated exactly) or in
//! arbitrary-precision binary floating point at a caller-chosen precision.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Float, Rational};

use crate::dist::Cdf;
use crate::error::{Error, Result};

/// Default binary precision for floating evaluation.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Environment variable overriding [`DEFAULT_PRECISION_BITS`].
pub const PRECISION_ENV: &str = "FPA_PRECISION_BITS";

/// Default precision, honouring `FPA_PRECISION_BITS` when it parses to a value in `[64, 1<<20]`.
pub fn default_precision() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&p| (64..=1 << 20).contains(&p))
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Embed an exact rational; floats round to nearest at `prec` bits.
    fn from_rational(r: &Rational, prec: u32) -> Self;

    fn from_int(v: i64, prec: u32) -> Self {
        Self::from_rational(&Rational::from(v), prec)
    }

    /// Working precision in bits, or 0 for exact arithmetic.
    fn prec(&self) -> u32;

    /// Exact rational value. Floats are dyadic so this never rounds.
    fn to_rational(&self) -> Rational;

    fn to_f64(&self) -> f64;

    /// Evaluate a cdf in this arithmetic.
    fn cdf_at(cdf: &dyn Cdf, x: &Self) -> Result<Self>;

    fn is_zero(&self) -> bool;

    fn abs(self) -> Self {
        if self < Self::from_int(0, self.prec()) {
            -self
        } else {
            self
        }
    }

    fn powu(&self, k: u32) -> Self {
        let mut acc = Self::from_int(1, self.prec());
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        let two = Self::from_int(2, a.prec());
        (a.clone() + b.clone()) / two
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational, _prec: u32) -> Self {
        r.clone()
    }

    fn prec(&self) -> u32 {
        0
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }

    fn cdf_at(cdf: &dyn Cdf, x: &Self) -> Result<Self> {
        cdf.eval_exact(x)
            .ok_or_else(|| Error::Unsupported("cdf cannot be evaluated in exact rational arithmetic".into()))
    }

    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }

    fn powu(&self, k: u32) -> Self {
        use rug::ops::Pow;
        Rational::from(self.pow(k))
    }
}

impl Scalar for Float {
    fn from_rational(r: &Rational, prec: u32) -> Self {
        Float::with_val(prec, r)
    }

    fn prec(&self) -> u32 {
        Float::prec(self)
    }

    fn to_rational(&self) -> Rational {
        Float::to_rational(self).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }

    fn cdf_at(cdf: &dyn Cdf, x: &Self) -> Result<Self> {
        Ok(cdf.eval_float(x))
    }

    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }

    fn powu(&self, k: u32) -> Self {
        use rug::ops::Pow;
        Float::with_val(Float::prec(self), self.pow(k))
    }
}

/// Parse `"p/q"`, `"p"`, or a finite decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Ok(r) = t.parse::<Rational>() {
        return Ok(r);
    }
    parse_decimal(t).ok_or_else(|| Error::Parse(format!("not a rational: {t:?}")))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let num: rug::Integer = digits.parse().ok()?;
    let den = rug::Integer::from(rug::Integer::u_pow_u(10, frac_part.len() as u32));
    let r = Rational::from((num, den));
    Some(if neg { -r } else { r })
}

/// `⌈log₂(1/x)⌉` for a positive rational `x ≤ 1`; returns 0 for `x ≥ 1`.
pub fn log2_inverse_ceil(x: &Rational) -> u32 {
    if *x >= 1 {
        return 0;
    }
    // 1/x = q/p; ceil(log2(q/p)) is the smallest k with p * 2^k >= q.
    let p = x.numer().clone();
    let q = x.denom().clone();
    let mut k = q.significant_bits().saturating_sub(p.significant_bits());
    while rug::Integer::from(&p << k) < q {
        k += 1;
    }
    while k > 0 && rug::Integer::from(&p << (k - 1)) >= q {
        k -= 1;
    }
    k
}

/// Round a float to a rational that is exact (floats are dyadic).
pub fn float_to_rational(x: &Float) -> Rational {
    x.to_rational().expect("finite float")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::from((3, 4)));
        assert_eq!(parse_rational(" 7 ").unwrap(), Rational::from(7));
        assert_eq!(parse_rational("0.125").unwrap(), Rational::from((1, 8)));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::from((-3, 2)));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn log2_inverse() {
        assert_eq!(log2_inverse_ceil(&Rational::from((1, 1024))), 10);
        assert_eq!(log2_inverse_ceil(&Rational::from((1, 1000))), 10);
        assert_eq!(log2_inverse_ceil(&Rational::from((1, 1025))), 11);
        assert_eq!(log2_inverse_ceil(&Rational::from((3, 4))), 1);
        assert_eq!(log2_inverse_ceil(&Rational::from(1)), 0);
    }

    #[test]
    fn float_round_trip_is_exact() {
        let x = Float::with_val(200, Rational::from((1, 3)));
        let r = Scalar::to_rational(&x);
        assert_eq!(Float::with_val(200, &r), x);
    }
}
