//! Dense univariate polynomials over exact rationals, coefficients in
//! ascending order (`c[ℓ]` multiplies `x^ℓ`).

use rug::{Float, Rational};

pub fn eval(coeffs: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::new();
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

pub fn eval_float(coeffs: &[Rational], x: &Float) -> Float {
    let prec = x.prec();
    let mut acc = Float::new(prec);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

pub fn eval_f64(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Product of two polynomials (coefficient convolution).
pub fn mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.cmp0().is_eq() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += Rational::from(ai * bj);
        }
    }
    out
}

pub fn derivative(coeffs: &[Rational]) -> Vec<Rational> {
    coeffs.iter().enumerate().skip(1).map(|(l, c)| Rational::from(c * l as u32)).collect()
}

/// Antiderivative with zero constant term.
pub fn antiderivative(coeffs: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(Rational::new());
    for (l, c) in coeffs.iter().enumerate() {
        out.push(Rational::from(c / (l as u32 + 1)));
    }
    out
}

pub fn is_zero(coeffs: &[Rational]) -> bool {
    coeffs.iter().all(|c| c.cmp0().is_eq())
}

/// Drop trailing zero coefficients.
pub fn trim(mut coeffs: Vec<Rational>) -> Vec<Rational> {
    while coeffs.last().is_some_and(|c| c.cmp0().is_eq()) {
        coeffs.pop();
    }
    coeffs
}

/// Degree of a trimmed polynomial; `None` for the zero polynomial.
pub fn degree(coeffs: &[Rational]) -> Option<usize> {
    coeffs.iter().rposition(|c| c.cmp0().is_ne())
}

/// Euclidean remainder `a mod b`; `b` must be nonzero.
fn rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut r = trim(a.to_vec());
    while r.len() > db {
        let dr = r.len() - 1;
        let q = Rational::from(&r[dr] / &lead);
        for (i, bi) in b.iter().enumerate() {
            r[dr - db + i] -= Rational::from(&q * bi);
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn exact_div(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return Vec::new();
    }
    let mut q = vec![Rational::new(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let c = Rational::from(&r[dr] / &b[db]);
        for (i, bi) in b.iter().enumerate() {
            r[dr - db + i] -= Rational::from(&c * bi);
        }
        q[dr - db] = c;
        r.pop();
        r = trim(r);
    }
    q
}

fn sign(x: &Rational) -> i32 {
    x.cmp0() as i32
}

/// Sturm sequence of a squarefree polynomial.
fn sturm_chain(p: &[Rational]) -> Vec<Vec<Rational>> {
    let mut chain = vec![trim(p.to_vec())];
    let d = trim(derivative(p));
    if d.is_empty() {
        return chain;
    }
    chain.push(d);
    loop {
        let k = chain.len();
        let r = rem(&chain[k - 2], &chain[k - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[Vec<Rational>], x: &Rational) -> usize {
    let signs: Vec<i32> = chain.iter().map(|p| sign(&eval(p, x))).filter(|&s| s != 0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Product of the factors of odd multiplicity in the squarefree (Yun)
/// factorization of `p`; its real roots are exactly where `p` changes sign.
fn odd_multiplicity_part(p: &[Rational]) -> Vec<Rational> {
    let p = trim(p.to_vec());
    let dp = trim(derivative(&p));
    if dp.is_empty() {
        return vec![Rational::from(1)];
    }
    let a0 = gcd(&p, &dp);
    let mut b = exact_div(&p, &a0);
    let c = exact_div(&dp, &a0);
    let mut d: Vec<Rational> = sub(&c, &derivative(&b));
    let mut out = vec![Rational::from(1)];
    let mut i = 1usize;
    while degree(&b).is_some_and(|k| k > 0) {
        let a = gcd(&b, &d);
        if i % 2 == 1 {
            out = mul(&out, &a);
        }
        b = exact_div(&b, &a);
        let c_next = exact_div(&d, &a);
        d = sub(&c_next, &derivative(&b));
        i += 1;
    }
    trim(out)
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let zero = Rational::new();
    trim((0..n).map(|i| Rational::from(a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero))).collect())
}

/// Number of distinct real roots of `p` in the open interval `(lo, hi)`.
fn count_roots_open(p: &[Rational], lo: &Rational, hi: &Rational) -> usize {
    if degree(p).is_none_or(|k| k == 0) {
        return 0;
    }
    let chain = sturm_chain(p);
    // Sturm counts roots in (lo, hi].
    let half_open = sign_changes(&chain, lo).saturating_sub(sign_changes(&chain, hi));
    if eval(p, hi).cmp0().is_eq() {
        half_open.saturating_sub(1)
    } else {
        half_open
    }
}

/// Whether `p(x) ≥ 0` for every `x` in the closed interval `[lo, hi]`,
/// decided exactly: `p` may not change sign inside, and its sign is read off
/// at a point where it does not vanish.
pub fn nonnegative_on(p: &[Rational], lo: &Rational, hi: &Rational) -> bool {
    let p = trim(p.to_vec());
    let Some(deg) = degree(&p) else {
        return true;
    };
    if count_roots_open(&odd_multiplicity_part(&p), lo, hi) > 0 {
        return false;
    }
    // deg + 1 distinct points cannot all be roots.
    let width = Rational::from(hi - lo);
    for t in 0..=deg + 1 {
        let x = lo + (&width * Rational::from((t as i64, deg as i64 + 1)));
        match eval(&p, &x).cmp0() {
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Equal => {}
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn convolution_matches_hand_product() {
        // (1 + x)(1 - x) = 1 - x^2
        assert_eq!(mul(&ints(&[1, 1]), &ints(&[1, -1])), ints(&[1, 0, -1]));
    }

    #[test]
    fn antiderivative_then_derivative_is_identity() {
        let p = vec![r(1, 2), r(-3, 1), r(5, 7)];
        assert_eq!(derivative(&antiderivative(&p)), p);
    }

    #[test]
    fn horner_eval() {
        // 1 + 2x + 3x^2 at 1/2 = 1 + 1 + 3/4
        assert_eq!(eval(&ints(&[1, 2, 3]), &r(1, 2)), r(11, 4));
    }

    #[test]
    fn nonnegativity_exact() {
        // (x - 1/2)^2 touches zero but never dips below.
        let sq = mul(&[r(-1, 2), r(1, 1)], &[r(-1, 2), r(1, 1)]);
        assert!(nonnegative_on(&sq, &r(0, 1), &r(1, 1)));
        // x - 1/2 is negative on the left half.
        assert!(!nonnegative_on(&[r(-1, 2), r(1, 1)], &r(0, 1), &r(1, 1)));
        assert!(nonnegative_on(&[r(-1, 2), r(1, 1)], &r(1, 2), &r(1, 1)));
        // (x-1/4)(x-3/4) dips below zero strictly inside, both ends positive.
        let dip = mul(&[r(-1, 4), r(1, 1)], &[r(-3, 4), r(1, 1)]);
        assert!(!nonnegative_on(&dip, &r(0, 1), &r(1, 1)));
        // (x-1/3)^2 (x - 2) is <= 0 on [0,1]
        let cubic = mul(&sq, &[r(-2, 1), r(1, 1)]);
        assert!(!nonnegative_on(&cubic, &r(0, 1), &r(1, 1)));
    }

    #[test]
    fn trim_and_degree() {
        assert_eq!(degree(&ints(&[1, 2, 0, 0])), Some(1));
        assert_eq!(degree(&ints(&[0, 0])), None);
        assert_eq!(trim(ints(&[3, 0])), ints(&[3]));
    }
}
