//! Numeric helpers shared by the modules: logarithms of big rationals,
//! rational parsing, ball volumes, the counting constants and a small
//! outward-rounded interval type for sound inequality checks.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field-like scalars the dimension formulas are written against.
/// Implemented by `BigRational` (exact) and `f64`.
pub trait Scalar: Num + Clone + PartialOrd + Debug + FromPrimitive + Signed {
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| ln_rational(self).exp())
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().expect("fits f64").ln()
    } else {
        let shift = bits - 1000;
        (n >> shift).to_f64().expect("fits f64").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive rational, without overflowing on huge parts.
pub fn ln_rational(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
}

/// Parses `"3/2"`, `"1.4"`, `"-2"` or `"1e-3"`-free decimals into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches(['-', '+']);
        let digits: BigInt = format!("{}{}", if int_abs.is_empty() { "0" } else { int_abs }, frac)
            .parse()
            .map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(digits, den);
        return Ok(if neg { -r } else { r });
    }
    let a: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(a))
}

pub fn rational_from_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Volume of the unit euclidean ball in dimension `d`,
/// `pi^{d/2} / Gamma(d/2 + 1)`, via `V_d = V_{d-2} 2 pi / d`.
pub fn unit_ball_volume(d: u32) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// The upper-bound constant
/// `max{3 (6 sqrt n)^n, (n+2)! pi^{n/2} sqrt(n)^{n+1} / Gamma(n/2+1)}`.
pub fn counting_constant(n: u32) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let a = 3.0 * (6.0 * sqrt_n).powi(n as i32);
    let b = factorial(n + 2) * sqrt_n.powi(n as i32 + 1) * unit_ball_volume(n);
    a.max(b)
}

/// `2 (Gamma((n+1)/2 + 1) p^n / pi^{(n+1)/2})^{1/(n+1)}`, the constant in
/// the first-minimum upper bound.
pub fn first_minimum_constant(n: u32, p: u64) -> f64 {
    let d = n + 1;
    2.0 * ((p as f64).powi(n as i32) / unit_ball_volume(d)).powf(1.0 / d as f64)
}

/// Closed interval with outward rounding after every operation; used where
/// an inequality violation must never be a rounding artifact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    /// Widens a computed value by a few ulps on each side.
    pub fn around(v: f64, ulps: u32) -> Self {
        let (mut lo, mut hi) = (v, v);
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }

    pub fn sqrt(self) -> Self {
        Interval {
            lo: self.lo.max(0.0).sqrt().next_down().max(0.0),
            hi: self.hi.sqrt().next_up(),
        }
    }

    pub fn powi(self, k: u32) -> Self {
        (0..k).fold(Interval::point(1.0), |acc, _| acc * self)
    }

    /// Definitely `self < other`.
    pub fn certainly_lt(self, other: Interval) -> bool {
        self.hi < other.lo
    }

    /// Definitely `self > other`.
    pub fn certainly_gt(self, other: Interval) -> bool {
        self.lo > other.hi
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: (self.lo - o.hi).next_down(),
            hi: (self.hi - o.lo).next_up(),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        assert!(o.lo > 0.0 || o.hi < 0.0, "interval division by zero");
        self * Interval {
            lo: (1.0 / o.hi).next_down(),
            hi: (1.0 / o.lo).next_up(),
        }
    }
}

/// Interval enclosure of the unit ball volume.
pub fn unit_ball_volume_interval(d: u32) -> Interval {
    Interval::around(unit_ball_volume(d), 4 * (d + 1))
}

/// `base^e >= rhs^f` for non-negative integers, decided exactly.
pub fn pow_ge(base: &BigUint, e: u32, rhs: &BigUint, f: u32) -> bool {
    base.pow(e) >= rhs.pow(f)
}

pub fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/2").unwrap(), BigRational::new(3.into(), 2.into()));
        assert_eq!(parse_rational("1.4").unwrap(), BigRational::new(7.into(), 5.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("2").unwrap(), BigRational::from_integer(2.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn constants() {
        assert!((counting_constant(1) - 18.0).abs() < 1e-12);
        assert!((counting_constant(2) - 216.0).abs() < 1e-12);
        // second branch for n = 2
        let b = 24.0 * std::f64::consts::PI * 2.0 * 2f64.sqrt();
        assert!((b - 213.26).abs() < 0.01 && b < 216.0);
        let c2 = first_minimum_constant(1, 2);
        assert!((c2 - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((c2 - 1.596).abs() < 1e-3);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn interval_is_outward() {
        let a = Interval::point(0.1) + Interval::point(0.2);
        assert!(a.lo < 0.1 + 0.2 && a.hi > 0.1 + 0.2);
        let q = Interval::point(1.0) / Interval::point(3.0);
        assert!(q.lo < 1.0 / 3.0 && q.hi > 1.0 / 3.0);
        let s = Interval::point(2.0).sqrt();
        assert!(s.lo < 2f64.sqrt() && s.hi > 2f64.sqrt());
    }
}
