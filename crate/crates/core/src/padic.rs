//! Finite-precision p-adic integers.
//!
//! An element of `Z_p` is stored as its first `L` base-`p` digits, least
//! significant first. Nothing here ever extends a digit string with
//! implicit zeros: asking for more digits than were stored is an
//! [`Error::InsufficientPrecision`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::ln_rational;

/// Largest supported modulus `p^t`, in bits. Keeps `q * residue` inside
/// `i128` for every `|q| < 2^31`.
pub const MAX_MODULUS_BITS: u32 = 96;

/// A prime number `p >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^t` as an exact modulus, bounded by [`MAX_MODULUS_BITS`].
    pub fn modulus(self, t: u32) -> Result<u128> {
        let mut acc: u128 = 1;
        let limit = 1u128 << MAX_MODULUS_BITS;
        for _ in 0..t {
            acc = acc
                .checked_mul(self.0 as u128)
                .filter(|&v| v <= limit)
                .ok_or(Error::ModulusOverflow {
                    p: self.0,
                    t: t as u64,
                })?;
        }
        Ok(acc)
    }

    pub fn pow_big(self, t: u32) -> BigUint {
        BigUint::from(self.0).pow(t)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The p-adic valuation of an integer. Zero has infinite valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    /// `p^{-v}` exactly; zero for the infinite valuation.
    pub fn norm(self, p: Prime) -> BigRational {
        match self {
            Valuation::Finite(v) => {
                BigRational::new(BigInt::one(), BigInt::from(p.pow_big(v)))
            }
            Valuation::Infinite => BigRational::zero(),
        }
    }

    /// True when the valuation is at least `t` (always true for zero).
    pub fn at_least(self, t: i64) -> bool {
        match self {
            Valuation::Finite(v) => v as i64 >= t,
            Valuation::Infinite => true,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

/// Largest `v` with `p^v | y`.
pub fn valuation(y: i128, p: Prime) -> Valuation {
    if y == 0 {
        return Valuation::Infinite;
    }
    let p = p.get() as u128;
    let mut m = y.unsigned_abs();
    let mut v = 0;
    while m.is_multiple_of(p) {
        m /= p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// [`valuation`] for arbitrary-size integers.
pub fn valuation_big(y: &BigInt, p: Prime) -> Valuation {
    if y.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p.get());
    let mut m = y.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    Valuation::Finite(v)
}

/// `|y|_p` as an exact rational.
pub fn norm(y: i128, p: Prime) -> BigRational {
    valuation(y, p).norm(p)
}

/// An element of `Z_p` known to `L = digits.len()` base-`p` digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: Prime,
    digits: Vec<u32>,
}

impl PadicInt {
    pub fn new(p: Prime, digits: Vec<u32>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        if let Some(&d) = digits.iter().find(|&&d| d as u64 >= p.get()) {
            return Err(Error::DigitOutOfRange { digit: d, p: p.get() });
        }
        Ok(PadicInt { p, digits })
    }

    pub fn zero(p: Prime, precision: usize) -> Result<Self> {
        Self::new(p, vec![0; precision])
    }

    pub fn from_integer(a: i128, p: Prime, precision: usize) -> Result<Self> {
        Self::from_rational(a, 1, p, precision)
    }

    /// Embeds `a / b` into `Z_p`, keeping `precision` digits.
    ///
    /// Common factors of `p` are cancelled first, so `2/2` is accepted
    /// in `Z_2`; a denominator that still carries `p` afterwards means
    /// `a / b` is not a p-adic integer.
    pub fn from_rational(a: i128, b: i128, p: Prime, precision: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::ZeroDenominator);
        }
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        let (mut a, mut b) = (BigInt::from(a), BigInt::from(b));
        let pb = BigInt::from(p.get());
        while b.is_multiple_of(&pb) {
            if !a.is_multiple_of(&pb) {
                return Err(Error::PDividesDenominator { p: p.get() });
            }
            a /= &pb;
            b /= &pb;
        }
        let modulus = BigInt::from(p.pow_big(precision as u32));
        let inv = mod_inverse(&b.mod_floor(&modulus), &modulus)
            .expect("denominator is a unit modulo p^L");
        let value = (a.mod_floor(&modulus) * inv).mod_floor(&modulus);
        let digits = to_digits(value.magnitude(), p, precision);
        Ok(PadicInt { p, digits })
    }

    /// Haar-random element: i.i.d. uniform digits from a seeded ChaCha stream.
    pub fn random(p: Prime, precision: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(p, precision, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(p: Prime, precision: usize, rng: &mut R) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        let digits = (0..precision)
            .map(|_| rng.gen_range(0..p.get()) as u32)
            .collect();
        Ok(PadicInt { p, digits })
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// `X_t = sum_{i<t} digit_i p^i`, the integer with `|x - X_t|_p <= p^{-t}`.
    pub fn truncate(&self, t: u32) -> Result<u128> {
        self.check_precision(t as u64)?;
        // validates the modulus range
        self.p.modulus(t)?;
        let p = self.p.get() as u128;
        Ok(self.digits[..t as usize]
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * p + d as u128))
    }

    /// Truncation without the modulus-size limit.
    pub fn truncate_big(&self, t: u32) -> Result<BigUint> {
        self.check_precision(t as u64)?;
        let p = BigUint::from(self.p.get());
        Ok(self.digits[..t as usize]
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &p + BigUint::from(d)))
    }

    fn check_precision(&self, needed: u64) -> Result<()> {
        if needed > self.digits.len() as u64 {
            Err(Error::InsufficientPrecision {
                needed,
                available: self.digits.len() as u64,
            })
        } else {
            Ok(())
        }
    }
}

fn to_digits(value: &BigUint, p: Prime, precision: usize) -> Vec<u32> {
    let pb = BigUint::from(p.get());
    let mut v = value.clone();
    let mut digits = Vec::with_capacity(precision);
    for _ in 0..precision {
        let (q, r) = v.div_rem(&pb);
        digits.push(r.to_u32().expect("digit below p"));
        v = q;
    }
    digits
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Inverse of `a` modulo `m` for machine-size operands.
pub fn mod_inverse_u128(a: u128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let inv = mod_inverse(&BigInt::from(a), &BigInt::from(m))?;
    inv.to_u128()
}

#[derive(Serialize, Deserialize)]
struct PadicRepr {
    p: u64,
    digits: Vec<u32>,
    precision: usize,
}

impl Serialize for PadicInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PadicRepr {
            p: self.p.get(),
            digits: self.digits.clone(),
            precision: self.digits.len(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PadicRepr::deserialize(d)?;
        if repr.precision != repr.digits.len() {
            return Err(D::Error::custom("precision does not match digit count"));
        }
        let p = Prime::new(repr.p).map_err(D::Error::custom)?;
        PadicInt::new(p, repr.digits).map_err(D::Error::custom)
    }
}

/// How a real threshold `psi` is discretised to an exponent `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThresholdMode {
    /// `p^{-t} <= psi < p^{-t+1}`; matches a closed condition `|y|_p <= psi`.
    NonStrict,
    /// Smallest `t` with `p^{-t} < psi`; then `|y|_p < psi` iff `v_p(y) >= t`.
    Strict,
}

/// A positive real of the form `base^(1/root)` with `base` rational.
///
/// Power-law values `N^{-a/b}` and scaled variants `c N^{-a/b}` are exact
/// in this form, which lets thresholds be decided with integer arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psi {
    base: BigRational,
    root: u32,
}

impl Psi {
    pub fn rational(value: BigRational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::NonPositivePsi);
        }
        Ok(Psi {
            base: value,
            root: 1,
        })
    }

    /// `n^{-tau}`.
    pub fn power_law(n: u64, tau: &BigRational) -> Result<Self> {
        Self::scaled_power_law(&BigRational::one(), n, tau)
    }

    /// `scale * n^{-tau}`.
    pub fn scaled_power_law(scale: &BigRational, n: u64, tau: &BigRational) -> Result<Self> {
        if !scale.is_positive() || n == 0 {
            return Err(Error::NonPositivePsi);
        }
        let (a, b) = (tau.numer(), tau.denom());
        let root = b
            .to_u32()
            .ok_or_else(|| Error::InvalidInput(format!("exponent denominator too large: {tau}")))?;
        let a_abs = a
            .abs()
            .to_u32()
            .ok_or_else(|| Error::InvalidInput(format!("exponent numerator too large: {tau}")))?;
        let n_pow = BigInt::from(n).pow(a_abs);
        let scale_pow = num_traits::pow(scale.clone(), root as usize);
        let base = if a.sign() == Sign::Minus {
            scale_pow * BigRational::from_integer(n_pow)
        } else {
            scale_pow / BigRational::from_integer(n_pow)
        };
        Ok(Psi { base, root })
    }

    pub fn ln(&self) -> f64 {
        ln_rational(&self.base) / self.root as f64
    }

    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    /// Compares `psi` with `p^{-t}` exactly.
    pub fn cmp_pow(&self, p: Prime, t: i64) -> Ordering {
        // psi ? p^{-t}  <=>  base ? p^{-t * root}
        let e = t.unsigned_abs() as u32 * self.root;
        let pe = BigInt::from(p.pow_big(e));
        let (num, den) = (self.base.numer(), self.base.denom());
        if t >= 0 {
            (num * pe).cmp(den)
        } else {
            num.cmp(&(den * pe))
        }
    }

    /// True when `psi` is exactly an integer power of `p`.
    pub fn is_power_of(&self, p: Prime) -> bool {
        let t = threshold_exponent(self, p, ThresholdMode::NonStrict);
        self.cmp_pow(p, t) == Ordering::Equal
    }
}

/// Discretises `psi` to an exponent of `p`. See [`ThresholdMode`].
///
/// Values `psi > 1` yield `t <= 0`; callers that need a genuine
/// constraint reject those.
pub fn threshold_exponent(psi: &Psi, p: Prime, mode: ThresholdMode) -> i64 {
    let holds = |t: i64| match mode {
        ThresholdMode::NonStrict => psi.cmp_pow(p, t) != Ordering::Less,
        ThresholdMode::Strict => psi.cmp_pow(p, t) == Ordering::Greater,
    };
    let guess = (-psi.ln() / (p.get() as f64).ln()).ceil();
    let mut t = if guess.is_finite() { guess as i64 } else { 0 };
    while holds(t - 1) {
        t -= 1;
    }
    while !holds(t) {
        t += 1;
    }
    t
}

/// Convenience wrapper returning `(valuation, norm)` for `y`.
pub fn valuation_with_norm(y: i128, p: Prime) -> (Valuation, BigRational) {
    let v = valuation(y, p);
    (v, v.norm(p))
}
