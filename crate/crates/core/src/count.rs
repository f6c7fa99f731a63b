//! Counting simultaneous rational approximations to a point of `Z_p^n`.
//!
//! The central object is the set of integer vectors `(q0, q1, ..., qn)` with
//! `0 < q0 <= N`, `max |qi| <= N` and `|q0 x_i - q_i|_p < psi_i(N)` for every
//! coordinate. Membership of `q_i` only depends on `q_i mod p^{t_i}` where
//! `t_i` is the strict threshold of `psi_i(N)`, which is what makes the
//! closed-form counter possible.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{counting_constant, Interval};
use crate::padic::{threshold_exponent, valuation, PadicInt, Prime, Psi, ThresholdMode};
use crate::Budget;

/// Largest supported `N`; keeps `q * residue` products inside `i128`.
pub const MAX_BOUND: u64 = (1 << 31) - 1;

/// One coordinate of an approximation profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoordSpec {
    /// `psi(q) = q^{-tau}` with rational `tau > 0`.
    Power(BigRational),
    /// Values of `psi` sampled at the `N` of interest.
    Table(BTreeMap<u64, BigRational>),
}

/// An `n`-tuple of approximation functions plus the comparison mode used
/// to discretise them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxProfile {
    coords: Vec<CoordSpec>,
    mode: ThresholdMode,
}

impl ApproxProfile {
    /// Power-law profile `psi_i(q) = q^{-tau_i}`, compared strictly.
    pub fn power_law(taus: Vec<BigRational>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidInput("empty profile".into()));
        }
        if let Some(t) = taus.iter().find(|t| !t.is_positive()) {
            return Err(Error::InvalidInput(format!("exponent {t} is not positive")));
        }
        Ok(ApproxProfile {
            coords: taus.into_iter().map(CoordSpec::Power).collect(),
            mode: ThresholdMode::Strict,
        })
    }

    pub fn table(columns: Vec<BTreeMap<u64, BigRational>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidInput("empty profile".into()));
        }
        if columns.iter().flat_map(|c| c.values()).any(|v| !v.is_positive()) {
            return Err(Error::NonPositivePsi);
        }
        Ok(ApproxProfile {
            coords: columns.into_iter().map(CoordSpec::Table).collect(),
            mode: ThresholdMode::Strict,
        })
    }

    pub fn with_mode(mut self, mode: ThresholdMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> ThresholdMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[CoordSpec] {
        &self.coords
    }

    /// The exponents, when every coordinate is a power law.
    pub fn taus(&self) -> Option<Vec<BigRational>> {
        self.coords
            .iter()
            .map(|c| match c {
                CoordSpec::Power(t) => Some(t.clone()),
                CoordSpec::Table(_) => None,
            })
            .collect()
    }

    pub fn psi(&self, i: usize, n_bound: u64) -> Result<Psi> {
        match &self.coords[i] {
            CoordSpec::Power(tau) => Psi::power_law(n_bound, tau),
            CoordSpec::Table(t) => {
                let v = t.get(&n_bound).ok_or_else(|| {
                    Error::InvalidInput(format!("no sample of coordinate {i} at N = {n_bound}"))
                })?;
                Psi::rational(v.clone())
            }
        }
    }

    pub fn thresholds(&self, p: Prime, n_bound: u64, mode: ThresholdMode) -> Result<Vec<i64>> {
        (0..self.dim())
            .map(|i| Ok(threshold_exponent(&self.psi(i, n_bound)?, p, mode)))
            .collect()
    }

    /// `ln prod_i psi_i(N)`.
    pub fn ln_psi_product(&self, n_bound: u64) -> Result<f64> {
        (0..self.dim()).map(|i| Ok(self.psi(i, n_bound)?.ln())).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Brute,
    Fast,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: u128,
    #[serde(rename = "N")]
    pub n_bound: u64,
    pub thresholds: Vec<i64>,
    pub solutions: Option<Vec<Vec<i64>>>,
    pub method: Method,
}

/// Residue data shared by both counters: `(p, t_i, p^{t_i}, X_i mod p^{t_i})`.
struct Prepared {
    p: Prime,
    thresholds: Vec<i64>,
    moduli: Vec<u128>,
    residues: Vec<u128>,
}

pub(crate) fn common_prime(x: &[PadicInt]) -> Result<Prime> {
    let first = x
        .first()
        .ok_or_else(|| Error::InvalidInput("empty point".into()))?
        .prime();
    if let Some(other) = x.iter().find(|xi| xi.prime() != first) {
        return Err(Error::MixedPrimes(first.get(), other.prime().get()));
    }
    Ok(first)
}

fn check_bound(n_bound: u64) -> Result<()> {
    if n_bound == 0 || n_bound > MAX_BOUND {
        return Err(Error::OutOfRange(format!(
            "N = {n_bound} outside [1, {MAX_BOUND}]"
        )));
    }
    Ok(())
}

fn prepare(x: &[PadicInt], profile: &ApproxProfile, n_bound: u64) -> Result<Prepared> {
    check_bound(n_bound)?;
    let p = common_prime(x)?;
    if x.len() != profile.dim() {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, profile has {}",
            x.len(),
            profile.dim()
        )));
    }
    let thresholds = profile.thresholds(p, n_bound, profile.mode())?;
    let mut moduli = Vec::with_capacity(x.len());
    let mut residues = Vec::with_capacity(x.len());
    for (i, (&t, xi)) in thresholds.iter().zip(x).enumerate() {
        if t < 0 {
            return Err(Error::ThresholdNegative { coordinate: i, t });
        }
        let t = t as u32;
        residues.push(xi.truncate(t)?);
        moduli.push(p.modulus(t)?);
    }
    Ok(Prepared {
        p,
        thresholds,
        moduli,
        residues,
    })
}

/// Number of `q` in `[-n, n]` with `q = r (mod m)`.
pub fn residue_count(r: u128, m: u128, n: u64) -> u128 {
    let (r, m, n) = (r as i128, m as i128, n as i128);
    ((n - r).div_euclid(m) - (-n - 1 - r).div_euclid(m)) as u128
}

#[inline]
fn mul_mod(q: u64, x: u128, m: u128) -> u128 {
    ((q as u128 % m) * x) % m
}

/// Exhaustive counter. For every `q0` each coordinate's range `[-N, N]` is
/// scanned and tested through the valuation of `q0 X_i - q_i`; because the
/// constraints are coordinate-wise, the surviving tuples are exactly the
/// cartesian products of the per-coordinate survivors, which are all
/// materialised.
pub fn count_brute(
    x: &[PadicInt],
    profile: &ApproxProfile,
    n_bound: u64,
    budget: Budget,
) -> Result<CountResult> {
    let prep = prepare(x, profile, n_bound)?;
    let n = x.len() as u128;
    budget.check(n_bound as u128 * n * (2 * n_bound as u128 + 1))?;
    let nb = n_bound as i64;
    let mut solutions = Vec::new();
    for q0 in 1..=nb {
        let mut per_coord: Vec<Vec<i64>> = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let base = q0 as i128 * prep.residues[i] as i128;
            let hits: Vec<i64> = (-nb..=nb)
                .filter(|&q| valuation(base - q as i128, prep.p).at_least(prep.thresholds[i]))
                .collect();
            if hits.is_empty() {
                break;
            }
            per_coord.push(hits);
        }
        if per_coord.len() < x.len() {
            continue;
        }
        let combos: u128 = per_coord.iter().map(|h| h.len() as u128).product();
        budget.check(solutions.len() as u128 + combos)?;
        let mut idx = vec![0usize; x.len()];
        'outer: loop {
            let mut v = Vec::with_capacity(x.len() + 1);
            v.push(q0);
            v.extend(idx.iter().zip(&per_coord).map(|(&j, h)| h[j]));
            solutions.push(v);
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < per_coord[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    Ok(CountResult {
        count: solutions.len() as u128,
        n_bound,
        thresholds: prep.thresholds,
        solutions: Some(solutions),
        method: Method::Brute,
    })
}

/// Closed-form counter: for each `q0` the admissible `q_i` form one residue
/// class modulo `p^{t_i}`, counted by floor arithmetic.
pub fn count_fast(
    x: &[PadicInt],
    profile: &ApproxProfile,
    n_bound: u64,
    budget: Budget,
) -> Result<CountResult> {
    let prep = prepare(x, profile, n_bound)?;
    budget.check(n_bound as u128 * x.len() as u128)?;
    let count = (1..=n_bound)
        .into_par_iter()
        .map(|q0| {
            let mut prod: u128 = 1;
            for (&m, &xr) in prep.moduli.iter().zip(&prep.residues) {
                prod *= residue_count(mul_mod(q0, xr, m), m, n_bound);
                if prod == 0 {
                    break;
                }
            }
            prod
        })
        .sum();
    Ok(CountResult {
        count,
        n_bound,
        thresholds: prep.thresholds,
        solutions: None,
        method: Method::Fast,
    })
}

/// The membership condition of the counting set, checked verbatim.
pub fn is_member(point: &[i64], x: &[PadicInt], thresholds: &[i64], n_bound: u64) -> bool {
    if point.len() != x.len() + 1 || thresholds.len() != x.len() {
        return false;
    }
    let nb = n_bound as i64;
    let q0 = point[0];
    if q0 <= 0 || q0 > nb || point[1..].iter().any(|q| q.abs() > nb) {
        return false;
    }
    point[1..]
        .iter()
        .zip(x)
        .zip(thresholds)
        .all(|((&q, xi), &t)| {
            let t = t.max(0) as u32;
            match xi.truncate(t) {
                Ok(xt) => valuation(q0 as i128 * xt as i128 - q as i128, xi.prime()).at_least(t as i64),
                Err(_) => false,
            }
        })
}

/// Outcome of checking one bound against a count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundCheck {
    NotApplicable { reason: String },
    Checked { value: f64, satisfied: bool },
}

impl BoundCheck {
    pub fn value(&self) -> Option<f64> {
        match self {
            BoundCheck::Checked { value, .. } => Some(*value),
            BoundCheck::NotApplicable { .. } => None,
        }
    }

    /// `None` when not applicable.
    pub fn satisfied(&self) -> Option<bool> {
        match self {
            BoundCheck::Checked { satisfied, .. } => Some(*satisfied),
            BoundCheck::NotApplicable { .. } => None,
        }
    }
}

/// A count together with every applicable bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub count: u128,
    #[serde(rename = "N")]
    pub n_bound: u64,
    /// `p^{-1} N^{n+1-sum tau} - 1`, as stated (informational for `n > 1`).
    pub lower_stmt: BoundCheck,
    /// `p^{-n} N^{n+1-sum tau} - 1`, the constant the pigeonhole argument delivers.
    pub lower_proof: BoundCheck,
    /// `C1 N^{n+1} prod psi_i(N)`.
    pub upper_c1: BoundCheck,
    /// `2 N^{tau(x) - tau + eps}` for `n = 1`, given an exponent estimate.
    pub upper_exponent: BoundCheck,
}

fn split_exponent(e: &BigRational) -> Result<(u32, u32)> {
    let a = e
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidInput(format!("exponent {e} out of range")))?;
    let b = e
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidInput(format!("exponent {e} out of range")))?;
    Ok((a, b))
}

/// Decides `count >= c^{-1} N^e - 1`, i.e. `((count + 1) c)^b >= N^a`, exactly.
fn lower_bound_holds(count: u128, c: &BigUint, n_bound: u64, e: &BigRational) -> Result<bool> {
    let (a, b) = split_exponent(e)?;
    let lhs = (BigUint::from(count) + 1u32) * c;
    Ok(lhs.pow(b) >= BigUint::from(n_bound).pow(a))
}

/// `n + 1 - sum tau`, when the power-law lower-bound hypotheses hold.
fn lower_exponent(taus: &[BigRational]) -> std::result::Result<BigRational, String> {
    let n = taus.len() as i64;
    let one = BigRational::one();
    if let Some(t) = taus.iter().find(|t| **t <= one) {
        return Err(format!("exponent {t} is not greater than 1"));
    }
    let e = BigRational::from_integer((n + 1).into()) - taus.iter().sum::<BigRational>();
    if !e.is_positive() {
        return Err(format!("sum of exponents is not below {}", n + 1));
    }
    Ok(e)
}

/// Counts with [`count_fast`] and evaluates every applicable bound.
///
/// `tau_hat` is an estimate of the Diophantine exponent of `x`; without it
/// the exponent-based upper bound is reported as not applicable.
pub fn evaluate_bounds(
    x: &[PadicInt],
    profile: &ApproxProfile,
    n_bound: u64,
    eps: f64,
    tau_hat: Option<f64>,
    budget: Budget,
) -> Result<BoundReport> {
    let taus = profile
        .taus()
        .ok_or_else(|| Error::InvalidInput("bounds need a power-law profile".into()))?;
    let result = count_fast(x, profile, n_bound, budget)?;
    let count = result.count;
    let p = common_prime(x)?;
    let n = taus.len() as u32;
    let ln_n = (n_bound as f64).ln();

    let (lower_stmt, lower_proof) = match lower_exponent(&taus) {
        Ok(e) => {
            let pow_e = (e.to_f64().unwrap_or(f64::NAN) * ln_n).exp();
            let p_big = BigUint::from(p.get());
            let stmt = BoundCheck::Checked {
                value: pow_e / p.get() as f64 - 1.0,
                satisfied: lower_bound_holds(count, &p_big, n_bound, &e)?,
            };
            let proof = BoundCheck::Checked {
                value: pow_e / (p.get() as f64).powi(n as i32) - 1.0,
                satisfied: lower_bound_holds(count, &p_big.pow(n), n_bound, &e)?,
            };
            (stmt, proof)
        }
        Err(reason) => (
            BoundCheck::NotApplicable {
                reason: reason.clone(),
            },
            BoundCheck::NotApplicable { reason },
        ),
    };

    let upper_c1 = match lower_exponent(&taus) {
        Ok(_) => {
            let ln_value =
                counting_constant(n).ln() + (n + 1) as f64 * ln_n + profile.ln_psi_product(n_bound)?;
            let value = ln_value.exp();
            // report a violation only when it survives rounding
            let enclosure = Interval::around(value, 64);
            BoundCheck::Checked {
                value,
                satisfied: !Interval::point(count as f64).certainly_gt(enclosure),
            }
        }
        Err(reason) => BoundCheck::NotApplicable { reason },
    };

    let upper_exponent = match (tau_hat, n) {
        (None, _) => BoundCheck::NotApplicable {
            reason: "no exponent estimate supplied".into(),
        },
        (Some(_), n) if n != 1 => BoundCheck::NotApplicable {
            reason: "only defined for one coordinate".into(),
        },
        (Some(th), _) => {
            let tau = taus[0].to_f64().unwrap_or(f64::NAN);
            if !(1f64.max(th - 1.0) < tau && tau < th) {
                BoundCheck::NotApplicable {
                    reason: format!("need max(1, {th} - 1) < {tau} < {th}"),
                }
            } else {
                let value = 2.0 * ((th - tau + eps) * ln_n).exp();
                BoundCheck::Checked {
                    value,
                    satisfied: !Interval::point(count as f64)
                        .certainly_gt(Interval::around(value, 64)),
                }
            }
        }
    };

    Ok(BoundReport {
        count,
        n_bound,
        lower_stmt,
        lower_proof,
        upper_c1,
        upper_exponent,
    })
}

/// Residue-vector buckets of the points `q0 x - q`, `q in [0, H]^{n+1}`.
fn buckets(
    residues: &[u128],
    moduli: &[u128],
    h: u64,
    budget: Budget,
) -> Result<HashMap<Vec<u128>, Vec<Vec<i64>>>> {
    let dim = residues.len() + 1;
    let total = (h as u128 + 1).checked_pow(dim as u32).unwrap_or(u128::MAX);
    budget.check(total)?;
    let mut map: HashMap<Vec<u128>, Vec<Vec<i64>>> = HashMap::new();
    let mut point = vec![0i64; dim];
    loop {
        let q0 = point[0] as u64;
        let key: Vec<u128> = residues
            .iter()
            .zip(moduli)
            .zip(&point[1..])
            .map(|((&x, &m), &q)| (mul_mod(q0, x, m) + m - (q as u128 % m)) % m)
            .collect();
        map.entry(key).or_default().push(point.clone());
        // odometer over [0, H]^{n+1}
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(map);
            }
            k -= 1;
            if point[k] < h as i64 {
                point[k] += 1;
                break;
            }
            point[k] = 0;
        }
    }
}

/// Strict thresholds, moduli and truncations for power-law style inputs.
/// `(p, thresholds, moduli, residues)`
type ResidueSetup = (Prime, Vec<i64>, Vec<u128>, Vec<u128>);

fn residue_setup(x: &[PadicInt], psis: &[Psi]) -> Result<ResidueSetup> {
    let p = common_prime(x)?;
    let mut ts = Vec::new();
    let mut moduli = Vec::new();
    let mut residues = Vec::new();
    for (i, (xi, psi)) in x.iter().zip(psis).enumerate() {
        let t = threshold_exponent(psi, p, ThresholdMode::Strict);
        if t < 0 {
            return Err(Error::ThresholdNegative { coordinate: i, t });
        }
        residues.push(xi.truncate(t as u32)?);
        moduli.push(p.modulus(t as u32)?);
        ts.push(t);
    }
    Ok((p, ts, moduli, residues))
}

/// Builds a member of the counting set by the pigeonhole argument.
///
/// The `(N+1)^{n+1}` points `q0 x - q` with `q in [0, N]^{n+1}` are bucketed
/// by residue vector modulo `(p^{t_1}, ..., p^{t_n})`. Inside the fullest
/// bucket (lowest residue key on ties) points are ordered by `|q0|`, then
/// `q1`, ..., and the difference between the second and first point is
/// returned.
pub fn pigeonhole_witness(
    x: &[PadicInt],
    taus: &[BigRational],
    n_bound: u64,
    budget: Budget,
) -> Result<Vec<i64>> {
    check_bound(n_bound)?;
    if x.len() != taus.len() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let e = lower_exponent(taus).map_err(Error::ConstraintViolation)?;
    let p = common_prime(x)?;
    let n = x.len() as u32;
    // p^{-n} N^e >= 1, i.e. N^a >= p^{nb}, puts more points than buckets
    let (a, b) = split_exponent(&e)?;
    if BigUint::from(n_bound).pow(a) < BigUint::from(p.get()).pow(n * b) {
        return Err(Error::NoOverfullBucket);
    }
    let psis: Vec<Psi> = taus
        .iter()
        .map(|t| Psi::power_law(n_bound, t))
        .collect::<Result<_>>()?;
    let (_, ts, moduli, residues) = residue_setup(x, &psis)?;
    let map = buckets(&residues, &moduli, n_bound, budget)?;
    let mut ranked: Vec<(&Vec<u128>, &Vec<Vec<i64>>)> =
        map.iter().filter(|(_, v)| v.len() >= 2).collect();
    ranked.sort_by(|(ka, va), (kb, vb)| vb.len().cmp(&va.len()).then_with(|| ka.cmp(kb)));
    let witness = ranked
        .into_iter()
        .find_map(|(_, bucket)| {
            let mut pts = bucket.clone();
            pts.sort_by(|u, v| (u[0].abs(), &u[1..]).cmp(&(v[0].abs(), &v[1..])));
            let m = &pts[0];
            pts[1..]
                .iter()
                .map(|r| r.iter().zip(m).map(|(a, b)| a - b).collect::<Vec<i64>>())
                .find(|d| d[0] > 0)
        })
        .ok_or(Error::NoOverfullBucket)?;
    debug_assert!(is_member(&witness, x, &ts, n_bound));
    Ok(witness)
}

/// Flips `v` so that its first nonzero entry is positive.
fn normalize_sign(mut v: Vec<i64>) -> Vec<i64> {
    if v.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    v
}

/// Nonzero `(x0, ..., xn)` with `max |x_i| <= H` and
/// `|x0 alpha_i - x_i|_p < p H^{-tau_i}` for every `i`, where
/// `sum tau_i = n + 1`.
///
/// Buckets `[0, H]^{n+1}` by residues modulo `p^{t_i}` (strict thresholds of
/// `p H^{-tau_i}`, so `prod p^{t_i} <= H^{n+1}`) and returns, over all
/// same-bucket pairs, the difference with the smallest max-norm, ties broken
/// lexicographically after normalising the sign.
///
/// # Panics
///
/// If no solution is found; existence is guaranteed by pigeonhole.
pub fn minkowski_solve(
    alpha: &[PadicInt],
    taus: &[BigRational],
    h: u64,
    budget: Budget,
) -> Result<Vec<i64>> {
    if h == 0 || h > MAX_BOUND {
        return Err(Error::OutOfRange(format!("H = {h}")));
    }
    if alpha.len() != taus.len() || alpha.is_empty() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let n = alpha.len() as i64;
    if taus.iter().sum::<BigRational>() != BigRational::from_integer((n + 1).into()) {
        return Err(Error::ConstraintViolation(format!(
            "exponents must sum to exactly {}",
            n + 1
        )));
    }
    if taus.iter().any(|t| !t.is_positive()) {
        return Err(Error::ConstraintViolation("exponents must be positive".into()));
    }
    let p = common_prime(alpha)?;
    let scale = BigRational::from_integer(BigInt::from(p.get()));
    let psis: Vec<Psi> = taus
        .iter()
        .map(|t| Psi::scaled_power_law(&scale, h, t))
        .collect::<Result<_>>()?;
    let (_, ts, moduli, residues) = residue_setup(alpha, &psis)?;
    let map = buckets(&residues, &moduli, h, budget)?;
    let pairs: u128 = map.values().map(|b| (b.len() as u128).pow(2) / 2).sum();
    budget.check(pairs)?;
    let key = |v: &Vec<i64>| (v.iter().map(|c| c.abs()).max().unwrap_or(0), v.clone());
    let mut best: Option<Vec<i64>> = None;
    for bucket in map.values() {
        for (i, u) in bucket.iter().enumerate() {
            for w in &bucket[i + 1..] {
                let d = normalize_sign(w.iter().zip(u).map(|(a, b)| a - b).collect());
                if best.as_ref().is_none_or(|b| key(&d) < key(b)) {
                    best = Some(d);
                }
            }
        }
    }
    let sol = best.expect("pigeonhole guarantees a solution of the linear-forms system");
    assert!(
        sol.iter().any(|&c| c != 0)
            && sol.iter().all(|c| c.unsigned_abs() <= h)
            && sol[1..].iter().zip(alpha).zip(&ts).all(|((&q, a), &t)| {
                let at = a.truncate(t as u32).expect("precision checked");
                valuation(sol[0] as i128 * at as i128 - q as i128, p).at_least(t)
            }),
        "linear-forms solution failed verification"
    );
    Ok(sol)
}

/// Geometric schedule `Q = 2^k`, `start_exp <= k <= end_exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentSchedule {
    pub start_exp: u32,
    pub end_exp: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaSample {
    pub q: u64,
    /// best `sum_i log_Q (1 / |q0 x_i - q_i|_p)` at this `Q`
    pub sigma: f64,
    /// running max up to and including this `Q`
    pub running_max: f64,
    /// the maximiser hit the precision cap in some coordinate
    pub capped: bool,
    pub q0: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub tau_hat: f64,
    pub trace: Vec<SigmaSample>,
    /// the precision cap bound somewhere in the schedule
    pub truncated: bool,
    /// the cap bound at every `Q`: `x` looks rational
    pub unbounded: bool,
    /// digits actually used
    pub precision_cap: u32,
}

/// Lower estimate of the Diophantine exponent of `x` from a finite schedule.
///
/// For each `Q` the best achievable valuation of `q0 x_i - q_i` with
/// `|q_i| <= Q` is found per coordinate (valuations are capped at the
/// stored precision), and `tau_hat` is the running max of the resulting
/// exponents over the schedule. The scan costs about `2^{end_exp + 1} n`
/// operations.
pub fn diophantine_exponent_estimate(
    x: &[PadicInt],
    schedule: ExponentSchedule,
    budget: Budget,
) -> Result<ExponentEstimate> {
    let p = common_prime(x)?;
    if schedule.start_exp == 0 || schedule.start_exp > schedule.end_exp || schedule.end_exp > 31 {
        return Err(Error::InvalidInput(format!("bad schedule {schedule:?}")));
    }
    budget.check(((1u128 << (schedule.end_exp + 1)) - (1u128 << schedule.start_exp)) * x.len() as u128)?;
    let stored = x.iter().map(|xi| xi.precision()).min().unwrap_or(0) as u32;
    let mut cap = stored;
    while cap > 0 && p.modulus(cap).is_err() {
        cap -= 1;
    }
    let powers: Vec<u128> = (0..=cap).map(|v| p.modulus(v)).collect::<Result<_>>()?;
    let full = powers[cap as usize];
    let xs: Vec<u128> = x.iter().map(|xi| xi.truncate(cap)).collect::<Result<_>>()?;
    let ln_p = (p.get() as f64).ln();

    let mut trace = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for k in schedule.start_exp..=schedule.end_exp {
        let q = 1u64 << k;
        let qq = q as u128;
        let best_valuation = |r: u128| -> u32 {
            let mut v = 0;
            while v < cap {
                let m = powers[v as usize + 1];
                let rv = r % m;
                if rv <= qq || m - rv <= qq {
                    v += 1;
                } else {
                    break;
                }
            }
            v
        };
        let (total, capped, q0) = (1..=q)
            .into_par_iter()
            .map(|q0| {
                let vs: Vec<u32> = xs.iter().map(|&xr| best_valuation(mul_mod(q0, xr, full))).collect();
                let total: u32 = vs.iter().sum();
                (total, vs.contains(&cap), q0)
            })
            .reduce(
                || (0, false, u64::MAX),
                |a, b| if (b.0, std::cmp::Reverse(b.2)) > (a.0, std::cmp::Reverse(a.2)) { b } else { a },
            );
        let sigma = total as f64 * ln_p / (q as f64).ln();
        running = running.max(sigma);
        trace.push(SigmaSample {
            q,
            sigma,
            running_max: running,
            capped,
            q0,
        });
    }
    let truncated = trace.iter().any(|s| s.capped);
    let unbounded = trace.iter().all(|s| s.capped);
    Ok(ExponentEstimate {
        tau_hat: running,
        trace,
        truncated,
        unbounded,
        precision_cap: cap,
    })
}
