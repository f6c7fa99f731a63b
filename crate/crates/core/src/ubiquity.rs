//! Exact Haar measure of finite unions of p-adic balls, resonant
//! denominators near a fixed `alpha in Z_p^m`, and the finite-stage local
//! ubiquity density of the neighbourhoods of the resonant points.
//!
//! A ball of radius `p^{-t}` in `Z_p` is a residue class modulo `p^t`, so a
//! union of product balls with per-coordinate levels `t_i` is a set of
//! residue vectors and its measure is `#centers * p^{-sum t_i}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::count::common_prime;
use crate::dim::{v_vector, WeightSplit};
use crate::error::{Error, Result};
use crate::num::{counting_constant, Scalar};
use crate::padic::{mod_inverse_u128, threshold_exponent, PadicInt, Prime, Psi, ThresholdMode};
use crate::Budget;

/// The product ball `{y : y_i = center_i (mod p^{level_i})}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    p: Prime,
    levels: Vec<u32>,
    center: Vec<u128>,
}

impl Ball {
    pub fn new(p: Prime, levels: Vec<u32>, center: Vec<u128>) -> Result<Self> {
        if levels.len() != center.len() {
            return Err(Error::InvalidInput("levels and center differ in length".into()));
        }
        let center = levels
            .iter()
            .zip(center)
            .map(|(&l, c)| Ok(c % p.modulus(l)?))
            .collect::<Result<_>>()?;
        Ok(Ball { p, levels, center })
    }

    /// `Z_p^d`.
    pub fn full(p: Prime, d: usize) -> Self {
        Ball {
            p,
            levels: vec![0; d],
            center: vec![0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn center(&self) -> &[u128] {
        &self.center
    }

    pub fn measure(&self) -> BigRational {
        BigRational::new(BigInt::one(), self.p.pow_big(self.levels.iter().sum()).into())
    }
}

/// A union of product balls sharing the per-coordinate levels `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallUnion {
    p: Prime,
    t: Vec<u32>,
    /// canonical residues, sorted, no duplicates
    centers: Vec<Vec<u128>>,
}

impl BallUnion {
    pub fn new(p: Prime, t: Vec<u32>, centers: impl IntoIterator<Item = Vec<u128>>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidInput("empty dimension".into()));
        }
        let moduli: Vec<u128> = t.iter().map(|&ti| p.modulus(ti)).collect::<Result<_>>()?;
        let mut cs: Vec<Vec<u128>> = centers
            .into_iter()
            .map(|c| {
                if c.len() != t.len() {
                    return Err(Error::InvalidInput("center of wrong dimension".into()));
                }
                Ok(c.iter().zip(&moduli).map(|(x, m)| x % m).collect())
            })
            .collect::<Result<_>>()?;
        cs.par_sort_unstable();
        cs.dedup();
        Ok(BallUnion { p, t, centers: cs })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn levels(&self) -> &[u32] {
        &self.t
    }

    pub fn centers(&self) -> &[Vec<u128>] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `#centers * prod p^{-t_i}`.
    pub fn measure(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.centers.len()),
            self.p.pow_big(self.t.iter().sum()).into(),
        )
    }

    /// The same set with every ball split into its `p^{extra}` sub-balls
    /// in coordinate `i`.
    pub fn refine(&self, i: usize, extra: u32) -> Result<Self> {
        let mut t = self.t.clone();
        let old = self.p.modulus(t[i])?;
        t[i] += extra;
        let split = self.p.modulus(extra)?;
        let centers = self.centers.iter().flat_map(|c| {
            (0..split).map(move |j| {
                let mut v = c.clone();
                v[i] += j * old;
                v
            })
        });
        BallUnion::new(self.p, t, centers.collect::<Vec<_>>())
    }

    fn meets(&self, c: &[u128], ball: &Ball) -> bool {
        ball_meets(self.p, &self.t, c, ball)
    }

    /// Balls of the union that meet `ball`.
    pub fn restrict(&self, ball: &Ball) -> Self {
        BallUnion {
            p: self.p,
            t: self.t.clone(),
            centers: self
                .centers
                .iter()
                .filter(|c| self.meets(c, ball))
                .cloned()
                .collect(),
        }
    }

    /// `mu(U cap ball)`, exact.
    pub fn measure_within(&self, ball: &Ball) -> Result<BigRational> {
        if ball.dim() != self.t.len() || ball.p != self.p {
            return Err(Error::InvalidInput("ball does not live in the same space".into()));
        }
        // each coordinate contributes p^{-max(t_i, level_i)} when the balls meet
        let exp: u32 = self
            .t
            .iter()
            .zip(&ball.levels)
            .map(|(&t, &l)| t.max(l))
            .sum();
        let hits = self.centers.iter().filter(|c| self.meets(c, ball)).count();
        Ok(BigRational::new(BigInt::from(hits), self.p.pow_big(exp).into()))
    }
}

/// Ultrametric dichotomy: two balls meet iff the one with the coarser level
/// contains the other's center.
fn ball_meets(p: Prime, t: &[u32], c: &[u128], ball: &Ball) -> bool {
    t.iter()
        .zip(c)
        .zip(ball.levels.iter().zip(&ball.center))
        .all(|((&ti, &ci), (&li, &bi))| {
            let m = p.modulus(ti.min(li)).expect("validated level");
            ci % m == bi % m
        })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonantMember {
    pub q0: u64,
    /// one admissible numerator per frozen coordinate (smallest `|q|`,
    /// then the smaller value)
    pub numerators: Vec<i64>,
    pub coprime_to_p: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonantFamily {
    pub p: Prime,
    /// exclusive lower end of the window
    pub lower: u64,
    /// inclusive upper end of the window
    pub upper: u64,
    pub members: Vec<ResonantMember>,
}

/// `q0 in (lower, upper]` with `|alpha_i - q_i / q0|_p < q0^{-tau_i}` for
/// some `|q_i| <= q0`, `gcd(q_i, q0) = 1`, for every `i`.
///
/// When `p | q0` an admissible `q_i` is prime to `p`, so `|q_i / q0|_p > 1`
/// and the inequality fails: members are automatically prime to `p`. For
/// `p` not dividing `q0` the inequality is `q_i = q0 alpha_i (mod p^{t})`
/// with `t` the strict threshold of `q0^{-tau_i}`. With
/// `require_coprime_p` the `p | q0` candidates are skipped outright.
pub fn resonant_denominators(
    alpha: &[PadicInt],
    tau_m: &[BigRational],
    lower: u64,
    upper: u64,
    require_coprime_p: bool,
) -> Result<ResonantFamily> {
    let p = common_prime(alpha)?;
    if alpha.len() != tau_m.len() {
        return Err(Error::InvalidInput("alpha and tau_m differ in length".into()));
    }
    if upper == 0 || lower >= upper || upper > crate::count::MAX_BOUND {
        return Err(Error::InvalidInput(format!("bad window ({lower}, {upper}]")));
    }
    // thresholds grow with q0, so the largest one bounds the precision
    let mut t_max = 0u32;
    for tau in tau_m {
        let t = threshold_exponent(&Psi::power_law(upper, tau)?, p, ThresholdMode::Strict);
        t_max = t_max.max(t.max(0) as u32);
    }
    let x: Vec<u128> = alpha.iter().map(|a| a.truncate(t_max)).collect::<Result<_>>()?;
    let members: Vec<ResonantMember> = ((lower + 1)..=upper)
        .into_par_iter()
        .filter(|q0| !(require_coprime_p && q0 % p.get() == 0))
        .map(|q0| -> Result<Option<ResonantMember>> {
            if q0 % p.get() == 0 {
                return Ok(None);
            }
            let mut numerators = Vec::with_capacity(x.len());
            for (xi, tau) in x.iter().zip(tau_m) {
                let t = threshold_exponent(&Psi::power_law(q0, tau)?, p, ThresholdMode::Strict).max(0) as u32;
                let m = p.modulus(t)?;
                let r = ((q0 as u128 % m) * (xi % m)) % m;
                match closest_coprime(r, m, q0, q0) {
                    Some(q) => numerators.push(q),
                    None => return Ok(None),
                }
            }
            Ok(Some(ResonantMember {
                q0,
                numerators,
                coprime_to_p: true,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(ResonantFamily {
        p,
        lower,
        upper,
        members,
    })
}

/// Smallest-magnitude `q = r (mod m)` with `|q| <= bound`, `gcd(q, q0) = 1`
/// (ties to the smaller value).
fn closest_coprime(r: u128, m: u128, bound: u64, q0: u64) -> Option<i64> {
    let (r, m, b) = (r as i128, m as i128, bound as i128);
    let mut cands = Vec::new();
    let mut q = r - (r + b).div_euclid(m) * m;
    while q <= b {
        if q >= -b && (q as i64).gcd(&(q0 as i64)) == 1 {
            cands.push(q as i64);
        }
        q += m;
    }
    cands.into_iter().min_by_key(|&q| (q.abs(), q))
}

/// `q0 in (0, N]` admitting, for every frozen coordinate, a numerator
/// `|q| <= N` prime to `q0` with `|q0 alpha_i - q|_p < N^{-tau_i}`.
pub fn resonant_prime_set(alpha: &[PadicInt], tau_m: &[BigRational], n_bound: u64) -> Result<Vec<u64>> {
    let p = common_prime(alpha)?;
    let mut moduli = Vec::new();
    let mut xs = Vec::new();
    for (a, tau) in alpha.iter().zip(tau_m) {
        let t = threshold_exponent(&Psi::power_law(n_bound, tau)?, p, ThresholdMode::Strict).max(0) as u32;
        let m = p.modulus(t)?;
        moduli.push(m);
        xs.push(a.truncate(t)?);
    }
    Ok((1..=n_bound)
        .into_par_iter()
        .filter(|&q0| {
            moduli.iter().zip(&xs).all(|(&m, &x)| {
                let r = ((q0 as u128 % m) * x) % m;
                closest_coprime(r, m, n_bound, q0).is_some()
            })
        })
        .collect())
}

/// Union over members `q0` (prime to `p`) of the product balls around
/// `(q_1 / q0, ..., q_d / q0)`, `|q_i| <= q0`, `gcd(q_i, q0) = 1`, with
/// radius `radii[i]` in coordinate `i` (closed balls: level = non-strict
/// threshold of the radius). With `restrict_to`, only balls meeting it are
/// kept. Returns the union and the number of members skipped because `p`
/// divides them.
pub fn delta_union(
    family: &ResonantFamily,
    radii: &[Psi],
    restrict_to: Option<&Ball>,
    budget: Budget,
) -> Result<(BallUnion, usize)> {
    let p = family.p;
    let d = radii.len();
    if d == 0 {
        return Err(Error::InvalidInput("no free coordinates".into()));
    }
    let mut levels = Vec::with_capacity(d);
    for (i, r) in radii.iter().enumerate() {
        let t = threshold_exponent(r, p, ThresholdMode::NonStrict);
        if t < 1 {
            return Err(Error::ThresholdNonpositive { coordinate: i, t });
        }
        levels.push(t as u32);
    }
    let moduli: Vec<u128> = levels.iter().map(|&t| p.modulus(t)).collect::<Result<_>>()?;
    if let Some(b) = restrict_to {
        if b.dim() != d || b.p != p {
            return Err(Error::InvalidInput("restriction ball does not match".into()));
        }
    }
    let excluded = family.members.iter().filter(|m| m.q0 % p.get() == 0).count();
    let usable: Vec<u64> = family
        .members
        .iter()
        .map(|m| m.q0)
        .filter(|q0| q0 % p.get() != 0)
        .collect();
    let estimate: u128 = usable
        .iter()
        .map(|&q0| (2 * q0 as u128 + 1).saturating_pow(d as u32))
        .fold(0u128, |a, b| a.saturating_add(b));
    budget.check(estimate)?;

    let centers: Vec<Vec<u128>> = usable
        .par_iter()
        .flat_map_iter(|&q0| {
            let per_coord: Vec<Vec<u128>> = (0..d)
                .map(|i| {
                    let m = moduli[i];
                    let inv = mod_inverse_u128(q0 as u128 % m, m).expect("q0 prime to p");
                    let mut cs: Vec<u128> = (-(q0 as i64)..=q0 as i64)
                        .filter(|q| q.gcd(&(q0 as i64)) == 1)
                        .map(|q| ((q as i128).rem_euclid(m as i128) as u128 * inv) % m)
                        .filter(|&c| match restrict_to {
                            Some(b) => {
                                let mm = p.modulus(levels[i].min(b.levels[i])).expect("validated");
                                c % mm == b.center[i] % mm
                            }
                            None => true,
                        })
                        .collect();
                    cs.sort_unstable();
                    cs.dedup();
                    cs
                })
                .collect();
            cartesian(&per_coord)
        })
        .collect();
    Ok((BallUnion::new(p, levels, centers)?, excluded))
}

fn cartesian(sets: &[Vec<u128>]) -> Vec<Vec<u128>> {
    sets.iter().fold(vec![Vec::new()], |acc, set| {
        acc.iter()
            .flat_map(|prefix| {
                set.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub k: u32,
    pub m_param: u64,
    pub members: usize,
    pub excluded: usize,
    pub balls: usize,
    /// `mu(U cap B) / mu(B)` as an exact fraction
    pub density_exact: String,
    pub density: f64,
    /// `1 - 3^d C1(m) M^{-(n + 1 - sum tau_m)}`
    pub c: f64,
    pub pass: bool,
}

/// The local ubiquity density at stage `k`: the neighbourhoods of the
/// resonant points with denominators in `J_k = (M^k, M^{k+1}]` and radii
/// `(M^{k+1})^{-v_i}` should fill at least a fraction `c` of `ball`.
pub fn ubiquity_density_check(
    alpha: &[PadicInt],
    split: &WeightSplit<BigRational>,
    m_param: u64,
    k: u32,
    ball: &Ball,
    budget: Budget,
) -> Result<DensityReport> {
    split.validate()?;
    let d = split.d();
    if ball.dim() != d {
        return Err(Error::InvalidInput("ball must live in Z_p^d".into()));
    }
    let budget_exp = split.budget();
    let e = budget_exp.to_f64_lossy();
    let lead = 3f64.powi(d as i32) * counting_constant(split.m() as u32);
    let lhs = (m_param as f64).ln() * e;
    if lhs.is_nan() || lhs <= lead.ln() {
        return Err(Error::ConstraintViolation(format!(
            "M = {m_param} must exceed (3^d C1)^(1/{e}) = {:.4}",
            lead.powf(1.0 / e)
        )));
    }
    let c = 1.0 - lead * (m_param as f64).powf(-e);
    let vv = v_vector(split.sorted_tau_d(), budget_exp)?;
    let mut v = vec![BigRational::zero(); d];
    for (sorted_idx, &orig) in split.permutation().iter().enumerate() {
        v[orig] = vv.v[sorted_idx].clone();
    }
    let lo = (m_param as u128).checked_pow(k);
    let hi = (m_param as u128).checked_pow(k + 1);
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) if hi <= crate::count::MAX_BOUND as u128 => (lo as u64, hi as u64),
        _ => return Err(Error::OutOfRange(format!("M^(k+1) too large for M = {m_param}, k = {k}"))),
    };
    let family = resonant_denominators(alpha, split.tau_m(), lo, hi, false)?;
    let radii: Vec<Psi> = v
        .iter()
        .map(|vi| Psi::power_law(hi, vi))
        .collect::<Result<_>>()?;
    let (union, excluded) = delta_union(&family, &radii, Some(ball), budget)?;
    let density = union.measure_within(ball)? / ball.measure();
    Ok(DensityReport {
        k,
        m_param,
        members: family.members.len(),
        excluded,
        balls: union.len(),
        density_exact: density.to_string(),
        density: density.to_f64().unwrap_or(f64::NAN),
        c,
        pass: density.to_f64().is_some_and(|x| x >= c),
    })
}

/// Smallest `M` satisfying the density condition for `split`.
pub fn minimal_m(split: &WeightSplit<BigRational>) -> u64 {
    let e = split.budget().to_f64_lossy();
    let lead = 3f64.powi(split.d() as i32) * counting_constant(split.m() as u32);
    let mut m = lead.powf(1.0 / e).floor().max(1.0) as u64;
    while (m as f64).ln() * e <= lead.ln() {
        m += 1;
    }
    m
}
