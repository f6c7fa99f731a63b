//! The approximation lattice of a point of `Z_p^n`.
//!
//! `Lambda = { a in Z^{n+1} : |a0 x_i - a_i|_p <= psi_i(N) }` has the
//! triangular basis `(1, X_1, ..., X_n)`, `p^{t_1} e_1`, ..., `p^{t_n} e_n`
//! where `t_i` is the non-strict threshold of `psi_i(N)` and `X_i` the
//! truncation of `x_i` to `t_i` digits. Everything here is exact: norms
//! are compared squared in integers, ranks are computed fraction-free, and
//! the irrational ball volumes only enter through outward-rounded
//! intervals.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::count::{common_prime, ApproxProfile};
use crate::error::{Error, Result};
use crate::num::{first_minimum_constant, unit_ball_volume_interval, Interval};
use crate::padic::{threshold_exponent, PadicInt, Prime, ThresholdMode};
use crate::Budget;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxLattice {
    p: Prime,
    t: Vec<u32>,
    #[serde(rename = "X")]
    x: Vec<u128>,
}

impl ApproxLattice {
    /// Lattice with thresholds `t_i >= 1` and truncations `0 <= X_i < p^{t_i}`.
    pub fn from_parts(p: Prime, t: Vec<u32>, x: Vec<u128>) -> Result<Self> {
        if t.is_empty() || t.len() != x.len() {
            return Err(Error::InvalidInput("thresholds and truncations differ in length".into()));
        }
        for (i, (&ti, &xi)) in t.iter().zip(&x).enumerate() {
            if ti == 0 {
                return Err(Error::ThresholdNonpositive { coordinate: i, t: 0 });
            }
            if xi >= p.modulus(ti)? {
                return Err(Error::OutOfRange(format!("X_{} = {xi} not below p^{ti}", i + 1)));
            }
        }
        Ok(ApproxLattice { p, t, x })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Number of approximated coordinates; the lattice has rank `n + 1`.
    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn thresholds(&self) -> &[u32] {
        &self.t
    }

    pub fn truncations(&self) -> &[u128] {
        &self.x
    }

    fn moduli(&self) -> Vec<u128> {
        self.t.iter().map(|&t| self.p.modulus(t).expect("validated")).collect()
    }

    /// Basis vectors as columns: `basis()[j]` is the `j`-th column.
    pub fn basis(&self) -> Vec<Vec<BigInt>> {
        let d = self.n() + 1;
        let mut cols = Vec::with_capacity(d);
        let mut first = vec![BigInt::from(1)];
        first.extend(self.x.iter().map(|&x| BigInt::from(x)));
        cols.push(first);
        for (i, m) in self.moduli().into_iter().enumerate() {
            let mut c = vec![BigInt::zero(); d];
            c[i + 1] = BigInt::from(m);
            cols.push(c);
        }
        cols
    }

    /// `prod p^{t_i}`.
    pub fn det(&self) -> BigUint {
        self.t.iter().map(|&t| self.p.pow_big(t)).product()
    }

    /// Membership through the congruences `v_i = v_0 X_i (mod p^{t_i})`.
    pub fn contains(&self, v: &[i64]) -> bool {
        v.len() == self.n() + 1
            && self.moduli().iter().zip(&self.x).zip(&v[1..]).all(|((&m, &x), &vi)| {
                let m = m as i128;
                (v[0] as i128 * x as i128 - vi as i128).rem_euclid(m) == 0
            })
    }

    /// Membership by solving `B c = v` over the rationals (back substitution
    /// on the triangular basis) and checking that `c` is integral.
    pub fn contains_by_basis(&self, v: &[i64]) -> bool {
        if v.len() != self.n() + 1 {
            return false;
        }
        let basis = self.basis();
        let c0 = BigInt::from(v[0]);
        (1..=self.n()).all(|i| {
            let rest = BigInt::from(v[i]) - &c0 * &basis[0][i];
            rest.is_multiple_of(&basis[i][i])
        })
    }

    /// Squared radius bound `r2` under which enumeration stays within `budget`.
    fn enumeration_cost(&self, r2: u128) -> u128 {
        let r = r2.isqrt();
        self.moduli()
            .iter()
            .fold(2 * r + 1, |acc, &m| acc.saturating_mul(2 * r / m + 2))
    }

    /// All lattice vectors with squared euclidean norm at most `r2`, sorted
    /// lexicographically. Includes the zero vector.
    pub fn enumerate_points(&self, r2: u128, budget: Budget) -> Result<Vec<Vec<i64>>> {
        budget.check(self.enumeration_cost(r2))?;
        let r = r2.isqrt() as i64;
        let moduli = self.moduli();
        let mut pts: Vec<Vec<i64>> = (-r..=r)
            .into_par_iter()
            .flat_map_iter(|q0| {
                let mut out = Vec::new();
                let mut cur = vec![q0];
                self.extend_points(&moduli, r2 - (q0 * q0) as u128, &mut cur, &mut out);
                out
            })
            .collect();
        pts.sort();
        Ok(pts)
    }

    fn extend_points(&self, moduli: &[u128], rem: u128, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let i = cur.len() - 1;
        if i == self.n() {
            out.push(cur.clone());
            return;
        }
        let m = moduli[i] as i128;
        let s = rem.isqrt() as i128;
        let start = (cur[0] as i128 * self.x[i] as i128).rem_euclid(m);
        // smallest q >= -s with q = start (mod m)
        let mut q = start + (-s - start).div_euclid(m) * m;
        if q < -s {
            q += m;
        }
        while q <= s {
            cur.push(q as i64);
            self.extend_points(moduli, rem - (q * q) as u128, cur, out);
            cur.pop();
            q += m;
        }
    }

    /// Checks `(prod psi_i)^{-1} <= det <= p^n (prod psi_i)^{-1}` exactly,
    /// coordinate by coordinate: `1 <= p^{t_i} psi_i(N) < p`.
    pub fn det_bounds_hold(&self, profile: &ApproxProfile, n_bound: u64) -> Result<bool> {
        let mut ok = true;
        for (i, &t) in self.t.iter().enumerate() {
            let psi = profile.psi(i, n_bound)?;
            ok &= psi.cmp_pow(self.p, t as i64) != Ordering::Less
                && psi.cmp_pow(self.p, t as i64 - 1) == Ordering::Less;
        }
        Ok(ok)
    }
}

/// Builds the lattice of `x` for `profile` at `N` (non-strict thresholds).
pub fn build_lattice(x: &[PadicInt], profile: &ApproxProfile, n_bound: u64) -> Result<ApproxLattice> {
    let p = common_prime(x)?;
    if x.len() != profile.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let mut t = Vec::with_capacity(x.len());
    let mut xs = Vec::with_capacity(x.len());
    for (i, xi) in x.iter().enumerate() {
        let ti = threshold_exponent(&profile.psi(i, n_bound)?, p, ThresholdMode::NonStrict);
        if ti < 1 {
            return Err(Error::ThresholdNonpositive { coordinate: i, t: ti });
        }
        xs.push(xi.truncate(ti as u32)?);
        t.push(ti as u32);
    }
    ApproxLattice::from_parts(p, t, xs)
}

/// Incremental exact rank of integer vectors (fraction-free elimination).
#[derive(Default)]
struct RankTracker {
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl RankTracker {
    /// Adds `v` if it is independent of the vectors seen so far.
    fn insert(&mut self, v: &[i64]) -> bool {
        let mut w: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
        for (pivot, row) in &self.rows {
            if w[*pivot].is_zero() {
                continue;
            }
            let (a, b) = (row[*pivot].clone(), w[*pivot].clone());
            for (wj, rj) in w.iter_mut().zip(row) {
                *wj = &*wj * &a - rj * &b;
            }
            let g = w.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
            if !g.is_zero() {
                w.iter_mut().for_each(|c| *c /= &g);
            }
        }
        match w.iter().position(|c| !c.is_zero()) {
            Some(pivot) => {
                self.rows.push((pivot, w));
                true
            }
            None => false,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Exact rank of a set of integer vectors.
pub fn rank(vectors: &[Vec<i64>]) -> usize {
    let mut tracker = RankTracker::default();
    for v in vectors {
        tracker.insert(v);
    }
    tracker.rank()
}

pub fn norm_sq(v: &[i64]) -> u128 {
    v.iter().map(|&c| (c as i128 * c as i128) as u128).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaProfile {
    /// `lambda_i^2`, exact.
    pub lambda_sq: Vec<u128>,
    pub lambda: Vec<f64>,
    pub witnesses: Vec<Vec<i64>>,
    /// squared radius of the last enumeration
    pub radius_sq: u128,
}

impl MinimaProfile {
    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }
}

/// Successive minima by radius doubling and greedy independent selection.
///
/// Starting from `R0 = det^{1/(n+1)}`, all lattice vectors in the ball of
/// radius `R` are sorted by norm (ties lexicographically, one sign per
/// pair) and accepted greedily when linearly independent of those already
/// accepted. Once `n + 1` are accepted every vector shorter than the last
/// one has been seen, so the accepted norms are the successive minima.
pub fn successive_minima(lattice: &ApproxLattice, budget: Budget) -> Result<MinimaProfile> {
    let d = lattice.n() + 1;
    let det = crate::num::ln_biguint(&lattice.det());
    let r0 = (det / d as f64).exp();
    let mut r2 = ((r0 * r0).ceil() as u128).max(1);
    loop {
        let mut pts: Vec<Vec<i64>> = lattice
            .enumerate_points(r2, budget)?
            .into_iter()
            .filter(|v| v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
            .collect();
        pts.sort_by(|a, b| norm_sq(a).cmp(&norm_sq(b)).then_with(|| a.cmp(b)));
        let mut tracker = RankTracker::default();
        let mut witnesses = Vec::with_capacity(d);
        for v in pts {
            if tracker.insert(&v) {
                witnesses.push(v);
                if witnesses.len() == d {
                    break;
                }
            }
        }
        if witnesses.len() == d {
            let lambda_sq: Vec<u128> = witnesses.iter().map(|w| norm_sq(w)).collect();
            return Ok(MinimaProfile {
                lambda: lambda_sq.iter().map(|&s| (s as f64).sqrt()).collect(),
                lambda_sq,
                witnesses,
                radius_sq: r2,
            });
        }
        r2 = r2.checked_mul(4).ok_or(Error::InfeasibleSize {
            ops: u128::MAX,
            budget: budget.max_ops,
        })?;
    }
}

/// Geometry-of-numbers inequalities at one radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub radius_sq: u128,
    pub count: usize,
    pub full_rank: bool,
    /// `vol(B_{n+1}) prod lambda_i <= 2^{n+1} det`
    pub minkowski_ok: bool,
    /// upper end of `(n+1)! vol(B(0,R)) / det + (n+1)`; `None` when the
    /// points in the ball do not span
    pub blichfeldt_bound: Option<f64>,
    pub blichfeldt_ok: bool,
    /// `2^n prod floor(2R / lambda_i + 1)`, exact
    pub henk_bound: u128,
    pub henk_ok: bool,
}

impl GeometryReport {
    pub fn all_ok(&self) -> bool {
        self.minkowski_ok && self.blichfeldt_ok && self.henk_ok
    }
}

fn det_interval(lattice: &ApproxLattice) -> Interval {
    let det = lattice.det();
    match num_traits::ToPrimitive::to_f64(&det) {
        Some(v) => Interval::around(v, 2),
        None => Interval::point(f64::INFINITY),
    }
}

/// Checks Minkowski's second theorem (upper half), Blichfeldt's count and
/// Henk's count for the ball of squared radius `r2`, in dimension `n + 1`.
///
/// Point counts are exact; a volume-based inequality is reported violated
/// only when the violation survives outward rounding.
pub fn verify_geometry(
    lattice: &ApproxLattice,
    minima: &MinimaProfile,
    r2: u128,
    budget: Budget,
) -> Result<GeometryReport> {
    let d = lattice.n() as u32 + 1;
    let pts = lattice.enumerate_points(r2, budget)?;
    let count = pts.len();
    let full_rank = rank(&pts) == d as usize;
    let vol = unit_ball_volume_interval(d);
    let det = det_interval(lattice);
    let two_d = Interval::point(2f64.powi(d as i32));

    let prod_lambda = minima
        .lambda_sq
        .iter()
        .fold(Interval::point(1.0), |acc, &s| acc * Interval::point(s as f64).sqrt());
    let minkowski_ok = !(vol * prod_lambda).certainly_gt(two_d * det);

    let (blichfeldt_bound, blichfeldt_ok) = if full_rank {
        let factorial: f64 = (1..=d).map(f64::from).product();
        let r_pow = Interval::point(r2 as f64).sqrt().powi(d);
        let bound = Interval::point(factorial) * vol * r_pow / det + Interval::point(d as f64);
        (
            Some(bound.hi),
            !Interval::point(count as f64).certainly_gt(bound),
        )
    } else {
        (None, true)
    };

    // floor(2R / lambda) = max k with k^2 lambda^2 <= 4 R^2
    let henk_bound = minima.lambda_sq.iter().fold(1u128 << (d - 1), |acc, &ls| {
        acc.saturating_mul((4 * r2 / ls).isqrt() + 1)
    });
    let henk_ok = (count as u128) < henk_bound;

    Ok(GeometryReport {
        radius_sq: r2,
        count,
        full_rank,
        minkowski_ok,
        blichfeldt_bound,
        blichfeldt_ok,
        henk_bound,
        henk_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda1Report {
    pub lambda1: f64,
    /// `C2 (prod psi_i)^{-1/(n+1)}`
    pub upper: f64,
    pub upper_ok: bool,
    /// `(prod psi_i)^{-(1/(n+1) - eps)}`; `None` unless `prod psi_i < N^{-n}`
    pub lower: Option<f64>,
    pub lower_ok: Option<bool>,
}

/// Compares `lambda_1` with the upper bound from Minkowski's first theorem
/// and the lower bound expected for generic `x`.
pub fn check_lambda1_bounds(
    lattice: &ApproxLattice,
    minima: &MinimaProfile,
    profile: &ApproxProfile,
    n_bound: u64,
    eps: f64,
) -> Result<Lambda1Report> {
    let n = lattice.n() as u32;
    let d = (n + 1) as f64;
    let ln_prod = profile.ln_psi_product(n_bound)?;
    let lambda1 = minima.lambda1();
    let upper = first_minimum_constant(n, lattice.prime().get()) * (-ln_prod / d).exp();
    let upper_ok = !Interval::point(minima.lambda_sq[0] as f64)
        .sqrt()
        .certainly_gt(Interval::around(upper, 64));
    let applicable = ln_prod < -(n as f64) * (n_bound as f64).ln();
    let (lower, lower_ok) = if applicable {
        let lower = (-ln_prod * (1.0 / d - eps)).exp();
        (Some(lower), Some(lambda1 >= lower))
    } else {
        (None, None)
    };
    Ok(Lambda1Report {
        lambda1,
        upper,
        upper_ok,
        lower,
        lower_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::parse_rational;

    fn pr(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn zero_lattice() -> ApproxLattice {
        ApproxLattice::from_parts(pr(2), vec![3], vec![0]).unwrap()
    }

    #[test]
    fn build_example() {
        let x = vec![PadicInt::random(pr(3), 10, 1).unwrap()];
        let mut col = std::collections::BTreeMap::new();
        col.insert(5u64, parse_rational("1/27").unwrap());
        let prof = ApproxProfile::table(vec![col]).unwrap();
        let lat = build_lattice(&x, &prof, 5).unwrap();
        assert_eq!(lat.thresholds(), &[3]);
        assert_eq!(lat.det(), BigUint::from(27u32));
        assert!(lat.det_bounds_hold(&prof, 5).unwrap());
        let gen = [1, lat.truncations()[0] as i64];
        assert!(lat.contains(&gen) && lat.contains_by_basis(&gen));
    }

    #[test]
    fn zero_point_basis() {
        let b = zero_lattice().basis();
        assert_eq!(b[0], vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(b[1], vec![BigInt::from(0), BigInt::from(8)]);
    }

    #[test]
    fn nonpositive_threshold_rejected() {
        let x = vec![PadicInt::random(pr(2), 10, 1).unwrap()];
        let mut col = std::collections::BTreeMap::new();
        col.insert(5u64, parse_rational("1").unwrap());
        let prof = ApproxProfile::table(vec![col]).unwrap();
        assert!(matches!(
            build_lattice(&x, &prof, 5),
            Err(Error::ThresholdNonpositive { .. })
        ));
    }

    #[test]
    fn enumeration_matches_scan() {
        let lat = zero_lattice();
        let pts = lat.enumerate_points(64, Budget::default()).unwrap();
        let mut scan = Vec::new();
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                if a * a + b * b <= 64 && b % 8 == 0 {
                    scan.push(vec![a, b]);
                }
            }
        }
        assert_eq!(pts, scan);
        assert_eq!(pts.len(), 19);
        assert_eq!(lat.enumerate_points(0, Budget::default()).unwrap(), vec![vec![0, 0]]);
    }

    #[test]
    fn zero_point_minima_and_geometry() {
        let lat = zero_lattice();
        let m = successive_minima(&lat, Budget::default()).unwrap();
        assert_eq!(m.lambda_sq, vec![1, 64]);
        assert_eq!(m.witnesses, vec![vec![1, 0], vec![0, 8]]);
        let g = verify_geometry(&lat, &m, 64, Budget::default()).unwrap();
        assert_eq!(g.count, 19);
        assert_eq!(g.henk_bound, 2 * 17 * 3);
        let b = g.blichfeldt_bound.unwrap();
        assert!((b - (2.0 * std::f64::consts::PI * 64.0 / 8.0 + 2.0)).abs() < 1e-9);
        assert!(g.all_ok());
        let small = verify_geometry(&lat, &m, 0, Budget::default()).unwrap();
        assert_eq!(small.count, 1);
        assert!(small.all_ok() && !small.full_rank);
    }

    #[test]
    fn rank_is_exact() {
        assert_eq!(rank(&[vec![1, 2, 3], vec![2, 4, 6]]), 1);
        assert_eq!(rank(&[vec![1, 2, 3], vec![2, 4, 7], vec![3, 6, 10]]), 2);
        assert_eq!(rank(&[vec![0, 0, 5], vec![0, 3, 0], vec![7, 0, 0]]), 3);
    }

    #[test]
    fn minima_by_brute_force() {
        // oracle: lambda_1^2 is the smallest nonzero norm over a box scan
        for seed in 0..20 {
            let x = PadicInt::random(pr(3), 10, seed).unwrap();
            let lat = ApproxLattice::from_parts(pr(3), vec![5], vec![x.truncate(5).unwrap()]).unwrap();
            let m = successive_minima(&lat, Budget::default()).unwrap();
            let mut best = u128::MAX;
            for a in -300i64..=300 {
                for b in -300i64..=300 {
                    if (a, b) != (0, 0) && lat.contains(&[a, b]) {
                        best = best.min(norm_sq(&[a, b]));
                    }
                }
            }
            assert_eq!(m.lambda_sq[0], best, "seed {seed}");
            // in rank 2, lambda_1 lambda_2 >= det / (2 / sqrt 3)
            assert!(m.lambda[0] * m.lambda[1] >= 243.0 * 3f64.sqrt() / 2.0 - 1e-9);
        }
    }
}
