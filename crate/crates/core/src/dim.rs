//! Hausdorff dimension of weighted approximable points on a coordinate
//! hyperplane `{(x_1, ..., x_d, alpha)}` of `Z_p^n`, `n = d + m`.
//!
//! The closed-form dimension, the mass-transference lower bound, the
//! weight recursion that connects them, and a finite-stage estimate of the
//! critical exponent of the natural cover. Formula evaluation is generic
//! over [`Scalar`], so rational weights give exact answers.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::padic::{threshold_exponent, PadicInt, Psi, ThresholdMode};
use crate::ubiquity::resonant_prime_set;
use crate::Budget;

fn from_usize<S: Scalar>(v: usize) -> S {
    S::from_usize(v).expect("small integer")
}

fn sum<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |acc, x| acc + x.clone())
}

/// A weight vector split as `(tau_d | tau_m)` across a coordinate
/// hyperplane; the last `m` weights belong to the frozen coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSplit<S> {
    tau_d: Vec<S>,
    tau_m: Vec<S>,
    sorted: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> WeightSplit<S> {
    pub fn new(tau_d: Vec<S>, tau_m: Vec<S>) -> Result<Self> {
        if tau_d.is_empty() || tau_m.is_empty() {
            return Err(Error::InvalidInput("need d >= 1 and m >= 1".into()));
        }
        let mut perm: Vec<usize> = (0..tau_d.len()).collect();
        // stable, so equal weights keep their original order
        perm.sort_by(|&a, &b| tau_d[b].partial_cmp(&tau_d[a]).expect("weights are comparable"));
        let sorted = perm.iter().map(|&i| tau_d[i].clone()).collect();
        Ok(WeightSplit {
            tau_d,
            tau_m,
            sorted,
            perm,
        })
    }

    pub fn d(&self) -> usize {
        self.tau_d.len()
    }

    pub fn m(&self) -> usize {
        self.tau_m.len()
    }

    pub fn n(&self) -> usize {
        self.d() + self.m()
    }

    pub fn tau_d(&self) -> &[S] {
        &self.tau_d
    }

    pub fn tau_m(&self) -> &[S] {
        &self.tau_m
    }

    /// `tau_d` in descending order.
    pub fn sorted_tau_d(&self) -> &[S] {
        &self.sorted
    }

    /// `sorted_tau_d()[k] == tau_d()[permutation()[k]]`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// `n + 1 - sum tau_m`.
    pub fn budget(&self) -> S {
        from_usize::<S>(self.n() + 1) - sum(&self.tau_m)
    }

    /// `sum tau_m < m + 1`.
    pub fn frozen_sum_ok(&self) -> bool {
        sum(&self.tau_m) < from_usize(self.m() + 1)
    }

    /// `sum tau > n + 1`.
    pub fn total_sum_ok(&self) -> bool {
        sum(&self.tau_d) + sum(&self.tau_m) > from_usize(self.n() + 1)
    }

    /// Every weight exceeds 1.
    pub fn weights_ok(&self) -> bool {
        self.tau_d.iter().chain(&self.tau_m).all(|t| *t > S::one())
    }

    pub fn is_valid(&self) -> bool {
        self.frozen_sum_ok() && self.total_sum_ok() && self.weights_ok()
    }

    /// `Err(ConstraintViolation)` naming every failed condition.
    pub fn validate(&self) -> Result<()> {
        let mut failed = Vec::new();
        if !self.frozen_sum_ok() {
            failed.push("sum of frozen weights must be below m + 1");
        }
        if !self.total_sum_ok() {
            failed.push("sum of all weights must exceed n + 1");
        }
        if !self.weights_ok() {
            failed.push("every weight must exceed 1");
        }
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::ConstraintViolation(failed.join("; ")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VVector<S> {
    pub v: Vec<S>,
    /// `t_i = tau_i - v_i`
    pub t: Vec<S>,
}

/// Spreads `budget` over descending weights, filling from the smallest
/// weight up: `v_{d-i} = min{tau_{d-i}, (budget - sum_{j > d-i} v_j) / (d-i)}`.
///
/// Fails with `OutOfRange` if some `v_i <= 1`.
pub fn v_vector<S: Scalar>(tau_desc: &[S], budget: S) -> Result<VVector<S>> {
    let d = tau_desc.len();
    if d == 0 {
        return Err(Error::InvalidInput("empty weight vector".into()));
    }
    let mut v = vec![S::zero(); d];
    let mut used = S::zero();
    for idx in (0..d).rev() {
        let share = (budget.clone() - used.clone()) / from_usize(idx + 1);
        v[idx] = if tau_desc[idx] < share {
            tau_desc[idx].clone()
        } else {
            share
        };
        used = used + v[idx].clone();
    }
    if let Some(i) = v.iter().position(|x| *x <= S::one()) {
        return Err(Error::OutOfRange(format!("v_{} = {:?} is not above 1", i + 1, v[i])));
    }
    let t = tau_desc.iter().zip(&v).map(|(a, b)| a.clone() - b.clone()).collect();
    Ok(VVector { v, t })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MtprrInput<S> {
    pub a: Vec<S>,
    pub t: Vec<S>,
    pub delta: Vec<S>,
    pub k: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MtprrTerm<S> {
    pub candidate: S,
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub k3: Vec<usize>,
    pub value: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MtprrResult<S> {
    pub s: S,
    /// index into `terms` of the minimiser (first on ties)
    pub argmin: usize,
    /// candidates `a_1, ..., a_n, a_1 + t_1, ..., a_n + t_n`, in that order
    pub terms: Vec<MtprrTerm<S>>,
}

/// The mass-transference lower bound for rectangles:
/// `min_A { sum_{K1} delta + sum_{K2} delta + k sum_{K3} delta
///   + (1-k) (sum_{K3} a delta - sum_{K2} t delta) / A }`
/// over `A in {a_i} u {a_i + t_i}`.
pub fn mtprr_lower_bound<S: Scalar>(input: &MtprrInput<S>) -> Result<MtprrResult<S>> {
    let n = input.a.len();
    if n == 0 || input.t.len() != n || input.delta.len() != n {
        return Err(Error::InvalidInput("a, t and delta must have equal nonzero length".into()));
    }
    if input.k < S::zero() || input.k >= S::one() {
        return Err(Error::InvalidInput("k must lie in [0, 1)".into()));
    }
    let candidates: Vec<S> = input
        .a
        .iter()
        .cloned()
        .chain(input.a.iter().zip(&input.t).map(|(a, t)| a.clone() + t.clone()))
        .collect();
    let mut terms = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let (mut k1, mut k2, mut k3) = (Vec::new(), Vec::new(), Vec::new());
        for j in 0..n {
            if input.a[j] >= cand {
                k1.push(j);
            } else if input.a[j].clone() + input.t[j].clone() <= cand {
                k2.push(j);
            } else {
                k3.push(j);
            }
        }
        let ds = |ks: &[usize]| ks.iter().fold(S::zero(), |acc, &j| acc + input.delta[j].clone());
        let weighted = |ks: &[usize], w: &[S]| {
            ks.iter()
                .fold(S::zero(), |acc, &j| acc + w[j].clone() * input.delta[j].clone())
        };
        let value = ds(&k1)
            + ds(&k2)
            + input.k.clone() * ds(&k3)
            + (S::one() - input.k.clone()) * (weighted(&k3, &input.a) - weighted(&k2, &input.t))
                / cand.clone();
        terms.push(MtprrTerm {
            candidate: cand,
            k1,
            k2,
            k3,
            value,
        });
    }
    let mut argmin = 0;
    for (i, term) in terms.iter().enumerate() {
        if term.value < terms[argmin].value {
            argmin = i;
        }
    }
    Ok(MtprrResult {
        s: terms[argmin].value.clone(),
        argmin,
        terms,
    })
}

/// `min_i (n + 1 - sum tau_m + sum_{j >= i} (tau_i - tau_j)) / tau_i` over
/// the descending-sorted free weights.
pub fn theorem2_dimension<S: Scalar>(split: &WeightSplit<S>) -> Result<S> {
    split.validate()?;
    let tau = split.sorted_tau_d();
    let budget = split.budget();
    let mut best: Option<S> = None;
    for i in 0..tau.len() {
        let excess = tau[i..]
            .iter()
            .fold(S::zero(), |acc, tj| acc + tau[i].clone() - tj.clone());
        let value = (budget.clone() + excess) / tau[i].clone();
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    }
    Ok(best.expect("d >= 1"))
}

/// The lower bound obtained by feeding the weight recursion into the
/// mass-transference bound with `delta = 1`, `k = 0`.
pub fn mtprr_dimension<S: Scalar>(split: &WeightSplit<S>) -> Result<S> {
    split.validate()?;
    let vv = v_vector(split.sorted_tau_d(), split.budget())?;
    let d = split.d();
    let res = mtprr_lower_bound(&MtprrInput {
        a: vv.v,
        t: vv.t,
        delta: vec![S::one(); d],
        k: S::zero(),
    })?;
    Ok(res.s)
}

/// Upper bound for a single frozen coordinate with exponent `tau_alpha`:
/// `min_{i < n} (n + tau_alpha - 1 - tau_n + sum_{j != n, tau_j <= tau_i} (tau_i - tau_j)) / tau_i`,
/// where `tau_n` is the last entry of `tau`.
pub fn remark_upper_bound<S: Scalar>(tau: &[S], tau_alpha: S) -> Result<S> {
    let n = tau.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two weights".into()));
    }
    let tau_n = tau[n - 1].clone();
    let one = S::one();
    let floor = if tau_alpha.clone() - one.clone() > one {
        tau_alpha.clone() - one.clone()
    } else {
        one.clone()
    };
    if !(floor < tau_n && tau_n < tau_alpha) {
        return Err(Error::ConstraintViolation(format!(
            "need max(1, tau_alpha - 1) < {tau_n:?} < {tau_alpha:?}"
        )));
    }
    let free = &tau[..n - 1];
    let base = from_usize::<S>(n) + tau_alpha - one - tau_n;
    let mut best: Option<S> = None;
    for ti in free {
        let excess = free
            .iter()
            .filter(|tj| *tj <= ti)
            .fold(S::zero(), |acc, tj| acc + ti.clone() - tj.clone());
        let value = (base.clone() + excess) / ti.clone();
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    }
    Ok(best.expect("n >= 2"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSample {
    pub q: f64,
    pub ln_psi: f64,
}

/// Samples `ln psi` at `q = base^k`, `k_start <= k <= k_end`.
pub fn geometric_samples(base: f64, k_start: u32, k_end: u32, ln_psi: impl Fn(f64) -> f64) -> Vec<PsiSample> {
    (k_start..=k_end)
        .map(|k| {
            let q = base.powi(k as i32);
            PsiSample { q, ln_psi: ln_psi(q) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiStarEstimate {
    pub estimate: f64,
    /// `(q, -ln psi(q) / ln q)` for the last (up to) 8 grid points
    pub trace: Vec<(f64, f64)>,
    /// spread of the trace is below the tolerance
    pub converged: bool,
    /// `psi` is nonincreasing on the trace and the estimate exceeds the
    /// tolerance (so `psi` plausibly tends to 0 polynomially)
    pub valid: bool,
}

/// Estimates `lim -ln psi(q) / ln q` from samples on a grid.
pub fn psi_star_estimate(samples: &[PsiSample], tolerance: f64) -> Result<PsiStarEstimate> {
    if samples.iter().any(|s| s.q.is_nan() || s.q <= 1.0 || !s.ln_psi.is_finite()) {
        return Err(Error::InvalidInput("samples need q > 1 and positive psi".into()));
    }
    let last = samples
        .last()
        .ok_or_else(|| Error::InvalidInput("no samples".into()))?;
    let tail = &samples[samples.len().saturating_sub(8)..];
    let trace: Vec<(f64, f64)> = tail.iter().map(|s| (s.q, -s.ln_psi / s.q.ln())).collect();
    let hi = trace.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = trace.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let estimate = -last.ln_psi / last.q.ln();
    let nonincreasing = tail.windows(2).all(|w| w[1].ln_psi <= w[0].ln_psi);
    Ok(PsiStarEstimate {
        estimate,
        trace,
        converged: hi - lo < tolerance,
        valid: nonincreasing && estimate > tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverStage {
    pub k: u32,
    /// `#Q'(alpha, tau_m, 2^k)`
    pub members: usize,
    /// `log2` of the `s`-free part of the stage cost, per free coordinate
    /// (`None` when no denominators qualify)
    pub log2_weight: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEstimate {
    /// `min_i s_i`; `None` when no stage has resonant denominators
    pub s: Option<f64>,
    /// critical exponent of the cover by balls of radius `2^{-k tau_i}`
    pub per_coordinate: Vec<Option<f64>>,
    pub stages: Vec<CoverStage>,
    pub no_resonant_denominators: bool,
    pub fit_from: u32,
}

impl CoverEstimate {
    /// `log2 cost_k(s)` for free coordinate `i` (sorted order) at stage `k`.
    pub fn log2_cost(&self, stage: &CoverStage, i: usize, tau_i: f64, s: f64) -> Option<f64> {
        stage.log2_weight[i].map(|w| w - stage.k as f64 * tau_i * s)
    }
}

/// `#{q : |q| <= q0, gcd(q, q0) = 1}`.
pub fn coprime_numerators(q0: u64) -> u64 {
    if q0 == 1 {
        3
    } else {
        2 * (1..=q0).filter(|&q| num_integer::gcd(q, q0) == 1).count() as u64
    }
}

/// Finite-stage critical exponent of the natural cover of the limsup set.
///
/// At stage `k` (`N = 2^k`) every `q0` in `Q'(alpha, tau_m, N)` contributes
/// its `numerators^d` rectangles, each covered by
/// `#B_i = prod_{j : t_j < t_i} p^{t_i - t_j}` balls of radius `p^{-t_i}`
/// (`t_j` the strict threshold of `N^{-tau_j}`), so
/// `cost_k(s) = W_{k,i} 2^{-k tau_i s}` with `W_{k,i}` independent of `s`.
/// `log2 cost_k(s)` is therefore affine in `s`, and the `s` at which the
/// least-squares growth rate over stages `fit_from..=k_max` changes sign is
/// `slope_k(log2 W_{k,i}) / tau_i` exactly. The estimate is the minimum
/// over free coordinates.
pub fn cover_critical_exponent(
    alpha: &[PadicInt],
    split: &WeightSplit<BigRational>,
    k_max: u32,
    fit_from: u32,
    budget: Budget,
) -> Result<CoverEstimate> {
    split.validate()?;
    if alpha.len() != split.m() {
        return Err(Error::InvalidInput("alpha must have m coordinates".into()));
    }
    if k_max > 31 || fit_from == 0 || fit_from >= k_max {
        return Err(Error::InvalidInput(format!(
            "need 1 <= fit_from < k_max <= 31, got {fit_from}, {k_max}"
        )));
    }
    let p = crate::count::common_prime(alpha)?;
    budget.check((1u128 << k_max) * 2)?;
    let tau = split.sorted_tau_d();
    let d = split.d();
    let ln2 = std::f64::consts::LN_2;
    let log2_p = (p.get() as f64).ln() / ln2;
    let mut stages = Vec::new();
    for k in 1..=k_max {
        let n_bound = 1u64 << k;
        let members = resonant_prime_set(alpha, split.tau_m(), n_bound)?;
        let ts: Vec<i64> = tau
            .iter()
            .map(|t| Ok(threshold_exponent(&Psi::power_law(n_bound, t)?, p, ThresholdMode::Strict)))
            .collect::<Result<_>>()?;
        let numer_mass: f64 = members
            .iter()
            .map(|&q0| (coprime_numerators(q0) as f64).powi(d as i32))
            .sum();
        let log2_weight = (0..d)
            .map(|i| {
                if members.is_empty() {
                    return None;
                }
                let balls: i64 = ts.iter().filter(|&&tj| tj < ts[i]).map(|&tj| ts[i] - tj).sum();
                Some(numer_mass.log2() + balls as f64 * log2_p)
            })
            .collect();
        stages.push(CoverStage {
            k,
            members: members.len(),
            log2_weight,
        });
    }
    let per_coordinate: Vec<Option<f64>> = (0..d)
        .map(|i| {
            let pts: Vec<(f64, f64)> = stages
                .iter()
                .filter(|s| s.k >= fit_from)
                .filter_map(|s| s.log2_weight[i].map(|w| (s.k as f64, w)))
                .collect();
            least_squares_slope(&pts).map(|slope| slope / tau[i].to_f64().unwrap_or(f64::NAN))
        })
        .collect();
    let s = per_coordinate
        .iter()
        .flatten()
        .cloned()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    Ok(CoverEstimate {
        s,
        per_coordinate,
        no_resonant_denominators: stages.iter().all(|s| s.members == 0),
        stages,
        fit_from,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `(n + 1) / tau - m`, the equal-weight dimension.
pub fn equal_weight_dimension<S: Scalar>(n: usize, m: usize, tau: S) -> S {
    from_usize::<S>(n + 1) / tau - from_usize(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::parse_rational;
    use crate::padic::Prime;

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn v_vector_examples() {
        let vv = v_vector(&[r("2.0"), r("1.2")], r("2.6")).unwrap();
        assert_eq!(vv.v, vec![r("1.4"), r("1.2")]);
        assert_eq!(vv.t, vec![r("0.6"), r("0")]);
        let vv = v_vector(&[r("2.5")], r("1.5")).unwrap();
        assert_eq!((vv.v, vv.t), (vec![r("1.5")], vec![r("1")]));
        let vv = v_vector(&[r("1.3"), r("1.3")], r("2.6")).unwrap();
        assert_eq!(vv.t, vec![r("0"), r("0")]);
        assert!(matches!(v_vector(&[r("3")], r("0.9")), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn mtprr_examples() {
        let res = mtprr_lower_bound(&MtprrInput {
            a: vec![r("1.4"), r("1.2")],
            t: vec![r("0.6"), r("0")],
            delta: vec![r("1"), r("1")],
            k: r("0"),
        })
        .unwrap();
        assert_eq!(res.s, r("1.7"));
        let by_candidate: Vec<(BigRational, BigRational)> =
            res.terms.iter().map(|t| (t.candidate.clone(), t.value.clone())).collect();
        assert!(by_candidate.contains(&(r("2.0"), r("1.7"))));
        assert!(by_candidate.contains(&(r("1.4"), r("2"))));
        assert!(by_candidate.contains(&(r("1.2"), r("2"))));

        let full = mtprr_lower_bound(&MtprrInput {
            a: vec![r("1.5"), r("2"), r("1.1")],
            t: vec![r("0"); 3],
            delta: vec![r("1"), r("0.5"), r("2")],
            k: r("0"),
        })
        .unwrap();
        assert_eq!(full.s, r("3.5"));
    }

    #[test]
    fn mtprr_symmetric_case() {
        // equal a and t, delta = 1, k = 0: n a / (a + t)
        for (a, t) in [("1.5", "0.5"), ("2", "1"), ("1.2", "0.3")] {
            let (a, t) = (r(a), r(t));
            let res = mtprr_lower_bound(&MtprrInput {
                a: vec![a.clone(); 3],
                t: vec![t.clone(); 3],
                delta: vec![r("1"); 3],
                k: r("0"),
            })
            .unwrap();
            assert_eq!(res.s, r("3") * &a / (&a + &t));
        }
    }

    #[test]
    fn theorem2_examples() {
        let s = theorem2_dimension(&WeightSplit::new(vec![r("2.5")], vec![r("1.5")]).unwrap()).unwrap();
        assert_eq!(s, r("0.6"));
        let split = WeightSplit::new(vec![r("2.0"), r("1.2")], vec![r("1.4")]).unwrap();
        assert_eq!(theorem2_dimension(&split).unwrap(), r("1.7"));
        assert_eq!(mtprr_dimension(&split).unwrap(), r("1.7"));
        let eq = WeightSplit::new(vec![r("1.6")], vec![r("1.6")]).unwrap();
        assert_eq!(theorem2_dimension(&eq).unwrap(), r("0.875"));
        assert_eq!(equal_weight_dimension(2, 1, r("1.6")), r("0.875"));
    }

    #[test]
    fn theorem2_names_failed_constraint() {
        let bad = WeightSplit::new(vec![r("1.2")], vec![r("2.5")]).unwrap();
        match theorem2_dimension(&bad) {
            Err(Error::ConstraintViolation(msg)) => assert!(msg.contains("frozen")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn remark_bound_examples() {
        assert_eq!(remark_upper_bound(&[r("2.5"), r("1.5")], r("2")).unwrap(), r("0.6"));
        assert!(matches!(
            remark_upper_bound(&[r("2.5"), r("2")], r("2")),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn psi_star_examples() {
        let s = geometric_samples(2.0, 1, 40, |q| -2.0 * q.ln());
        let est = psi_star_estimate(&s, 0.05).unwrap();
        assert_eq!(est.estimate, 2.0);
        assert!(est.converged && est.valid);

        let s = geometric_samples(2.0, 1, 40, |q| -1.5 * q.ln() + q.ln().ln());
        let est = psi_star_estimate(&s, 0.05).unwrap();
        // oracle: -ln psi / ln q = 1.5 - ln ln q / ln q
        let direct = |k: f64| {
            let lq = k * std::f64::consts::LN_2;
            1.5 - lq.ln() / lq
        };
        assert!((est.estimate - direct(40.0)).abs() < 1e-12);
        assert!(est.trace.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(est.converged);

        let s = geometric_samples(2.0, 1, 40, |_| (0.5f64).ln());
        let est = psi_star_estimate(&s, 0.05).unwrap();
        assert!(est.estimate < 0.05 && !est.valid);
    }

    #[test]
    fn coprime_numerator_counts() {
        assert_eq!(coprime_numerators(1), 3);
        assert_eq!(coprime_numerators(2), 2);
        assert_eq!(coprime_numerators(6), 4);
        assert_eq!(coprime_numerators(7), 12);
    }

    #[test]
    fn cover_without_resonant_denominators() {
        // oracle: integer alpha in Z_101 whose multiples q0 alpha, q0 <= 8,
        // avoid every admissible numerator at every stage k <= 3
        let p = Prime::new(101).unwrap();
        let tau_m = r("1.9");
        let empty = |a: i64| {
            (1..=3u32).all(|k| {
                let n = 1i64 << k;
                let t = threshold_exponent(&Psi::power_law(n as u64, &tau_m).unwrap(), p, ThresholdMode::Strict);
                let m = 101i64.pow(t as u32);
                (1..=n).all(|q0| {
                    (-n..=n).all(|q| num_integer::gcd(q, q0) != 1 || (q0 * a - q).rem_euclid(m) != 0)
                })
            })
        };
        let a = (2..101).find(|&a| empty(a)).expect("some residue avoids all windows");
        let alpha = vec![PadicInt::from_integer(a as i128, p, 10).unwrap()];
        let split = WeightSplit::new(vec![r("3")], vec![tau_m.clone()]).unwrap();
        let est = cover_critical_exponent(&alpha, &split, 3, 1, Budget::default()).unwrap();
        assert!(est.no_resonant_denominators);
        assert_eq!(est.s, None);

        // and a nonempty case for contrast
        let alpha = vec![PadicInt::from_integer(1, p, 10).unwrap()];
        let est = cover_critical_exponent(&alpha, &split, 3, 1, Budget::default()).unwrap();
        assert!(!est.no_resonant_denominators);
    }
}
