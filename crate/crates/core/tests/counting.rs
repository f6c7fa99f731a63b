use num_bigint::BigInt;
use num_rational::BigRational;
use padic_approx::count::{
    count_brute, count_fast, evaluate_bounds, is_member, minkowski_solve, pigeonhole_witness, ApproxProfile,
};
use padic_approx::padic::valuation;
use padic_approx::{Budget, PadicInt, Prime, ThresholdMode};
use proptest::prelude::*;

fn pr(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn hundredths(k: i64) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(100))
}

fn point(p: Prime, n: usize, seed: u64) -> Vec<PadicInt> {
    (0..n)
        .map(|i| PadicInt::random(p, 48, seed.wrapping_mul(31).wrapping_add(i as u64)).unwrap())
        .collect()
}

fn prime_strategy() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5])
}

/// Scan of `(0, N] x [-N, N]^n` straight from the definition.
fn scan_count(x: &[PadicInt], thresholds: &[i64], n_bound: u64) -> u128 {
    fn go(v: &mut Vec<i64>, i: usize, x: &[PadicInt], ts: &[i64], n_bound: u64) -> u128 {
        if i == v.len() {
            return is_member(v, x, ts, n_bound) as u128;
        }
        let nb = n_bound as i64;
        let lo = if i == 0 { 1 } else { -nb };
        let mut total = 0;
        for q in lo..=nb {
            v[i] = q;
            total += go(v, i + 1, x, ts, n_bound);
        }
        total
    }
    go(&mut vec![0; x.len() + 1], 0, x, thresholds, n_bound)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_matches_brute_and_definition(
        p in prime_strategy(),
        n in 1usize..=2,
        n_bound in 1u64..=40,
        k1 in 10i64..=90,
        k2 in 10i64..=90,
        seed in any::<u64>(),
    ) {
        let p = pr(p);
        let taus: Vec<BigRational> = [k1, k2][..n].iter().map(|&k| hundredths(100 + k)).collect();
        let x = point(p, n, seed);
        let profile = ApproxProfile::power_law(taus).unwrap();
        let fast = count_fast(&x, &profile, n_bound, Budget::default()).unwrap();
        let brute = count_brute(&x, &profile, n_bound, Budget::default()).unwrap();
        prop_assert_eq!(fast.count, brute.count);
        prop_assert_eq!(&fast.thresholds, &brute.thresholds);
        let sols = brute.solutions.unwrap();
        prop_assert_eq!(sols.len() as u128, brute.count);
        for s in &sols {
            prop_assert!(s[0] > 0 && s[0] as u64 <= n_bound);
            prop_assert!(s[1..].iter().all(|q| q.unsigned_abs() <= n_bound));
            for (i, xi) in x.iter().enumerate() {
                let t = brute.thresholds[i];
                let xt = xi.truncate(t as u32).unwrap() as i128;
                prop_assert!(valuation(s[0] as i128 * xt - s[i + 1] as i128, p).at_least(t));
            }
        }
        if n_bound <= 12 {
            prop_assert_eq!(scan_count(&x, &fast.thresholds, n_bound), fast.count);
        }
    }

    #[test]
    fn count_is_nonincreasing_in_each_exponent(
        p in prime_strategy(),
        n_bound in 8u64..=300,
        k1 in 10i64..=80,
        k2 in 10i64..=80,
        bump in 1i64..=20,
        coord in 0usize..2,
        seed in any::<u64>(),
    ) {
        let p = pr(p);
        let x = point(p, 2, seed);
        let mut ks = [k1, k2];
        let base = ApproxProfile::power_law(ks.iter().map(|&k| hundredths(100 + k)).collect()).unwrap();
        ks[coord] += bump;
        let tighter = ApproxProfile::power_law(ks.iter().map(|&k| hundredths(100 + k)).collect()).unwrap();
        let a = count_fast(&x, &base, n_bound, Budget::default()).unwrap().count;
        let b = count_fast(&x, &tighter, n_bound, Budget::default()).unwrap().count;
        prop_assert!(b <= a);
    }

    #[test]
    fn proof_lower_bound_always_holds(
        p in prop::sample::select(vec![2u64, 3]),
        n in 1usize..=2,
        e in 2u32..=9,
        k1 in 1i64..=49,
        k2 in 1i64..=49,
        seed in any::<u64>(),
    ) {
        let p = pr(p);
        let taus: Vec<BigRational> = [k1, k2][..n].iter().map(|&k| hundredths(100 + k)).collect();
        let x = point(p, n, seed);
        let profile = ApproxProfile::power_law(taus.clone()).unwrap();
        let n_bound = p.get().pow(e);
        let report = evaluate_bounds(&x, &profile, n_bound, 0.1, None, Budget::default()).unwrap();
        prop_assert_eq!(report.lower_proof.satisfied(), Some(true));
        // bucketing materialises (N+1)^(n+1) points
        let small = (n_bound as u128 + 1).pow(n as u32 + 1) <= 2_000_000;
        if small {
            if let Ok(w) = pigeonhole_witness(&x, &taus, n_bound, Budget::default()) {
                let ts = profile.thresholds(p, n_bound, ThresholdMode::Strict).unwrap();
                prop_assert!(is_member(&w, &x, &ts, n_bound));
            }
        }
    }

    #[test]
    fn linear_forms_solution_is_valid(
        p in prop::sample::select(vec![2u64, 3]),
        a in 5i64..=25,
        h in 1u64..=20,
        seed in any::<u64>(),
    ) {
        let p = pr(p);
        let taus = vec![
            BigRational::new(BigInt::from(a), BigInt::from(10)),
            BigRational::new(BigInt::from(30 - a), BigInt::from(10)),
        ];
        let alpha = point(p, 2, seed);
        let v = minkowski_solve(&alpha, &taus, h, Budget::default()).unwrap();
        prop_assert!(v.iter().any(|&c| c != 0));
        prop_assert!(v.iter().all(|c| c.unsigned_abs() <= h));
    }
}

#[test]
fn rational_point_count_is_linear_for_decaying_psi() {
    // for x = 1/3 only the exact solutions q0 = 3q survive once p^t > 2N
    let p = pr(2);
    let x = vec![PadicInt::from_rational(1, 3, p, 64).unwrap()];
    let profile = ApproxProfile::power_law(vec![hundredths(150)]).unwrap();
    for n_bound in [1u64 << 12, 1 << 14, 1 << 15] {
        let c = count_fast(&x, &profile, n_bound, Budget::default()).unwrap().count;
        assert_eq!(c, (n_bound / 3) as u128);
    }
}

#[test]
fn constant_psi_count_grows_quadratically() {
    let p = pr(2);
    let x = vec![PadicInt::from_rational(1, 3, p, 64).unwrap()];
    let n_bound = 1u64 << 12;
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let col: std::collections::BTreeMap<u64, BigRational> =
        [(n_bound, quarter.clone()), (2 * n_bound, quarter)].into_iter().collect();
    let profile = ApproxProfile::table(vec![col]).unwrap();
    let a = count_fast(&x, &profile, n_bound, Budget::default()).unwrap().count;
    let b = count_fast(&x, &profile, 2 * n_bound, Budget::default()).unwrap().count;
    assert!(b > 3 * a, "count(2N) = {b}, count(N) = {a}");
}

#[test]
fn budget_is_enforced() {
    let p = pr(2);
    let x = point(p, 2, 1);
    let profile = ApproxProfile::power_law(vec![hundredths(150), hundredths(120)]).unwrap();
    assert!(matches!(
        count_brute(&x, &profile, 1000, Budget::new(1000)),
        Err(padic_approx::Error::InfeasibleSize { .. })
    ));
}
