use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use padic_approx::count::{count_brute, ApproxProfile};
use padic_approx::lattice::{build_lattice, norm_sq, rank, successive_minima, verify_geometry, ApproxLattice};
use padic_approx::{Budget, PadicInt, Prime};
use proptest::prelude::*;

fn pr(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn hundredths(k: i64) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(100))
}

fn point(p: Prime, n: usize, seed: u64) -> Vec<PadicInt> {
    (0..n)
        .map(|i| PadicInt::random(p, 48, seed.wrapping_mul(17).wrapping_add(i as u64)).unwrap())
        .collect()
}

fn lattice_strategy() -> impl Strategy<Value = (Vec<PadicInt>, ApproxProfile, u64)> {
    (
        prop::sample::select(vec![2u64, 3]),
        1usize..=2,
        16u64..=400,
        prop::collection::vec(10i64..=90, 2),
        any::<u64>(),
    )
        .prop_map(|(p, n, n_bound, ks, seed)| {
            let taus = ks[..n].iter().map(|&k| hundredths(100 + k)).collect();
            (
                point(pr(p), n, seed),
                ApproxProfile::power_law(taus).unwrap(),
                n_bound,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn membership_tests_agree(
        (x, profile, n_bound) in lattice_strategy(),
        v0 in -500i64..500,
        noise in prop::collection::vec(-3i64..=3, 2),
        multiples in prop::collection::vec(-3i64..=3, 2),
    ) {
        let lat = build_lattice(&x, &profile, n_bound).unwrap();
        let p = lat.prime();
        // a lattice vector, then the same vector knocked off by one residue
        let mut v = vec![v0];
        for ((&t, &x), k) in lat.thresholds().iter().zip(lat.truncations()).zip(&multiples) {
            let m = p.modulus(t).unwrap() as i64;
            let r = (v0 as i128 * x as i128).rem_euclid(m as i128) as i64;
            v.push(r + k * m);
        }
        prop_assert!(lat.contains(&v));
        prop_assert!(lat.contains_by_basis(&v));
        let mut near = v.clone();
        near[1] += 1;
        prop_assert!(!lat.contains(&near));
        prop_assert_eq!(lat.contains(&near), lat.contains_by_basis(&near));
        let mut random = v.clone();
        for (c, e) in random[1..].iter_mut().zip(&noise) {
            *c += e;
        }
        prop_assert_eq!(lat.contains(&random), lat.contains_by_basis(&random));
    }

    #[test]
    fn determinant_and_its_bounds((x, profile, n_bound) in lattice_strategy()) {
        let lat = build_lattice(&x, &profile, n_bound).unwrap();
        let p = lat.prime();
        let product = lat.thresholds().iter().fold(BigUint::one(), |acc, &t| acc * p.pow_big(t));
        prop_assert_eq!(lat.det(), product.clone());
        // triangular basis: the diagonal product is the determinant
        let basis = lat.basis();
        let diag = (0..basis.len()).fold(BigInt::one(), |acc, i| acc * &basis[i][i]);
        prop_assert_eq!(diag, BigInt::from(product));
        prop_assert!(lat.det_bounds_hold(&profile, n_bound).unwrap());
    }

    #[test]
    fn counting_set_lies_in_lattice((x, profile, n_bound) in lattice_strategy()) {
        prop_assume!(n_bound <= 120);
        let lat = build_lattice(&x, &profile, n_bound).unwrap();
        let sols = count_brute(&x, &profile, n_bound, Budget::default()).unwrap().solutions.unwrap();
        for s in &sols {
            prop_assert!(lat.contains(s));
            prop_assert!(s[0] > 0 && s[0] as u64 <= n_bound);
            prop_assert!(s[1..].iter().all(|q| q.unsigned_abs() <= n_bound));
        }
    }

    #[test]
    fn minima_are_sorted_attained_and_independent((x, profile, n_bound) in lattice_strategy()) {
        let lat = build_lattice(&x, &profile, n_bound).unwrap();
        let minima = successive_minima(&lat, Budget::default()).unwrap();
        prop_assert_eq!(minima.lambda_sq.len(), lat.n() + 1);
        prop_assert!(minima.lambda_sq.windows(2).all(|w| w[0] <= w[1]));
        for (w, &l2) in minima.witnesses.iter().zip(&minima.lambda_sq) {
            prop_assert!(lat.contains(w));
            prop_assert_eq!(norm_sq(w), l2);
        }
        prop_assert_eq!(rank(&minima.witnesses), lat.n() + 1);
        prop_assert!(minima.lambda_sq[0] >= 1);
        let pts = lat.enumerate_points(minima.lambda_sq[0], Budget::default()).unwrap();
        prop_assert!(pts.iter().filter(|v| v.iter().any(|&c| c != 0)).all(|v| norm_sq(v) >= minima.lambda_sq[0]));
        let geom = verify_geometry(&lat, &minima, 4 * minima.lambda_sq[0], Budget::default()).unwrap();
        prop_assert!(geom.all_ok());
    }

    #[test]
    fn minima_ignore_coordinate_order(
        p in prop::sample::select(vec![2u64, 3]),
        t1 in 1u32..=9,
        t2 in 1u32..=9,
        seed in any::<u64>(),
    ) {
        let p = pr(p);
        let x = point(p, 2, seed);
        let x1 = x[0].truncate(t1).unwrap();
        let x2 = x[1].truncate(t2).unwrap();
        let a = ApproxLattice::from_parts(p, vec![t1, t2], vec![x1, x2]).unwrap();
        let b = ApproxLattice::from_parts(p, vec![t2, t1], vec![x2, x1]).unwrap();
        let ma = successive_minima(&a, Budget::default()).unwrap();
        let mb = successive_minima(&b, Budget::default()).unwrap();
        prop_assert_eq!(ma.lambda_sq, mb.lambda_sq);
    }
}

#[test]
fn enumeration_matches_box_scan() {
    let p = pr(3);
    let x = point(p, 2, 5);
    let profile = ApproxProfile::power_law(vec![hundredths(130), hundredths(120)]).unwrap();
    let lat = build_lattice(&x, &profile, 40).unwrap();
    let r2: u128 = 900;
    let mut expected = Vec::new();
    for a in -30i64..=30 {
        for b in -30i64..=30 {
            for c in -30i64..=30 {
                let v = vec![a, b, c];
                if norm_sq(&v) <= r2 && lat.contains(&v) {
                    expected.push(v);
                }
            }
        }
    }
    expected.sort();
    assert_eq!(lat.enumerate_points(r2, Budget::default()).unwrap(), expected);
}
