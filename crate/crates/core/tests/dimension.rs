use num_bigint::BigInt;
use num_rational::BigRational;
use padic_approx::dim::{
    equal_weight_dimension, mtprr_dimension, mtprr_lower_bound, theorem2_dimension, v_vector, MtprrInput,
    WeightSplit,
};
use proptest::prelude::*;

fn thousandths(k: i64) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(1000))
}

/// Valid splits with `2 <= n <= 5` from integer thousandths.
fn split_strategy() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), 1..n))
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(1001i64..=3000, n - m),
                prop::collection::vec(1001i64..=1000 + 1000 / m as i64, m),
            )
        })
        .prop_filter("valid split", |(d, m)| {
            let split = WeightSplit::new(
                d.iter().map(|&k| thousandths(k)).collect(),
                m.iter().map(|&k| thousandths(k)).collect(),
            )
            .unwrap();
            split.is_valid() && v_vector(split.sorted_tau_d(), split.budget()).is_ok()
        })
}

fn rational_split(d: &[i64], m: &[i64]) -> WeightSplit<BigRational> {
    WeightSplit::new(d.iter().map(|&k| thousandths(k)).collect(), m.iter().map(|&k| thousandths(k)).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn formula_equals_mass_transference_exactly((d, m) in split_strategy()) {
        let split = rational_split(&d, &m);
        prop_assert_eq!(theorem2_dimension(&split).unwrap(), mtprr_dimension(&split).unwrap());
    }

    #[test]
    fn formula_equals_mass_transference_for_irrational_weights(
        (d, m) in split_strategy(),
        wiggle in prop::collection::vec(0.0f64..1e-4, 8),
    ) {
        // sqrt-perturbed weights are irrational; the perturbation keeps validity margins
        let d: Vec<f64> = d.iter().zip(&wiggle).map(|(&k, w)| k as f64 / 1000.0 + w * 2f64.sqrt()).collect();
        let m: Vec<f64> = m.iter().map(|&k| k as f64 / 1000.0).collect();
        let split = WeightSplit::new(d, m).unwrap();
        prop_assume!(split.is_valid() && v_vector(split.sorted_tau_d(), split.budget()).is_ok());
        let a = theorem2_dimension(&split).unwrap();
        let b = mtprr_dimension(&split).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn formula_ignores_order_of_free_weights((d, m) in split_strategy(), rot in 0usize..5) {
        let split = rational_split(&d, &m);
        let mut shuffled = d.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        let other = rational_split(&shuffled, &m);
        prop_assert_eq!(theorem2_dimension(&split).unwrap(), theorem2_dimension(&other).unwrap());
    }

    #[test]
    fn weights_split_the_budget_exactly((d, m) in split_strategy()) {
        let split = rational_split(&d, &m);
        let vv = v_vector(split.sorted_tau_d(), split.budget()).unwrap();
        let total: BigRational = vv.v.iter().sum();
        prop_assert_eq!(total, split.budget());
        for ((v, t), tau) in vv.v.iter().zip(&vv.t).zip(split.sorted_tau_d()) {
            prop_assert!(v <= tau);
            prop_assert_eq!(&(v + t), tau);
        }
    }

    #[test]
    fn argmin_survives_uniform_delta_scaling((d, m) in split_strategy(), c in 1i64..=50) {
        let split = rational_split(&d, &m);
        let vv = v_vector(split.sorted_tau_d(), split.budget()).unwrap();
        let dd = split.d();
        let unit = mtprr_lower_bound(&MtprrInput {
            a: vv.v.clone(),
            t: vv.t.clone(),
            delta: vec![BigRational::from_integer(1.into()); dd],
            k: BigRational::from_integer(0.into()),
        })
        .unwrap();
        let scale = BigRational::new(BigInt::from(c), BigInt::from(7));
        let scaled = mtprr_lower_bound(&MtprrInput {
            a: vv.v,
            t: vv.t,
            delta: vec![scale; dd],
            k: BigRational::from_integer(0.into()),
        })
        .unwrap();
        prop_assert_eq!(unit.argmin, scaled.argmin);
    }

    #[test]
    fn equal_weights_reduce_to_closed_form(n in 2usize..=6, m_frac in 0.0f64..1.0, k in 1i64..=999) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize % (n - 1);
        let tau = thousandths(1000 + k);
        let split = WeightSplit::new(vec![tau.clone(); n - m], vec![tau.clone(); m]).unwrap();
        prop_assume!(split.is_valid());
        prop_assert_eq!(theorem2_dimension(&split).unwrap(), equal_weight_dimension(n, m, tau));
    }
}

#[test]
fn equal_weight_example() {
    let tau = thousandths(1600);
    assert_eq!(equal_weight_dimension(2, 1, tau.clone()), thousandths(875));
    let split = WeightSplit::new(vec![tau.clone()], vec![tau]).unwrap();
    assert_eq!(theorem2_dimension(&split).unwrap(), thousandths(875));
    assert!((equal_weight_dimension(2, 1, 1.6f64) - 0.875).abs() < 1e-12);
}
