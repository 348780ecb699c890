use fklab::exact_num::MultiIndex;
use fklab::hilbert::*;
use num_bigint::BigInt;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coalescence_marginalizes_to_profiles(n in 0usize..=2, d in 1usize..=4) {
        prop_assert_eq!(coalescent_hilbert(n, d).unwrap().specialize_y(), forest_hilbert(n, d).unwrap());
    }

    #[test]
    fn total_cap_keeps_low_coefficients(n in 0usize..=2, d in 1usize..=4, cap in 1usize..=6) {
        let full = coalescent_hilbert(n, d).unwrap();
        let capped = coalescent_hilbert_capped(n, d, Some(cap)).unwrap();
        for (x, y, c) in full.terms() {
            if x.iter().sum::<usize>() <= cap {
                prop_assert_eq!(&capped.coeff(x, y), c);
            }
        }
        prop_assert!(capped.terms().all(|(x, _, _)| x.iter().sum::<usize>() <= cap));
    }
}

#[test]
fn recursion_matches_series_coefficients() {
    let h = forest_hilbert(3, 4).unwrap();
    for (x, _, c) in h.terms() {
        let mut p = x.to_vec();
        while p.last() == Some(&0) {
            p.pop();
        }
        if p.is_empty() || p.contains(&0) {
            continue;
        }
        assert_eq!(&forest_count(&MultiIndex(p.clone())).unwrap(), c, "{p:?}");
    }
}

#[test]
fn small_coefficients() {
    let h1 = forest_hilbert(1, 4).unwrap();
    assert_eq!(h1.coeff(&[2, 2], &[]), BigInt::from(2));
    let h2 = forest_hilbert(2, 3).unwrap();
    assert_eq!(h2.coeff(&[1, 1, 1], &[]), BigInt::from(1));
    let c1 = coalescent_hilbert(1, 4).unwrap();
    assert_eq!(c1.coeff(&[2, 2], &[0]), BigInt::from(1));
    assert_eq!(c1.coeff(&[2, 2], &[1]), BigInt::from(1));
    assert_eq!(c1.coeff(&[1, 2], &[1]), BigInt::from(1));
    assert!(forest_count(&MultiIndex(vec![1, 0, 2])).is_err());
}
