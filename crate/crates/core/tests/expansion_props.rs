mod common;

use common::*;
use fklab::exact_num::{pow_rat, rat, rint, Rational};
use fklab::expansion::*;
use fklab::fk_model::{ProductSpace, TensorFunction};
use fklab::oracle::{brute_a_sum, dp_expected, DpTarget};
use num_traits::Zero;
use proptest::prelude::*;

fn series(values: &[Rational], nn: usize) -> Rational {
    let inv = rat(1, nn as i64);
    values.iter().enumerate().map(|(k, v)| v * pow_rat(&inv, k as i64)).sum()
}

/// A model, a time, a block size and a symmetric function on E_n^q.
fn setup(max_q: usize) -> impl Strategy<Value = (fklab::FiniteFKModel, usize, usize, TensorFunction)> {
    (small_model(2, 2), 1..=max_q).prop_flat_map(|(model, q)| {
        let h = model.horizon();
        (Just(model), 0..=h, Just(q)).prop_flat_map(|(model, n, q)| {
            let space = ProductSpace::power(n, model.size(n), q);
            (Just(model), Just(n), Just(q), function_on(space).prop_map(|f| f.symmetrize().unwrap()))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn laurent_polynomial_reconstructs_exact_moments((model, n, q, f) in setup(3)) {
        let values = laurent_table(&model, n, q, &f).unwrap();
        for nn in q..=q + 4 {
            prop_assert_eq!(series(&values, nn), q_exact(&model, nn, n, q, &f).unwrap());
        }
    }

    #[test]
    fn three_way_oracle_triangle((model, n, q, f) in setup(2)) {
        for nn in q.max(1)..=3 {
            let exact = q_exact(&model, nn, n, q, &f).unwrap();
            prop_assert_eq!(&brute_a_sum(&model, nn, n, q, &f).unwrap(), &exact);
            prop_assert_eq!(&dp_expected(&model, nn, DpTarget::Q { n, f: &f }).unwrap(), &exact);
        }
    }

    #[test]
    fn injective_moments_follow_the_linear_semigroup((model, n, q, f) in setup(2)) {
        prop_assume!(n >= 1);
        let pulled = model.tensor_kernel_apply(n, q, &f).unwrap();
        for nn in q..=q + 2 {
            let lhs = dp_expected(&model, nn, DpTarget::GammaInjective { n, f: &f }).unwrap();
            prop_assert_eq!(lhs, q_exact(&model, nn, n - 1, q, &pulled).unwrap());
        }
    }

    #[test]
    fn laurent_measures_match_values((model, n, q, f) in setup(2)) {
        let table = laurent_measures(&model, n, q).unwrap();
        prop_assert_eq!(table.evaluate(&f).unwrap(), laurent_table(&model, n, q, &f).unwrap());
    }
}

#[test]
fn unit_potentials_conserve_mass() {
    let model = fklab::fixtures::ref2_flat(3);
    for q in 1..=3 {
        for n in 0..=2 {
            let one = TensorFunction::constant(ProductSpace::power(n, 2, q), rint(1)).unwrap().marked_symmetric().unwrap();
            let values = laurent_table(&model, n, q, &one).unwrap();
            assert_eq!(values[0], rint(1));
            assert!(values[1..].iter().all(Zero::is_zero), "q={q} n={n}");
        }
    }
}

#[test]
fn variance_law_at_time_zero() {
    // E(eta_0^N f)^2 = eta_0(f^2)/N for centred f
    let model = fklab::fixtures::ref2();
    let f = TensorFunction::product(0, &vec![vec![rint(1), rint(-1)]; 2]).unwrap().marked_symmetric().unwrap();
    assert_eq!(laurent_table(&model, 0, 2, &f).unwrap(), vec![rint(0), rint(1)]);
    for nn in 2..=6 {
        assert_eq!(q_exact(&model, nn, 0, 2, &f).unwrap(), rat(1, nn as i64));
    }
}

#[test]
fn total_variation_to_limit_shrinks() {
    let rows = tv_limit_check(&fklab::fixtures::ref2b(), 1, 2, &[4, 8, 16]).unwrap();
    assert!(rows.iter().all(|r| r.within_bound && !r.increased));
    assert!(rows.windows(2).all(|w| w[1].value < w[0].value));
}
