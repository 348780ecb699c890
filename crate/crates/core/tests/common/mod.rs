#![allow(dead_code)]

use fklab::exact_num::{rat, Rational};
use fklab::fk_model::{ProductSpace, TensorFunction};
use fklab::FiniteFKModel;
use proptest::prelude::*;

/// Random positive weights normalized to a probability vector.
pub fn prob_vector(size: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(1i64..6, size).prop_map(|w| {
        let total: i64 = w.iter().sum();
        w.into_iter().map(|x| rat(x, total)).collect()
    })
}

/// Small heterogeneous models with potentials in (0, 1].
pub fn small_model(max_size: usize, max_horizon: usize) -> impl Strategy<Value = FiniteFKModel> {
    (1..=max_horizon, prop::collection::vec(1..=max_size, max_horizon + 1)).prop_flat_map(|(h, sizes)| {
        let sizes: Vec<usize> = sizes[..=h].to_vec();
        let eta0 = prob_vector(sizes[0]);
        let kernels: Vec<_> = (1..=h)
            .map(|k| prop::collection::vec(prob_vector(sizes[k]), sizes[k - 1]))
            .collect();
        let pots: Vec<_> =
            sizes.iter().map(|&s| prop::collection::vec((1i64..=4).prop_map(|x| rat(x, 4)), s)).collect();
        (Just(sizes), eta0, kernels, pots)
            .prop_map(|(sizes, eta0, kernels, pots)| FiniteFKModel::new(sizes, eta0, kernels, pots).expect("valid model"))
    })
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| rat(a, b))
}

/// A random function on the given space.
pub fn function_on(space: ProductSpace) -> impl Strategy<Value = TensorFunction> {
    let card = space.cardinality().expect("small space");
    prop::collection::vec(small_rational(), card).prop_map(move |vals| {
        let idx = std::cell::Cell::new(0);
        TensorFunction::from_fn(space.clone(), |_| {
            let i = idx.get();
            idx.set(i + 1);
            vals[i].clone()
        })
        .expect("function")
    })
}
