use fklab::exact_num::{rat, Rational};
use fklab::fk_model::{dot, TensorFunction};
use fklab::forest_core::Tree;
use fklab::path_expansion::*;
use fklab::FiniteFKModel;
use num_traits::Zero;
use proptest::prelude::*;

fn centered_path_function(model: &FiniteFKModel, q: &[usize], salt: i64) -> TensorFunction {
    let etas = model.flow_eta(q.len() - 1).unwrap();
    let mut out: Option<TensorFunction> = None;
    for (k, &qk) in q.iter().enumerate() {
        if qk == 0 {
            continue;
        }
        let raw: Vec<Rational> = (0..model.size(k)).map(|x| rat((x as i64 * 3 + salt + k as i64) % 5 - 1, 1)).collect();
        let mean = dot(&etas[k], &raw);
        let f: Vec<Rational> = raw.iter().map(|v| v - &mean).collect();
        let block = TensorFunction::product(k, &vec![f; qk]).unwrap();
        out = Some(match out {
            Some(acc) => acc.tensor(&block).unwrap(),
            None => block,
        });
    }
    out.unwrap().marked_symmetric().unwrap()
}

/// A chain of black vertices ending in a single white leaf.
fn is_trivial(t: &Tree) -> bool {
    t.is_white() || (t.children().len() == 1 && is_trivial(&t.children()[0]))
}

fn qseqs() -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for len in 1..=3 {
        for total in 1..=3 {
            out.extend(fklab::exact_num::compositions(total, len));
        }
    }
    out
}

#[test]
fn reconstruction_up_to_three_extra_particles() {
    let model = fklab::fixtures::ref2b();
    for q in qseqs() {
        let seq = QSeq::new(&q).unwrap();
        let sum = ColoredSum::new(&model, &seq, None).unwrap();
        let f = centered_path_function(&model, &q, 1).add(&centered_path_function(&model, &q, 4)).unwrap().marked_symmetric().unwrap();
        let values = sum.laurent_values(&f).unwrap();
        for nn in seq.total()..=seq.total() + 3 {
            let inv = rat(1, nn as i64);
            let series: Rational = values.iter().enumerate().map(|(k, v)| v * fklab::exact_num::pow_rat(&inv, k as i64)).sum();
            assert_eq!(series, qbar_exact(&model, nn, &seq, &f).unwrap(), "q={q:?} N={nn}");
        }
    }
}

#[test]
fn trivial_white_trees_kill_centred_functions() {
    let model = fklab::fixtures::ref2b();
    let mut checked = 0;
    for q in qseqs() {
        let seq = QSeq::new(&q).unwrap();
        let f = centered_path_function(&model, &q, 2);
        assert!(in_b0_path(&model, &seq, &f).unwrap());
        for forest in enumerate_colored_forests(&seq, None).unwrap() {
            if forest.trees().any(is_trivial) {
                checked += 1;
                assert!(delta_colored_forest(&model, &forest, &seq).unwrap().integrate(&f).unwrap().is_zero(), "{forest}");
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn wick_forests_give_the_top_derivative() {
    for model in [fklab::fixtures::ref2(), fklab::fixtures::ref2b()] {
        for q in qseqs() {
            let seq = QSeq::new(&q).unwrap();
            let f = centered_path_function(&model, &q, 3);
            let table = dqbar_table(&model, &seq, &f).unwrap();
            let half = seq.total() / 2;
            assert!(table.iter().take((seq.total() + 1) / 2).all(Zero::is_zero), "q={q:?}");
            if seq.total() % 2 == 0 {
                assert_eq!(dqbar_wick(&model, &seq, &f).unwrap(), table[half], "q={q:?}");
            }
        }
    }
}

#[test]
fn telescoping_holds_along_the_flow() {
    let model = fklab::fixtures::ref2b();
    let etas = model.flow_eta(model.horizon()).unwrap();
    let (lhs, rhs) = telescoping_identity(&model, &etas).unwrap();
    assert_eq!(lhs, rhs);
}

proptest! {
    #[test]
    fn geometric_decomposition(q in 1usize..=4, m in 0usize..=6, u in prop::sample::select(vec![rat(1, 2), rat(-1, 3), rat(2, 5)])) {
        let (lhs, rhs) = geometric_identity(q, m, &u).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn pair_derivative_routes_agree() {
    for model in [fklab::fixtures::ref2(), fklab::fixtures::ref2_sticky(2), fklab::fixtures::ref2b()] {
        for n in 0..=1 {
            let size = model.size(n + 1);
            let f = TensorFunction::from_fn(fklab::fk_model::ProductSpace::power(n + 1, size, 2), |x| rat((x[0] * x[1] + x[0] + x[1]) as i64 - 1, 2))
                .unwrap()
                .marked_symmetric()
                .unwrap();
            assert_eq!(explicit_dp1(&model, n, &f).unwrap(), p_derivatives(&model, 1, n, &f, PMode::Standard).unwrap());
        }
    }
}
