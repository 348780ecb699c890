mod common;

use common::*;
use fklab::exact_num::{rat, rint, Rational};
use fklab::fk_model::*;
use fklab::particle_engine::{occupation_tensor, OccupationMode};
use num_traits::Zero;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_semigroup_steps(model in small_model(3, 4), seed in 0u64..1000) {
        let n = model.horizon();
        let flow = model.flow_gamma(n).unwrap();
        for k in 1..=n {
            let f: Vec<Rational> = (0..model.size(k)).map(|x| rat(((x as u64 * 7 + seed) % 5) as i64 - 2, 1)).collect();
            let qf = mat_vec(&model.q_matrix(k), &f);
            prop_assert_eq!(dot(&flow.gammas[k], &f), dot(&flow.gammas[k - 1], &qf));
        }
    }

    #[test]
    fn eta_flow_is_normalized(model in small_model(3, 4)) {
        for eta in model.flow_eta(model.horizon()).unwrap() {
            prop_assert_eq!(eta.iter().sum::<Rational>(), rint(1));
        }
    }

    #[test]
    fn absorbed_chain_matches_flow(model in small_model(3, 4)) {
        let n = model.horizon();
        let flow = model.flow_gamma(n).unwrap();
        prop_assert_eq!(model.absorbed_gamma(n).unwrap(), flow.gammas[n].clone());
    }

    #[test]
    fn semigroup_composes(model in small_model(3, 4)) {
        let n = model.horizon();
        for p in 0..=n {
            for m in p..=n {
                let left = mat_mul(&model.semigroup(p, m).unwrap(), &model.semigroup(m, n).unwrap());
                prop_assert_eq!(left, model.semigroup(p, n).unwrap());
            }
        }
    }

    #[test]
    fn kernel_push_pull_adjoint(
        (m, f, k) in (1usize..=3, 1usize..=3, 1usize..=3).prop_flat_map(|(d, e, c)| {
            let space = ProductSpace::from_dims(&[d, c]);
            let target = ProductSpace::from_dims(&[e, c]);
            (
                function_on(space).prop_map(|f| ProductMeasure { space: f.space.clone(), atoms: f.values.clone() }),
                function_on(target),
                prop::collection::vec(prob_vector(e), d),
            )
        })
    ) {
        // (m K)(F) = m(K F) on the first coordinate
        let pushed = m.push_kernel(0, &k).unwrap();
        let pulled = f.pull_kernel(0, &k).unwrap();
        prop_assert_eq!(pushed.integrate(&f).unwrap(), m.integrate(&pulled).unwrap());
    }

    #[test]
    fn tensor_bridge_total_variation(nn in 1usize..=6, q in 1usize..=3) {
        prop_assume!(q <= nn);
        let x: Vec<usize> = (0..nn).collect();
        let t = occupation_tensor(&x, nn, q, OccupationMode::Tensor).unwrap();
        let i = occupation_tensor(&x, nn, q, OccupationMode::Injective).unwrap();
        let tv = t.sub(&i).unwrap().tv_norm() * rint(nn as i64);
        let nq = num_bigint::BigInt::from(nn).pow(q as u32);
        let want = Rational::new(2 * (&nq - fklab::exact_num::falling_factorial(nn as u64, q as u64)), num_bigint::BigInt::from(nn).pow(q as u32 - 1));
        prop_assert_eq!(tv, want);
    }

    #[test]
    fn symmetrize_is_idempotent_and_mass_preserving(f in function_on(ProductSpace::power(0, 3, 3))) {
        let s = f.symmetrize().unwrap();
        prop_assert!(s.is_block_symmetric());
        prop_assert_eq!(s.symmetrize().unwrap().values, s.values.clone());
        let total = |g: &TensorFunction| g.values.iter().sum::<Rational>();
        prop_assert_eq!(total(&s), total(&f));
    }
}

#[test]
fn zero_potential_rejected() {
    let bad = r#"{"levels":[2],"eta0":["1/2","1/2"],"kernels":[],"potentials":[["0/1","1"]]}"#;
    assert!(FiniteFKModel::from_json_str(bad).is_err());
}

#[test]
fn json_round_trip() {
    let m = fklab::fixtures::ref2b();
    assert_eq!(FiniteFKModel::from_json_str(&m.to_json_string()).unwrap(), m);
    assert!(Rational::zero() < m.potential(0)[0]);
}
