mod common;

use common::*;
use fklab::fk_model::{ProductSpace, TensorFunction};
use fklab::particle_engine::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabeling_particles_changes_nothing(model in small_model(3, 3), nn in 1usize..=8, seed in any::<u64>(), shuffle_seed in any::<u64>()) {
        let n = model.horizon();
        let traj = simulate(&model, nn, n, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed);
        let mut shuffled = traj.clone();
        for level in shuffled.states.iter_mut() {
            level.shuffle(&mut rng);
        }
        for k in 0..=n {
            prop_assert_eq!(traj.counts(k, model.size(k)), shuffled.counts(k, model.size(k)));
            for q in 1..=2usize.min(nn) {
                for mode in [OccupationMode::Tensor, OccupationMode::Injective] {
                    prop_assert_eq!(
                        occupation_tensor(&traj.states[k], model.size(k), q, mode).unwrap(),
                        occupation_tensor(&shuffled.states[k], model.size(k), q, mode).unwrap()
                    );
                }
            }
        }
        prop_assert_eq!(traj.empirical(&model), shuffled.empirical(&model));
    }

    #[test]
    fn tensor_occupation_sees_only_the_symmetric_part(
        (x, f) in (1usize..=3, 1usize..=3).prop_flat_map(|(size, q)| {
            (prop::collection::vec(0..size, 1..=6), function_on(ProductSpace::power(0, size, q)))
        })
    ) {
        let size = f.space.dims()[0];
        let q = f.space.ncoords();
        let m = occupation_tensor(&x, size, q, OccupationMode::Tensor).unwrap();
        prop_assert_eq!(m.integrate(&f).unwrap(), m.integrate(&f.symmetrize().unwrap()).unwrap());
    }

    #[test]
    fn simulation_is_reproducible(model in small_model(3, 3), nn in 1usize..=6, seed in any::<u64>(), run in 0u64..4) {
        let a = simulate_run(&model, nn, model.horizon(), seed, run).unwrap();
        let b = simulate_run(&model, nn, model.horizon(), seed, run).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn u_statistic_of_constant_kernel_is_constant() {
    let model = fklab::fixtures::ref2b();
    let traj = simulate(&model, 6, 2, 11).unwrap();
    let ones = TensorFunction::constant(ProductSpace::power(2, model.size(2), 3), fklab::exact_num::rint(1)).unwrap();
    let v = u_statistic(&traj, 2, 3, &UKernel::Dense(ones.marked_symmetric().unwrap())).unwrap();
    assert!((v - 1.0).abs() < 1e-12, "{v}");
}

#[test]
fn u_statistic_matches_injective_occupation() {
    let model = fklab::fixtures::ref2b();
    let traj = simulate(&model, 5, 1, 3).unwrap();
    let f = vec![fklab::exact_num::rat(1, 2), fklab::exact_num::rint(-1), fklab::exact_num::rint(2)];
    let dense = TensorFunction::product(1, &vec![f.clone(); 3]).unwrap().marked_symmetric().unwrap();
    let exact = occupation_tensor(&traj.states[1], 3, 3, OccupationMode::Injective).unwrap().integrate(&dense).unwrap();
    let v = u_statistic(&traj, 1, 3, &UKernel::SymProduct(vec![to_f64(&f); 3])).unwrap();
    assert!((v - fklab::exact_num::rational_to_f64(&exact)).abs() < 1e-12);
}

#[test]
fn zero_particles_rejected() {
    assert!(simulate(&fklab::fixtures::ref2(), 0, 1, 0).is_err());
}
