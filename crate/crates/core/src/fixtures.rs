//! Bundled reference models.

use crate::exact_num::{rat, rint};
use crate::fk_model::FiniteFKModel;

pub const REF2_JSON: &str = include_str!("../fixtures/ref2.json");
pub const REF2B_JSON: &str = include_str!("../fixtures/ref2b.json");

/// Two states per level, uniform start and kernels, G = (1, 1/2), horizon 3.
pub fn ref2() -> FiniteFKModel {
    FiniteFKModel::from_json_str(REF2_JSON).expect("bundled REF2 is valid")
}

/// Heterogeneous level sizes (2, 3, 2, 3) with non-uniform data.
pub fn ref2b() -> FiniteFKModel {
    FiniteFKModel::from_json_str(REF2B_JSON).expect("bundled REF2b is valid")
}

/// REF2 with a sticky kernel, so the flow does not collapse to uniform.
pub fn ref2_sticky(horizon: usize) -> FiniteFKModel {
    let k = vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 3), rat(2, 3)]];
    FiniteFKModel::homogeneous(vec![rat(1, 2), rat(1, 2)], k, vec![rint(1), rat(1, 2)], horizon)
        .expect("valid model")
}

/// REF2 data with G = 1, where every unnormalized quantity is a probability.
pub fn ref2_flat(horizon: usize) -> FiniteFKModel {
    let k = vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]];
    FiniteFKModel::homogeneous(vec![rat(1, 2), rat(1, 2)], k, vec![rint(1), rint(1)], horizon)
        .expect("valid model")
}

pub fn by_name(name: &str) -> Option<FiniteFKModel> {
    match name.to_ascii_lowercase().as_str() {
        "ref2" => Some(ref2()),
        "ref2b" => Some(ref2b()),
        _ => None,
    }
}
