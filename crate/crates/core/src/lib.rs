//! Exact and Monte Carlo laboratory for Feynman-Kac interacting particle
//! systems: forest-indexed Laurent expansions of particle block laws,
//! their combinatorics, and brute-force oracles to check them.

pub mod error;
pub mod exact_num;
pub mod fixtures;
pub mod fk_model;
pub mod expansion;
pub mod forest_core;
pub mod hilbert;
pub mod oracle;
pub mod particle_engine;
pub mod path_expansion;
pub mod verify;

pub use error::{FkError, Result};
pub use exact_num::{MultiIndex, Rational};
pub use fk_model::{FiniteFKModel, ProductMeasure, ProductSpace, TensorFunction};
