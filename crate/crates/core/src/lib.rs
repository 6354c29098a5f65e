pub mod cyclotomic;
pub mod error;
pub mod exact_linalg;
pub mod finite_heisenberg;
pub mod invariants;
pub mod numerics;
pub mod report;
pub mod schrodinger;
pub mod suite;

pub use error::{Error, Result};
