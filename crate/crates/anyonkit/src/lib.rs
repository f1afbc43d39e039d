//! Quantum group Clebsch-Gordan coefficients, F and R symbols, and anyon
//! data for A1, A2, B2 and G2 at roots of unity.

pub mod cli;
pub mod collections;
pub mod error;
pub mod liealg;
pub mod linalg;
pub mod qarith;
pub mod repmod;
pub mod su2k;
pub mod symbols;
pub mod tensor;
pub mod theory;
pub mod tqft;

pub use error::{Error, Result};
pub use liealg::{AlgebraName, AlgebraSpec, Weight};
pub use qarith::{ComplexValue, QContext};
