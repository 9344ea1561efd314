//! Zero-sum solvers and certificate checkers over finite abelian groups.

pub mod bitset;
pub mod conjecture;
pub mod davenport;
pub mod error;
pub mod group;
pub mod selftest;
pub mod weighted;
pub mod zerosum;

pub use error::{Error, Result};
pub use group::{rho, AbelianGroup, Element};
