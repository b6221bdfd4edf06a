//! Tensor absolute value equations `A x^{p-1} + B|x|^{q-1} = b`.
//!
//! * [`tensor`]: dense tensors, contractions, symmetrization, the Shao product
//! * [`solver`]: the generalized Newton iteration
//! * [`analysis`]: existence checks, solution bounds, structure falsifiers
//! * [`campaign`]: seeded benchmark campaigns on planted instances

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod campaign;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod solver;
pub mod tensor;
pub mod vector;

pub use error::{Error, Result};
pub use exec::Execution;
pub use solver::{solve, SolveReport, SolveStatus, SolverConfig, TaveProblem};
pub use tensor::DenseTensor;
pub use vector::{Matrix, Vector};
