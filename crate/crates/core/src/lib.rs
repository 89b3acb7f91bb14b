//! Solutions of linear discrete delay systems
//!
//! ```text
//! x(k+1) = A x(k) + B_k x(k−m) + f(k),   x(k) = φ(k) for −m ≤ k ≤ 0,
//! ```
//!
//! with an invertible `A` and delay matrices `B_k` that may depend on `k` and need not
//! commute with `A`. The solution is represented through a delayed matrix exponential
//! built from the sequence `D_k = A^{−k−1} B_k A^{k−m}`, and every closed form is
//! cross-checked against direct stepping of the recursion.
//!
//! * [`system`]: data model and validation.
//! * [`delayed_exp`]: nested-sum layers `P(k, d)`, the delayed exponential and its
//!   binomial closed form for a constant sequence.
//! * [`fundamental`]: fundamental matrices `Φ` and `Φ_s`.
//! * [`solver`]: recursion oracle, representation formulas and trajectory comparison.
//! * [`check`], [`bench`], [`cli`]: the batch front end.

pub mod bench;
pub mod check;
pub mod cli;
pub mod csv_io;
pub mod delayed_exp;
pub mod error;
pub mod fundamental;
pub mod linalg;
pub mod random;
pub mod solver;
pub mod system;

pub use delayed_exp::{
    binomial, block_index, delayed_exp, delayed_exp_permutable, nested_sum_count, p_direct,
    p_table, PTable,
};
pub use error::{Error, Result};
pub use fundamental::{fundamental_phi, phi_oracle, transform_d, FundamentalMatrix};
pub use linalg::{Matrix, PowerCache, Vector};
pub use solver::{
    compare, from_z_trajectory, solve_homogeneous_rep, solve_nonhomogeneous_rep, solve_recursion,
    to_z_trajectory, ComparisonReport, Formula,
};
pub use system::{
    validate_system, DelaySystem, InitialFunction, MatrixFamily, MatrixSequence, RawSystem,
    Trajectory, ValidationOptions, VectorSequence,
};
