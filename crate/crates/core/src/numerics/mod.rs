//! Shared numeric and combinatorial kernels: dense linear solving,
//! eigenvalue estimation, max-flow/min-cut, a small dense linear program,
//! union-find and the deterministic PRNG.
//!
//! Everything here is dense and desk-scale by design; exact analyses in the
//! rest of the crate cap out around a couple thousand nodes.

mod lp;
mod matrix;
mod maxflow;
mod pcg;
mod unionfind;

pub use lp::{lp_solve, Constraint, ConstraintOp, LinearProgram, LpOutcome, LpSense};
pub use matrix::{
    eigen_symmetric, eigenvalues_symmetric, solve_spd, spd_inverse_diagonal, spectral_radius,
    Matrix,
};
pub use maxflow::{edge_connectivity, max_flow_unit};
pub use pcg::Pcg32;
pub use unionfind::UnionFind;
