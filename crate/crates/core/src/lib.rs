//! Solvers for the generalized fused lasso.
//!
//! The objective is
//!
//! ```text
//! g(β) = ½‖y − Xβ‖² + λ₁ Σ_k w_k |β_k| + λ₂ Σ_{(k,l) ∈ E} w_kl |β_k − β_l|
//! ```
//!
//! over an arbitrary weighted undirected graph `E`, with logistic and Cox
//! losses handled by iteratively reweighted least squares.
//!
//! Three solvers share the same coordinate-descent core:
//!
//! * [`coordinate::naive_cd`] cycles exact one-dimensional minimizations and
//!   can stall at coordinate-wise minima that are not global.
//! * [`fusion::solve_exact`] fuses equal-valued neighbours and splits fused
//!   groups using max-flow residual reachability; it reaches the global
//!   optimum.
//! * [`huber::solve_huber`] replaces the max-flow splits by sweeps over a
//!   Huber-smoothed objective; fast, approximate.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coordinate;
mod error;
pub mod flow;
pub mod fusion;
pub mod glm;
pub mod huber;
mod linalg;
mod matrix;
pub mod model;
pub mod path;
pub mod simgen;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{
    loss_gradient_smooth_part, loss_value, CoxData, FusedProblem, LeastSquares, Loss,
    OptimalityCertificate, PenaltyGraph, Response, Solution,
};
pub use solver::{solve, SolverConfig, SolverKind};
