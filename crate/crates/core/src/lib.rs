//! Least-squares condition numbers for underdetermined constant-rank systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense matrices and tensors, SVD, pseudoinverse, unfoldings,
//!   multilinear products and seeded random generators.
//! - [`fcre`]: the generic engine `‖(∂F/∂y)† ∂F/∂x‖` for systems given by
//!   their Jacobian blocks in orthonormal coordinates, plus finite differences.
//! - [`two_factor`]: closed form and Jacobian oracle for `X = LR`.
//! - [`tucker`]: orthogonal Tucker decompositions, ST-HOSVD, closed-form
//!   condition numbers and the tangent-basis Jacobian oracle.
//! - [`distance`]: Riemannian gradient descent over products of orthogonal
//!   groups for the fiber-aligned distance between two decompositions.
//! - [`experiment`]: the seeded Monte-Carlo perturbation pipeline.
//! - [`verify`]: closed-form versus oracle cross-check suites.

pub mod distance;
pub mod error;
pub mod experiment;
pub mod fcre;
pub mod io;
pub mod linalg;
pub mod tucker;
pub mod two_factor;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseTensor, RankPolicy, SvdResult};
