//! Exact algebra of rotationally invariant states of spin pairs.
//!
//! - [`angular`]: Clebsch-Gordan, 3-j, 6-j and Racah W coefficients in exact arithmetic.
//! - [`bipartite`]: Werner-like and isotropic-like states of one pair, the X matrix and PPT.
//! - [`multipartite`]: products of `K` pairs, σ-PPT masks and classification.
//! - [`numlab`]: floating-point Wigner D-matrices and a Monte-Carlo twirl.
//! - [`cli`]: the `rotsym` command line.

pub mod angular;
pub mod bipartite;
pub mod cli;
pub mod exact;
pub mod half;
pub mod multipartite;
pub mod numlab;
