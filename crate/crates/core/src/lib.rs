//! Weighted amalgam spaces on sampled grids.
//!
//! The crate realizes the two-weight amalgam norm `(L^p_w, L^q_v)_t` and its
//! weak variant on functions sampled over a cube in dimension 1 or 2,
//! together with the surrounding machinery: Muckenhoupt weight diagnostics
//! (`A_p`, `A_1`, `A_{p,q}`, doubling, density), the classical operators of
//! real-variable harmonic analysis (maximal functions, Hardy operator,
//! truncated singular integrals, rough kernels, Marcinkiewicz integral,
//! Riesz potential, Bochner-Riesz means, Littlewood-Paley `g`, intrinsic
//! square function), and an empirical harness that measures operator-norm
//! ratios and their uniformity in the window radius `t`.
//!
//! Everything is deterministic: fixed-order reductions, seeded generators,
//! and no hidden global state.

pub mod error;
pub mod grid;
pub mod harness;
pub mod operators;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
