//! Discrete realizations of the classical operators: maximal functions, the
//! Hardy operator, truncated Calderon-Zygmund convolutions, rough-kernel
//! singular integrals, the Marcinkiewicz integral, the Riesz potential,
//! Bochner-Riesz means and their maximal operator, the Littlewood-Paley `g`
//! function, and the intrinsic square function.
//!
//! Every supremum in the continuous definitions (over radii, dilations `R`,
//! or bump dictionaries) is taken over a finite ladder, so the discrete
//! operators are documented lower bounds that are monotone in the ladder.
//! Principal values use symmetric `eps`-truncation, which preserves the
//! odd-kernel cancellation on the symmetric grid.

mod maximal;
mod potential;
mod singular;
mod spectral;
mod square;

pub use maximal::{hardy_op, maximal_centered, maximal_uncentered};
pub use potential::riesz_potential;
pub use singular::{cz_apply, marcinkiewicz, rough_singular, CzKernel, SphereFunction};
pub use spectral::{bochner_riesz, bochner_riesz_maximal, MultiplierSpec};
pub use square::{
    convolve_scaled_profile, default_g_profile, dyadic_levels, g_function, intrinsic_square,
    BumpDictionary, ConeDiscretization,
};
