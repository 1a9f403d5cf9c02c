//! Lattice rules: weights, CBC construction and shifted points.

mod cbc;
mod io;
mod normal;
mod points;
mod theta;
mod weights;

pub use normal::{inv_normal_cdf, normal_cdf};
pub use theta::{theta, theta_integral, Theta};
pub use weights::{eta, modified_b, optimal_alpha, varrho, WeightSetup, DEFAULT_KAPPA};
pub use cbc::{
    cbc_construct, cbc_construct_exhaustive, cbc_construct_traced, shift_averaged_wce, wce_direct,
    GeneratingVector, TIE_RTOL,
};
pub use io::{b_hash, GvFile};
pub use points::{lattice_point_into, lattice_points, to_gaussian, U_MIN};
