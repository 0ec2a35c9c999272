//! Numerical laboratory for dissipative solutions of the isentropic Euler
//! equations: finite-volume ensembles, energy defects and Reynolds stresses,
//! weak-form certificates, trajectory algebra and energy-based selection.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dissipative;
pub mod eos;
pub mod fields;
pub mod io;
pub mod selection;
pub mod solver;
pub mod trajectory;
