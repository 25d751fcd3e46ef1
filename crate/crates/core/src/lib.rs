//! Numerical engine for quaternionic proportional fractional Fueter-type
//! operators, with an executable verification harness for the integral
//! identities they satisfy (inversion, conjugation, Stokes, Borel-Pompeiu,
//! Cauchy and reduction formulas).

// Negated comparisons deliberately reject NaN; axis loops index parallel
// 4-arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod field4d;
pub mod frac1d;
pub mod frac_geom;
pub mod fueter;
pub mod geom;
pub mod quat;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use quat::{Quaternion, StructuralSet};
