//! Polynomial-extension finite elements (PE-FEM) for elliptic Neumann problems
//! on smooth curved domains discretized by straight-edged triangulations.
//!
//! The discrete operator is the usual conforming form on the polygonal domain
//! plus a boundary flux correction that extrapolates each boundary element's
//! polynomial gradient out to the closest point on the true boundary. The crate
//! also carries the verification machinery used to measure convergence rates:
//! manufactured solutions, truncated Taylor operators, error norms and
//! estimated orders of convergence.
//!
//! Everything here is `no_std` + `alloc`; file formats, timing and the command
//! line live in the companion `pefem` crate.
#![no_std]
#![allow(clippy::needless_range_loop)]
// negated comparisons are how NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `num_traits::Float` is needed without std; builds that pull in std resolve the methods inherently
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod fespace;
pub mod field;
pub mod geometry;
pub mod mesh;
pub mod point;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod taylor;

pub use error::{Error, ProjectionError, Result};
pub use point::Vec2;
