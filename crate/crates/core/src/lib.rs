//! Phase shifts of neutral particles carrying permanent and induced electric
//! and magnetic dipole moments on closed interferometer loops.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`]: analytic static field configurations, their effective gauge
//!   potentials and numeric differential operators.
//! * [`geometry`]: interferometer arms, loops, spanning surfaces and the
//!   adaptive quadrature used for every line, time and surface integral.
//! * [`phases`]: the phase terms themselves and their decomposition.
//! * [`analysis`]: force-free certification, enclosed-charge accounting,
//!   velocity scans and polarizability inference.
//! * [`scenario`]: the strict scenario-file schema and the CSV inputs used
//!   by the command-line front end.
//!
//! All quantities are SI.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod fields;
pub mod geometry;
pub mod phases;
pub mod report;
pub mod scenario;

/// Cartesian 3-vector. Units depend on context (m, m/s, V/m, T, ...).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Shorthand constructor for [`Vec3`].
#[inline]
pub fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}
