//! CODATA 2018 physical constants (SI). These are fixed; scenarios cannot
//! override them.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 299_792_458.0;
/// c², m²/s².
pub const C2: f64 = C * C;
/// Vacuum permittivity ε₀, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability μ₀, N/A².
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant ħ, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// 4πε₀, the factor linking a volume polarizability α (m³) to the
/// coupling χ = 4πε₀α (F·m²).
pub const FOUR_PI_EPSILON_0: f64 = 4.0 * PI * EPSILON_0;
