//! Canonical momentum P = mv + ∂L_int/∂v, computed two ways: by numeric
//! differentiation of the interaction Lagrangian and in closed form.

use num_complex::Complex64;

use super::{ParticleSpecies, PhaseError};
use crate::constants::C2;
use crate::fields::{rest_frame_b, rest_frame_e, FieldConfiguration};
use crate::Vec3;

type CVec = [Complex64; 3];

fn cross(a: &CVec, b: &Vec3) -> CVec {
    [
        a[1] * b.z - a[2] * b.y,
        a[2] * b.x - a[0] * b.z,
        a[0] * b.y - a[1] * b.x,
    ]
}

/// L_int = (κ/2)|B_rest|² + (χ/2)|E_rest|² + d₀·E_rest + μ₀·B_rest, analytically
/// continued to complex velocity (plain bilinear products, no conjugation).
fn lagrangian_complex(species: &ParticleSpecies, e: &Vec3, b: &Vec3, v: &CVec) -> Complex64 {
    let vxe = cross(v, e);
    let vxb = cross(v, b);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        let b_rest = b[i] - vxe[i] / C2;
        let e_rest = e[i] + vxb[i];
        total += b_rest * b_rest * (0.5 * species.kappa)
            + e_rest * e_rest * (0.5 * species.chi)
            + e_rest * species.d0[i]
            + b_rest * species.mu0[i];
    }
    total
}

/// Interaction Lagrangian at a real velocity, J.
pub fn interaction_lagrangian(species: &ParticleSpecies, e: &Vec3, b: &Vec3, v: &Vec3) -> f64 {
    let b_rest = rest_frame_b(e, b, v);
    let e_rest = rest_frame_e(e, b, v);
    0.5 * species.kappa * b_rest.norm_squared()
        + 0.5 * species.chi * e_rest.norm_squared()
        + species.d0.dot(&e_rest)
        + species.mu0.dot(&b_rest)
}

/// Complex-step width, m/s. The step never enters a subtraction, so it can
/// be far below the rounding scale of v.
const COMPLEX_STEP: f64 = 1e-20;

/// P = mv + ∂L_int/∂v by complex-step differentiation of L_int. Exact to
/// rounding for the quadratic Lagrangian; unlike a real central difference
/// it resolves the κ/c² term next to O(1) contributions.
pub fn canonical_momentum_oracle(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    r: &Vec3,
    v: &Vec3,
) -> Result<Vec3, PhaseError> {
    let (e, b) = config.eval_eb(r)?;
    let mut grad = Vec3::zeros();
    for k in 0..3 {
        let mut vc: CVec = [v.x.into(), v.y.into(), v.z.into()];
        vc[k].im = COMPLEX_STEP;
        grad[k] = lagrangian_complex(species, &e, &b, &vc).im / COMPLEX_STEP;
    }
    Ok(v * species.mass + grad)
}

/// Closed form: P − mv = (κ/c²)(B_rest×E) + χ(B×E_rest) + B×d₀ + (μ₀×E)/c².
pub fn canonical_momentum_closed_form(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    r: &Vec3,
    v: &Vec3,
) -> Result<Vec3, PhaseError> {
    let (e, b) = config.eval_eb(r)?;
    let b_rest = rest_frame_b(&e, &b, v);
    let e_rest = rest_frame_e(&e, &b, v);
    Ok(v * species.mass
        + b_rest.cross(&e) * (species.kappa / C2)
        + b.cross(&e_rest) * species.chi
        + b.cross(&species.d0)
        + species.mu0.cross(&e) / C2)
}
