use super::{prepare, ParticleSpecies, PhaseError};
use crate::constants::{C2, FOUR_PI_EPSILON_0, HBAR};
use crate::fields::FieldConfiguration;
use crate::geometry::{InterferometerLoop, PathPoint, QuadratureResult, Tolerance};
use crate::Vec3;

/// ∮ kernel(E, B, v)·dr around the circuit.
pub(crate) fn circulation<K>(
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    kernel: K,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError>
where
    K: Fn(&Vec3, &Vec3, &PathPoint) -> Vec3,
{
    Ok(lp.line_integral(
        |pp| {
            let (e, b) = config.eval_eb(&pp.position)?;
            Ok(kernel(&e, &b, pp).dot(&pp.tangent))
        },
        tol,
    )?)
}

/// Arm difference of ∫ f(E, B) dt.
pub(crate) fn arm_difference<K>(
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    integrand: K,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError>
where
    K: Fn(&Vec3, &Vec3) -> f64,
{
    Ok(lp.time_integral(
        |pp| {
            let (e, b) = config.eval_eb(&pp.position)?;
            Ok(integrand(&e, &b))
        },
        tol,
    )?)
}

/// Induced magnetic dipole: spatial (κ/ħc²)∮[(B − v×E/c²)×E]·dr and
/// temporal (κ/2ħ)∮B² dt.
pub fn induced_magnetic_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<(QuadratureResult, QuadratureResult), PhaseError> {
    prepare(species, config, lp)?;
    if species.kappa == 0.0 {
        return Ok((QuadratureResult::ZERO, QuadratureResult::ZERO));
    }
    let spatial = circulation(config, lp, |e, b, pp| (b - pp.velocity.cross(e) / C2).cross(e), tol)?;
    let temporal = arm_difference(config, lp, |_, b| b.norm_squared(), tol)?;
    Ok((
        spatial.scaled(species.kappa / (HBAR * C2)),
        temporal.scaled(species.kappa / (2.0 * HBAR)),
    ))
}

/// Induced electric dipole: spatial (χ/ħ)∮[−(E + v×B)×B]·dr and temporal
/// (χ/2ħ)∮E² dt.
pub fn induced_electric_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<(QuadratureResult, QuadratureResult), PhaseError> {
    prepare(species, config, lp)?;
    if species.chi == 0.0 {
        return Ok((QuadratureResult::ZERO, QuadratureResult::ZERO));
    }
    let spatial = circulation(config, lp, |e, b, pp| -(e + pp.velocity.cross(b)).cross(b), tol)?;
    let temporal = arm_difference(config, lp, |e, _| e.norm_squared(), tol)?;
    Ok((
        spatial.scaled(species.chi / HBAR),
        temporal.scaled(species.chi / (2.0 * HBAR)),
    ))
}

/// Velocity-independent geometric phase (χ + κ/c²)/ħ ∮(B×E)·dr.
pub fn combined_geometric_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare(species, config, lp)?;
    let coupling = species.chi + species.kappa / C2;
    if coupling == 0.0 {
        return Ok(QuadratureResult::ZERO);
    }
    Ok(circulation(config, lp, |e, b, _| b.cross(e), tol)?.scaled(coupling / HBAR))
}

/// The mix term with the alternative coupling (χ − κ/c²)/ħ ∮(E×B)·dr,
/// reported next to the geometric phase for comparison only.
pub fn paper_eq16_variant(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare(species, config, lp)?;
    let coupling = species.chi - species.kappa / C2;
    if coupling == 0.0 {
        return Ok(QuadratureResult::ZERO);
    }
    Ok(circulation(config, lp, |e, b, _| e.cross(b), tol)?.scaled(coupling / HBAR))
}

/// Velocity-linear remainder of the two spatial induced phases:
/// (κ/ħc²)∮[−(v×E)/c²×E]·dr + (χ/ħ)∮[−(v×B)×B]·dr.
pub fn velocity_linear_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare(species, config, lp)?;
    if species.chi == 0.0 && species.kappa == 0.0 {
        return Ok(QuadratureResult::ZERO);
    }
    let magnetic = species.kappa / (HBAR * C2 * C2);
    let electric = species.chi / HBAR;
    circulation(
        config,
        lp,
        |e, b, pp| {
            let v = pp.velocity;
            -v.cross(e).cross(e) * magnetic - v.cross(b).cross(b) * electric
        },
        tol,
    )
}

/// Four permanent-dipole terms, rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermanentDipolePhases {
    /// (1/ħc²)∮(μ₀×E)·dr
    pub ac_e: QuadratureResult,
    /// Partner sourced by magnetic charge; identically zero.
    pub ac_b: QuadratureResult,
    /// (1/ħ)∮(B×d₀)·dr
    pub hmw_e: QuadratureResult,
    /// Partner sourced by magnetic current; identically zero.
    pub hmw_b: QuadratureResult,
}

/// Phases of the permanent dipoles d₀ and μ₀ (fixed lab-frame vectors).
/// Kernel signs follow from the terms d₀·E_rest + μ₀·B_rest of the
/// Lagrangian. The monopole-sourced partners vanish for every physical
/// configuration; the synthetic monopole field is rejected outright.
pub fn permanent_dipole_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<PermanentDipolePhases, PhaseError> {
    prepare(species, config, lp)?;
    let mu0 = species.mu0;
    let d0 = species.d0;
    let ac_e = if mu0 == Vec3::zeros() {
        QuadratureResult::ZERO
    } else {
        circulation(config, lp, |e, _, _| mu0.cross(e), tol)?.scaled(1.0 / (HBAR * C2))
    };
    let hmw_e = if d0 == Vec3::zeros() {
        QuadratureResult::ZERO
    } else {
        circulation(config, lp, |_, b, _| b.cross(&d0), tol)?.scaled(1.0 / HBAR)
    };
    Ok(PermanentDipolePhases {
        ac_e,
        ac_b: QuadratureResult::ZERO,
        hmw_e,
        hmw_b: QuadratureResult::ZERO,
    })
}

/// (1/ħ)∮(d×B)·dr with d = 4πε₀αE evaluated along the path.
pub fn lepoutre_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare(species, config, lp)?;
    if species.alpha_vol == 0.0 {
        return Ok(QuadratureResult::ZERO);
    }
    let scale = FOUR_PI_EPSILON_0 * species.alpha_vol;
    Ok(circulation(config, lp, |e, b, _| (e * scale).cross(b), tol)?.scaled(1.0 / HBAR))
}

/// Spatial induced phases with the velocity argument set to zero:
/// (magnetic, electric). Their sum is the geometric phase.
pub fn static_spatial_phases(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<(QuadratureResult, QuadratureResult), PhaseError> {
    prepare(species, config, lp)?;
    let magnetic = if species.kappa == 0.0 {
        QuadratureResult::ZERO
    } else {
        circulation(config, lp, |e, b, _| b.cross(e), tol)?.scaled(species.kappa / (HBAR * C2))
    };
    let electric = if species.chi == 0.0 {
        QuadratureResult::ZERO
    } else {
        circulation(config, lp, |e, b, _| -e.cross(b), tol)?.scaled(species.chi / HBAR)
    };
    Ok((magnetic, electric))
}
