//! One-arm dynamical phases: the Stark phase of a polarizable particle and
//! its reinterpretation as a moving magnetic dipole.

use super::{reject_synthetic, ParticleSpecies, PhaseError};
use crate::constants::{C2, FOUR_PI_EPSILON_0, HBAR};
use crate::fields::FieldConfiguration;
use crate::geometry::{
    arm_line_integral, arm_time_integral, min_distance_to_locus, Arm, ArmClock, GeometryError, QuadratureResult,
    SpeedProfile, Tolerance, V_MIN,
};

/// The factor f in μ′ = f·μ used by the dual picture.
pub const DEFAULT_MU_PRIME_FACTOR: f64 = 0.5;

fn prepare_arm(species: &ParticleSpecies, config: &FieldConfiguration, arm: &Arm) -> Result<(), PhaseError> {
    species.validate()?;
    reject_synthetic(config)?;
    for locus in config.singular_loci() {
        let distance = min_distance_to_locus(arm, &locus);
        if !(distance >= locus.radius()) {
            return Err(GeometryError::SingularPathPoint {
                arm: "scan",
                distance,
                radius: locus.radius(),
            }
            .into());
        }
    }
    Ok(())
}

/// (2πε₀α/ħ)∫ E²/v ds along a single arm.
pub fn stark_scan_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    arm: &Arm,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare_arm(species, config, arm)?;
    if species.alpha_vol == 0.0 {
        return Ok(QuadratureResult::ZERO);
    }
    let r = arm_line_integral(
        arm,
        |pp| Ok(config.eval_e(&pp.position)?.norm_squared() / pp.speed),
        tol,
    )?;
    Ok(r.scaled(0.5 * FOUR_PI_EPSILON_0 * species.alpha_vol / HBAR))
}

/// (1/ħ)∫(−U) dt with U = −2πε₀αE², integrated in the time variable
/// itself through the arm's transit-time map.
pub fn stark_time_route(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    arm: &Arm,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare_arm(species, config, arm)?;
    if species.alpha_vol == 0.0 {
        return Ok(QuadratureResult::ZERO);
    }
    let coefficient = 0.5 * FOUR_PI_EPSILON_0 * species.alpha_vol;
    let r = ArmClock::new(arm).integrate_in_time(
        |pp| {
            let u = -coefficient * config.eval_e(&pp.position)?.norm_squared();
            Ok(-u)
        },
        tol,
    )?;
    Ok(r.scaled(1.0 / HBAR))
}

/// How the magnetic-picture phase depends on the factor f in μ′ = f·μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualitySensitivity {
    /// ∂φ_magnetic/∂f (the magnetic form is linear in f), rad.
    pub d_phase_d_factor: f64,
    /// The f at which both pictures agree.
    pub matching_factor: f64,
    /// (φ_electric − φ_magnetic)/|φ_electric| at f = ¼, ½, 1.
    pub relative_residuals: [(f64, f64); 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    /// (2πε₀α/ħ)∫|E⊥|² dt, E⊥ the field component transverse to v.
    pub phi_electric_form: QuadratureResult,
    /// (1/ħ)∫μ′·B′ dt.
    pub phi_magnetic_form: QuadratureResult,
    pub residual: f64,
    pub mu_prime_factor: f64,
    pub sensitivity: DualitySensitivity,
}

/// Compares the Stark phase with its magnetic-dipole reading. The induced
/// dipole d′ = 2πε₀αE⊥ is written as d′ = μ′×v/c² with
/// μ′ = f·4πε₀α·c²(v×E)/v², and B′ = v×E/c² is the rest-frame field.
pub fn duality_check(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    arm: &Arm,
    v_profile: &SpeedProfile,
    mu_prime_factor: f64,
    tol: Tolerance,
) -> Result<DualityReport, PhaseError> {
    let slowest = v_profile.min_speed();
    if !(slowest >= V_MIN) {
        return Err(PhaseError::DegenerateVelocity {
            speed: slowest,
            minimum: V_MIN,
        });
    }
    let arm = arm.with_speed(v_profile.clone())?;
    prepare_arm(species, config, &arm)?;
    let alpha = species.alpha_vol;
    if alpha == 0.0 {
        let zero = QuadratureResult::ZERO;
        return Ok(DualityReport {
            phi_electric_form: zero,
            phi_magnetic_form: zero,
            residual: 0.0,
            mu_prime_factor,
            sensitivity: DualitySensitivity {
                d_phase_d_factor: 0.0,
                matching_factor: DEFAULT_MU_PRIME_FACTOR,
                relative_residuals: [(0.25, 0.0), (0.5, 0.0), (1.0, 0.0)],
            },
        });
    }

    let electric = arm_time_integral(
        &arm,
        |pp| {
            let e = config.eval_e(&pp.position)?;
            let along = pp.velocity / pp.speed;
            let transverse = e - along * e.dot(&along);
            Ok(transverse.norm_squared())
        },
        tol,
    )?
    .scaled(0.5 * FOUR_PI_EPSILON_0 * alpha / HBAR);

    // Magnetic form at f = 1; it is linear in f.
    let unit = arm_time_integral(
        &arm,
        |pp| {
            let e = config.eval_e(&pp.position)?;
            let v = pp.velocity;
            let vxe = v.cross(&e);
            let mu_prime = vxe * (FOUR_PI_EPSILON_0 * alpha * C2 / v.norm_squared());
            let b_prime = vxe / C2;
            Ok(mu_prime.dot(&b_prime))
        },
        tol,
    )?
    .scaled(1.0 / HBAR);

    let magnetic = unit.scaled(mu_prime_factor);
    let relative = |f: f64| {
        let diff = electric.value - f * unit.value;
        if electric.value == 0.0 {
            diff
        } else {
            diff / electric.value.abs()
        }
    };
    let matching_factor = if unit.value == 0.0 {
        DEFAULT_MU_PRIME_FACTOR
    } else {
        electric.value / unit.value
    };
    Ok(DualityReport {
        phi_electric_form: electric,
        phi_magnetic_form: magnetic,
        residual: electric.value - magnetic.value,
        mu_prime_factor,
        sensitivity: DualitySensitivity {
            d_phase_d_factor: unit.value,
            matching_factor,
            relative_residuals: [(0.25, relative(0.25)), (0.5, relative(0.5)), (1.0, relative(1.0))],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curve;
    use crate::{vec3, Vec3};
    use approx::assert_relative_eq;

    const ALPHA: f64 = 24.3e-30;

    fn straight(length: f64, speed: f64) -> Arm {
        Arm::new(
            Curve::polyline(vec![Vec3::zeros(), vec3(length, 0.0, 0.0)]).unwrap(),
            SpeedProfile::constant(speed).unwrap(),
        )
        .unwrap()
    }

    fn transverse_field(e0: f64) -> FieldConfiguration {
        FieldConfiguration::uniform_e(vec3(0.0, e0, 0.0)).unwrap()
    }

    #[test]
    fn constant_field_closed_form() {
        let s = ParticleSpecies::polarizable(1.16e-26, ALPHA);
        let (e0, l, v0) = (7e5, 0.06, 1065.0);
        let phi = stark_scan_phase(&s, &transverse_field(e0), &straight(l, v0), Tolerance::default()).unwrap();
        let expected = 0.5 * FOUR_PI_EPSILON_0 * ALPHA * e0 * e0 * l / (HBAR * v0);
        assert_relative_eq!(phi.value, expected, max_relative = 1e-13);
        let doubled =
            stark_scan_phase(&s, &transverse_field(e0), &straight(l, 2.0 * v0), Tolerance::default()).unwrap();
        assert_relative_eq!(doubled.value, 0.5 * phi.value, max_relative = 1e-13);
    }

    #[test]
    fn time_route_agrees_with_closed_form() {
        let s = ParticleSpecies::polarizable(1.16e-26, ALPHA);
        let cfg = FieldConfiguration::line_charge(1e-9, vec3(0.03, -0.02, 0.0), vec3(0.0, 0.0, 1.0)).unwrap();
        let arm = Arm::new(
            Curve::polyline(vec![Vec3::zeros(), vec3(0.03, 0.01, 0.0), vec3(0.06, 0.0, 0.0)]).unwrap(),
            SpeedProfile::piecewise_linear(vec![(0.0, 900.0), (0.5, 1300.0), (1.0, 1000.0)]).unwrap(),
        )
        .unwrap();
        let a = stark_scan_phase(&s, &cfg, &arm, Tolerance::default()).unwrap().value;
        let b = stark_time_route(&s, &cfg, &arm, Tolerance::default()).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn duality_with_transverse_field() {
        let s = ParticleSpecies::polarizable(1.16e-26, ALPHA);
        let arm = straight(0.06, 1000.0);
        let v = SpeedProfile::piecewise_linear(vec![(0.0, 800.0), (1.0, 1200.0)]).unwrap();
        let r = duality_check(
            &s,
            &transverse_field(5e5),
            &arm,
            &v,
            DEFAULT_MU_PRIME_FACTOR,
            Tolerance::default(),
        )
        .unwrap();
        assert!(r.residual.abs() < 1e-9 * r.phi_electric_form.value.abs());
        assert_relative_eq!(r.sensitivity.matching_factor, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.sensitivity.relative_residuals[2].1, -1.0, max_relative = 1e-12);
        // With a constant transverse field, this is the Stark phase itself.
        let stark = stark_scan_phase(
            &s,
            &transverse_field(5e5),
            &arm.with_speed(v).unwrap(),
            Tolerance::default(),
        )
        .unwrap();
        assert_relative_eq!(r.phi_electric_form.value, stark.value, max_relative = 1e-12);
    }

    #[test]
    fn parallel_field_gives_nothing() {
        let s = ParticleSpecies::polarizable(1.16e-26, ALPHA);
        let cfg = FieldConfiguration::uniform_e(vec3(3e5, 0.0, 0.0)).unwrap();
        let v = SpeedProfile::constant(1000.0).unwrap();
        let r = duality_check(&s, &cfg, &straight(0.06, 1000.0), &v, 0.5, Tolerance::default()).unwrap();
        assert_eq!(r.phi_electric_form.value, 0.0);
        assert_eq!(r.phi_magnetic_form.value, 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn zero_alpha_and_slow_particles() {
        let v = SpeedProfile::constant(1000.0).unwrap();
        let r = duality_check(
            &ParticleSpecies::inert(1.0),
            &transverse_field(1e5),
            &straight(0.06, 1000.0),
            &v,
            0.5,
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!(
            (r.phi_electric_form.value, r.phi_magnetic_form.value, r.residual),
            (0.0, 0.0, 0.0)
        );
        let slow = SpeedProfile::PiecewiseLinear(vec![(0.0, 1e-7), (1.0, 10.0)]);
        let err = duality_check(
            &ParticleSpecies::polarizable(1.0, ALPHA),
            &transverse_field(1e5),
            &straight(0.06, 1000.0),
            &slow,
            0.5,
            Tolerance::default(),
        )
        .unwrap_err();
        assert!(matches!(err, PhaseError::DegenerateVelocity { .. }));
    }
}
