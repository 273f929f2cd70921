use super::{prepare, ParticleSpecies, PhaseError};
use crate::analysis::enclosed::{enclosed_charge_on, volumetric_integral};
use crate::constants::{EPSILON_0, FOUR_PI_EPSILON_0, HBAR};
use crate::fields::{FieldConfiguration, FieldError};
use crate::geometry::{InterferometerLoop, QuadratureResult, SpanningSurface, Tolerance};
use crate::Vec3;

/// Largest relative variation of B over the surface for which the surface
/// form is accepted.
const UNIFORM_B_TOLERANCE: f64 = 1e-6;

/// Samples B over the surface mesh and returns it when uniform.
fn uniform_b(config: &FieldConfiguration, surface: &SpanningSurface) -> Result<Vec3, PhaseError> {
    let mesh = surface.triangulate(32, 8);
    let mut samples = Vec::with_capacity(mesh.vertices.len());
    for v in &mesh.vertices {
        match config.eval_b(&Vec3::new(v[0], v[1], v[2])) {
            Ok(b) => samples.push(b),
            Err(FieldError::SingularPoint { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let Some(&reference) = samples.first() else {
        return Ok(Vec3::zeros());
    };
    let scale = samples.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Vec3::zeros());
    }
    let variation = samples.iter().map(|b| (b - reference).norm()).fold(0.0, f64::max) / scale;
    if variation > UNIFORM_B_TOLERANCE {
        return Err(PhaseError::NonUniformB { variation });
    }
    Ok(reference)
}

/// The Lepoutre phase as a flux through the spanning surface:
/// −(1/ħ)∫dS·(4πε₀αB)(∇·E), with ∇·E = ρ/ε₀ and singular sources counted
/// through the enclosed-charge decomposition. Requires uniform B, for which
/// ∮(E×B)·dr = −∫dS·B(∇·E) when E does not vary along B.
pub fn surface_form_phase(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    surface: &SpanningSurface,
    tol: Tolerance,
) -> Result<QuadratureResult, PhaseError> {
    prepare(species, config, lp)?;
    let b = uniform_b(config, surface)?;
    if species.alpha_vol == 0.0 || b == Vec3::zeros() {
        return Ok(QuadratureResult::ZERO);
    }
    let enclosed = enclosed_charge_on(config, surface, tol)?;
    let singular = b.dot(&enclosed.normal) * enclosed.singular();
    let volumetric = volumetric_integral(config, surface, |n| b.dot(n), tol)?;
    let flux = QuadratureResult {
        value: singular + volumetric.value,
        abs_error_estimate: volumetric.abs_error_estimate + 4.0 * f64::EPSILON * singular.abs(),
        evaluations: volumetric.evaluations,
    };
    Ok(flux.scaled(-FOUR_PI_EPSILON_0 * species.alpha_vol / (EPSILON_0 * HBAR)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Arm, Curve, SpeedProfile};
    use crate::phases::lepoutre_phase;
    use crate::vec3;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn circle(center: Vec3) -> InterferometerLoop {
        let arc = |end: f64| {
            Arm::new(
                Curve::arc(center, vec3(0.0, 0.0, 1.0), vec3(1.0, 0.0, 0.0), 0.1, 0.1, 0.0, end).unwrap(),
                SpeedProfile::constant(1000.0).unwrap(),
            )
            .unwrap()
        };
        InterferometerLoop::new(arc(PI), arc(-PI)).unwrap()
    }

    fn wire_in(b: FieldConfiguration) -> FieldConfiguration {
        FieldConfiguration::superposition(vec![
            FieldConfiguration::line_charge(1e-9, Vec3::zeros(), vec3(0.0, 0.0, 1.0)).unwrap(),
            b,
        ])
    }

    #[test]
    fn stokes_equivalence_for_enclosed_wire() {
        let cfg = wire_in(FieldConfiguration::uniform_b(vec3(0.0, 0.0, 1e-3)).unwrap());
        let s = ParticleSpecies::polarizable(1.16e-26, 24.3e-30);
        let lp = circle(Vec3::zeros());
        let surface = SpanningSurface::auto(&lp).unwrap();
        let tol = Tolerance::default();
        let area = surface_form_phase(&s, &cfg, &lp, &surface, tol).unwrap().value;
        let line = lepoutre_phase(&s, &cfg, &lp, tol).unwrap().value;
        assert_relative_eq!(area, line, max_relative = 1e-9);
        let expected = -FOUR_PI_EPSILON_0 * 24.3e-30 * 1e-3 * 1e-9 / (EPSILON_0 * HBAR);
        assert_relative_eq!(area, expected, max_relative = 1e-14);
    }

    #[test]
    fn outside_loop_has_no_flux() {
        let cfg = wire_in(FieldConfiguration::uniform_b(vec3(0.0, 0.0, 1e-3)).unwrap());
        let s = ParticleSpecies::polarizable(1.16e-26, 24.3e-30);
        let lp = circle(vec3(0.4, 0.0, 0.0));
        let surface = SpanningSurface::auto(&lp).unwrap();
        assert_eq!(
            surface_form_phase(&s, &cfg, &lp, &surface, Tolerance::default())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn varying_b_is_refused() {
        let cfg = wire_in(FieldConfiguration::current_wire(5.0, vec3(0.5, 0.0, 0.0), vec3(0.0, 0.0, 1.0)).unwrap());
        let s = ParticleSpecies::polarizable(1.16e-26, 24.3e-30);
        let lp = circle(Vec3::zeros());
        let surface = SpanningSurface::auto(&lp).unwrap();
        let err = surface_form_phase(&s, &cfg, &lp, &surface, Tolerance::default()).unwrap_err();
        assert!(matches!(err, PhaseError::NonUniformB { .. }));
    }
}
