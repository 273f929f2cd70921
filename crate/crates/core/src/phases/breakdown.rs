use super::terms::{arm_difference, velocity_linear_phase};
use super::{
    combined_geometric_phase, paper_eq16_variant, permanent_dipole_phase, prepare, ParticleSpecies, PhaseError,
};
use crate::constants::HBAR;
use crate::fields::FieldConfiguration;
use crate::geometry::{InterferometerLoop, QuadratureResult, Tolerance};
use crate::report::FlatRecord;

/// A phase in radians with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTerm {
    pub value: f64,
    pub error: f64,
}

impl From<QuadratureResult> for PhaseTerm {
    fn from(r: QuadratureResult) -> Self {
        Self {
            value: r.value,
            error: r.abs_error_estimate,
        }
    }
}

/// Every term of the interferometer phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseBreakdown {
    pub phi_ac_e: PhaseTerm,
    pub phi_ac_b: PhaseTerm,
    pub phi_hmw_e: PhaseTerm,
    pub phi_hmw_b: PhaseTerm,
    pub phi_mix: PhaseTerm,
    pub phi_stark: PhaseTerm,
    pub phi_zeeman: PhaseTerm,
    pub phi_vlinear: PhaseTerm,
    /// Sum of the eight terms above; error is their root-sum-square.
    pub phi_total: PhaseTerm,
    /// Mix term with coupling (χ − κ/c²) and kernel E×B; not part of the total.
    pub paper_eq16_variant: PhaseTerm,
}

impl PhaseBreakdown {
    /// The eight summands, by name.
    pub fn terms(&self) -> [(&'static str, PhaseTerm); 8] {
        [
            ("phi_AC_E", self.phi_ac_e),
            ("phi_AC_B", self.phi_ac_b),
            ("phi_HMW_E", self.phi_hmw_e),
            ("phi_HMW_B", self.phi_hmw_b),
            ("phi_mix", self.phi_mix),
            ("phi_stark", self.phi_stark),
            ("phi_zeeman", self.phi_zeeman),
            ("phi_vlinear", self.phi_vlinear),
        ]
    }

    pub fn rss_error(&self) -> f64 {
        self.terms().iter().map(|(_, t)| t.error * t.error).sum::<f64>().sqrt()
    }

    /// |total − Σ terms|.
    pub fn additivity_residual(&self) -> f64 {
        let sum: f64 = self.terms().iter().map(|(_, t)| t.value).sum();
        (self.phi_total.value - sum).abs()
    }

    fn assemble(mut self) -> Self {
        let sum: f64 = self.terms().iter().map(|(_, t)| t.value).sum();
        self.phi_total = PhaseTerm {
            value: sum,
            error: self.rss_error(),
        };
        self
    }

    /// Term name → (value, error), in display order.
    pub fn to_record(&self) -> FlatRecord {
        let mut r = FlatRecord::new();
        for (name, t) in self.terms() {
            r.measured(name, t.value, t.error);
        }
        r.measured("phi_total", self.phi_total.value, self.phi_total.error);
        r.measured(
            "paper_eq16_variant",
            self.paper_eq16_variant.value,
            self.paper_eq16_variant.error,
        );
        r
    }
}

/// Full decomposition: permanent-dipole terms, the geometric mix term
/// (χ + κ/c²)/ħ∮(B×E)·dr, Stark (χ/2ħ)∮E²dt and Zeeman (κ/2ħ)∮B²dt arm
/// differences, and the velocity-linear spatial remainder.
pub fn total_phase_decomposition(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<PhaseBreakdown, PhaseError> {
    prepare(species, config, lp)?;
    let permanent = permanent_dipole_phase(species, config, lp, tol)?;
    let stark = if species.chi == 0.0 {
        QuadratureResult::ZERO
    } else {
        arm_difference(config, lp, |e, _| e.norm_squared(), tol)?.scaled(species.chi / (2.0 * HBAR))
    };
    let zeeman = if species.kappa == 0.0 {
        QuadratureResult::ZERO
    } else {
        arm_difference(config, lp, |_, b| b.norm_squared(), tol)?.scaled(species.kappa / (2.0 * HBAR))
    };
    Ok(PhaseBreakdown {
        phi_ac_e: permanent.ac_e.into(),
        phi_ac_b: permanent.ac_b.into(),
        phi_hmw_e: permanent.hmw_e.into(),
        phi_hmw_b: permanent.hmw_b.into(),
        phi_mix: combined_geometric_phase(species, config, lp, tol)?.into(),
        phi_stark: stark.into(),
        phi_zeeman: zeeman.into(),
        phi_vlinear: velocity_linear_phase(species, config, lp, tol)?.into(),
        phi_total: PhaseTerm::default(),
        paper_eq16_variant: paper_eq16_variant(species, config, lp, tol)?.into(),
    }
    .assemble())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{C2, EPSILON_0};
    use crate::geometry::{Arm, Curve, SpeedProfile};
    use crate::phases::{induced_electric_phase, induced_magnetic_phase};
    use crate::{vec3, Vec3};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn circle(speed: f64) -> InterferometerLoop {
        let arc = |end: f64| {
            Arm::new(
                Curve::arc(
                    Vec3::zeros(),
                    vec3(0.0, 0.0, 1.0),
                    vec3(1.0, 0.0, 0.0),
                    0.1,
                    0.1,
                    0.0,
                    end,
                )
                .unwrap(),
                SpeedProfile::constant(speed).unwrap(),
            )
            .unwrap()
        };
        InterferometerLoop::new(arc(PI), arc(-PI)).unwrap()
    }

    fn wire_in_field() -> FieldConfiguration {
        FieldConfiguration::superposition(vec![
            FieldConfiguration::line_charge(1e-9, Vec3::zeros(), vec3(0.0, 0.0, 1.0)).unwrap(),
            FieldConfiguration::uniform_b(vec3(0.0, 0.0, 1e-3)).unwrap(),
        ])
    }

    #[test]
    fn zero_couplings_zero_everything() {
        let b = total_phase_decomposition(
            &ParticleSpecies::inert(1e-26),
            &wire_in_field(),
            &circle(1000.0),
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!(b, PhaseBreakdown::default());
    }

    #[test]
    fn electric_only_circle() {
        let chi = 2.7e-39;
        let s = ParticleSpecies::inert(1e-26).with_chi(chi);
        let tol = Tolerance::default();
        let b = total_phase_decomposition(&s, &wire_in_field(), &circle(1000.0), tol).unwrap();
        assert_relative_eq!(b.phi_mix.value, chi * 1e-12 / (EPSILON_0 * HBAR), max_relative = 1e-9);
        // Symmetric arms in a cylindrically symmetric field: Stark cancels.
        assert!(b.phi_stark.value.abs() <= 1e-9 * b.phi_mix.value.abs());
        assert!(b.additivity_residual() <= b.rss_error().max(1e-15 * b.phi_total.value.abs()));
        let (spatial, temporal) = induced_electric_phase(&s, &wire_in_field(), &circle(1000.0), tol).unwrap();
        assert_relative_eq!(
            b.phi_mix.value + b.phi_vlinear.value,
            spatial.value,
            max_relative = 1e-9
        );
        assert_relative_eq!(b.phi_stark.value, temporal.value, epsilon = 1e-20);
    }

    #[test]
    fn mixed_couplings_split_consistently() {
        let s = ParticleSpecies::inert(1e-26)
            .with_chi(2.7e-39)
            .with_kappa(0.31 * 2.7e-39 * C2);
        let tol = Tolerance::default();
        let lp = circle(700.0);
        let cfg = wire_in_field();
        let b = total_phase_decomposition(&s, &cfg, &lp, tol).unwrap();
        let (ms, mt) = induced_magnetic_phase(&s, &cfg, &lp, tol).unwrap();
        let (es, et) = induced_electric_phase(&s, &cfg, &lp, tol).unwrap();
        let scale = b.phi_mix.value.abs();
        assert!((b.phi_mix.value + b.phi_vlinear.value - ms.value - es.value).abs() < 1e-9 * scale);
        assert!((b.phi_stark.value - et.value).abs() < 1e-9 * scale);
        assert!((b.phi_zeeman.value - mt.value).abs() < 1e-9 * scale);
        assert_relative_eq!(
            b.phi_mix.value,
            1.31 * 2.7e-39 * 1e-12 / (EPSILON_0 * HBAR),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            b.paper_eq16_variant.value,
            0.69 * 2.7e-39 * -1e-12 / (EPSILON_0 * HBAR),
            max_relative = 1e-9
        );
    }

    #[test]
    fn degenerate_loop_has_no_phase() {
        let arm = Arm::new(
            Curve::polyline(vec![Vec3::zeros(), vec3(0.1, 0.05, 0.0), vec3(0.2, 0.0, 0.0)]).unwrap(),
            SpeedProfile::constant(1000.0).unwrap(),
        )
        .unwrap();
        let lp = InterferometerLoop::new(arm.clone(), arm).unwrap();
        let cfg = FieldConfiguration::superposition(vec![
            FieldConfiguration::line_charge(1e-9, vec3(0.1, -0.1, 0.0), vec3(0.0, 0.0, 1.0)).unwrap(),
            FieldConfiguration::uniform_b(vec3(0.0, 0.0, 1e-3)).unwrap(),
        ]);
        let s = ParticleSpecies::inert(1e-26)
            .with_chi(2.7e-39)
            .with_kappa(1e-23)
            .with_mu0(vec3(0.0, 0.0, 1e-23))
            .with_d0(vec3(1e-30, 0.0, 0.0));
        let b = total_phase_decomposition(&s, &cfg, &lp, Tolerance::default()).unwrap();
        for (name, t) in b.terms() {
            assert!(t.value.abs() <= t.error, "{name}: {} ± {}", t.value, t.error);
        }
    }
}
