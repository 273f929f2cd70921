use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use dipole_phase::analysis::{
    fit_velocity_basis, solve_polarizabilities, speed_grid, Measurement, PhaseKernels, VelocityCoefficients,
};
use dipole_phase::constants::{C2, EPSILON_0, HBAR};
use dipole_phase::fields::FieldConfiguration;
use dipole_phase::geometry::{deform_loop, Arm, Curve, Deformation, InterferometerLoop, SpeedProfile, Tolerance};
use dipole_phase::phases::{
    canonical_momentum_closed_form, canonical_momentum_oracle, combined_geometric_phase, total_phase_decomposition,
    ParticleSpecies,
};
use dipole_phase::{vec3, Vec3};

fn circle(center: Vec3, radius: f64, speed: f64) -> InterferometerLoop {
    let arc = |end: f64| {
        Arm::new(
            Curve::arc(center, Vec3::z(), Vec3::x(), radius, radius, 0.0, end).unwrap(),
            SpeedProfile::constant(speed).unwrap(),
        )
        .unwrap()
    };
    InterferometerLoop::new(arc(PI), arc(-PI)).unwrap()
}

fn wire_in_field(lambda: f64, b: f64) -> FieldConfiguration {
    FieldConfiguration::superposition(vec![
        FieldConfiguration::line_charge(lambda, Vec3::zeros(), Vec3::z()).unwrap(),
        FieldConfiguration::uniform_b(vec3(0.0, 0.0, b)).unwrap(),
    ])
}

/// Asymmetric loop so that every term, not just the geometric one, is nonzero.
fn lopsided(speed_upper: f64, speed_lower: f64) -> InterferometerLoop {
    let upper = Arm::new(
        Curve::arc(Vec3::zeros(), Vec3::z(), Vec3::x(), 0.1, 0.1, 0.0, PI).unwrap(),
        SpeedProfile::constant(speed_upper).unwrap(),
    )
    .unwrap();
    let lower = Arm::new(
        Curve::polyline(vec![
            vec3(0.1, 0.0, 0.0),
            vec3(0.1, -0.15, 0.0),
            vec3(-0.1, -0.15, 0.0),
            vec3(-0.1, 0.0, 0.0),
        ])
        .unwrap(),
        SpeedProfile::constant(speed_lower).unwrap(),
    )
    .unwrap();
    InterferometerLoop::new(upper, lower).unwrap()
}

fn composite_field() -> FieldConfiguration {
    FieldConfiguration::superposition(vec![
        FieldConfiguration::line_charge(3e-8, Vec3::zeros(), Vec3::z()).unwrap(),
        FieldConfiguration::uniform_e(vec3(0.0, 1.5e4, 0.0)).unwrap(),
        FieldConfiguration::uniform_b(vec3(0.0, 0.0, 10.0)).unwrap(),
    ])
}

#[test]
fn circulation_oracle() {
    let s = ParticleSpecies::inert(1e-26).with_chi(HBAR);
    let phi = combined_geometric_phase(
        &s,
        &wire_in_field(1e-9, 1e-3),
        &circle(Vec3::zeros(), 0.1, 1000.0),
        Tolerance::default(),
    )
    .unwrap();
    // χ = ħ makes the phase equal to the bare circulation λB/ε₀.
    assert_relative_eq!(phi.value, 1e-12 / EPSILON_0, max_relative = 1e-9);
    assert_relative_eq!(phi.value, 0.112_940_906_737_302, max_relative = 1e-9);
}

#[test]
fn geometric_phase_survives_deformations() {
    let s = ParticleSpecies::polarizable(3.8e-26, 24.1e-30);
    let cfg = wire_in_field(1e-9, 1e-3);
    let lp = circle(Vec3::zeros(), 0.1, 1000.0);
    let tol = Tolerance::default();
    let reference = combined_geometric_phase(&s, &cfg, &lp, tol).unwrap().value;
    let maps = [
        Deformation::scaling(Vec3::zeros(), 1.7),
        Deformation::translation(vec3(0.03, -0.02, 0.0)),
        Deformation::new("wobble", |p: &Vec3| {
            let theta = p.y.atan2(p.x);
            vec3(p.x, p.y, 0.0) * (1.0 + 0.2 * (3.0 * theta).sin()) + vec3(0.0, 0.0, p.z)
        }),
        Deformation::new("shear", |p: &Vec3| vec3(p.x + 0.5 * p.y, p.y, p.z)),
        Deformation::new("saddle", |p: &Vec3| vec3(p.x, p.y, p.z + 2.0 * p.x * p.y)),
    ];
    for map in maps {
        let deformed = deform_loop(&lp, &map, &cfg).unwrap();
        let phi = combined_geometric_phase(&s, &cfg, &deformed, tol).unwrap().value;
        assert!(
            (phi - reference).abs() <= 1e-8 * reference.abs(),
            "{}: {phi} vs {reference}",
            map.name()
        );
    }
}

#[test]
fn geometric_phase_counts_windings() {
    let s = ParticleSpecies::polarizable(3.8e-26, 24.1e-30);
    let cfg = wire_in_field(1e-9, 1e-3);
    let tol = Tolerance::default();
    let once = combined_geometric_phase(&s, &cfg, &circle(Vec3::zeros(), 0.1, 1000.0), tol)
        .unwrap()
        .value;
    let arc = |end: f64| {
        Arm::new(
            Curve::arc(Vec3::zeros(), Vec3::z(), Vec3::x(), 0.1, 0.1, 0.0, end).unwrap(),
            SpeedProfile::constant(1000.0).unwrap(),
        )
        .unwrap()
    };
    let twice = InterferometerLoop::new(arc(2.0 * PI), arc(-2.0 * PI)).unwrap();
    let phi = combined_geometric_phase(&s, &cfg, &twice, tol).unwrap().value;
    assert_relative_eq!(phi, 2.0 * once, max_relative = 1e-8);
    let outside = combined_geometric_phase(&s, &cfg, &circle(vec3(0.3, 0.0, 0.0), 0.1, 1000.0), tol)
        .unwrap()
        .value;
    assert!(outside.abs() < 1e-12, "{outside}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_matches_closed_form(
        r in (0.02f64..0.3, 0.0f64..(2.0 * PI), -0.1f64..0.1),
        v in prop::array::uniform3(-2000.0f64..2000.0),
        chi in 0.0f64..1e-38,
        kappa in 0.0f64..1e-22,
        d in prop::array::uniform3(-1e-30f64..1e-30),
        mu in prop::array::uniform3(-1e-23f64..1e-23),
    ) {
        let s = ParticleSpecies::inert(1e-26)
            .with_chi(chi)
            .with_kappa(kappa)
            .with_d0(vec3(d[0], d[1], d[2]))
            .with_mu0(vec3(mu[0], mu[1], mu[2]));
        let cfg = FieldConfiguration::superposition(vec![
            wire_in_field(1e-9, 0.3),
            FieldConfiguration::uniform_e(vec3(2e4, -1e4, 5e3)).unwrap(),
        ]);
        let p = vec3(r.0 * r.1.cos(), r.0 * r.1.sin(), r.2);
        let v = vec3(v[0], v[1], v[2]);
        let numeric = canonical_momentum_oracle(&s, &cfg, &p, &v).unwrap();
        let closed = canonical_momentum_closed_form(&s, &cfg, &p, &v).unwrap();
        let scale = closed.norm().max(numeric.norm());
        prop_assert!((numeric - closed).norm() <= 1e-6 * scale + f64::MIN_POSITIVE, "{numeric} vs {closed}");
    }

    #[test]
    fn phases_are_linear_in_the_couplings(a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let cfg = composite_field();
        let lp = lopsided(1000.0, 1000.0);
        let tol = Tolerance::relative(1e-12);
        let chi = 2.7e-39;
        let kappa = 0.31 * chi * C2;
        let one = total_phase_decomposition(&ParticleSpecies::inert(1e-26).with_chi(chi), &cfg, &lp, tol).unwrap();
        let two = total_phase_decomposition(&ParticleSpecies::inert(1e-26).with_kappa(kappa), &cfg, &lp, tol).unwrap();
        let both = total_phase_decomposition(
            &ParticleSpecies::inert(1e-26).with_chi(a * chi).with_kappa(b * kappa),
            &cfg,
            &lp,
            tol,
        )
        .unwrap();
        let expected = a * one.phi_total.value + b * two.phi_total.value;
        let scale = a * one.phi_total.value.abs() + b * two.phi_total.value.abs();
        prop_assert!((both.phi_total.value - expected).abs() <= 1e-10 * scale);
    }

    #[test]
    fn swapping_arms_negates_every_term(vu in 300.0f64..3000.0, vl in 300.0f64..3000.0) {
        let cfg = composite_field();
        let lp = lopsided(vu, vl);
        let s = ParticleSpecies::polarizable(3.8e-26, 24.1e-30)
            .with_kappa(1e-23)
            .with_mu0(vec3(0.0, 0.0, 9.27e-24))
            .with_d0(vec3(1e-31, 0.0, 0.0));
        let tol = Tolerance::relative(1e-12);
        let forward = total_phase_decomposition(&s, &cfg, &lp, tol).unwrap();
        let swapped = total_phase_decomposition(&s, &cfg, &lp.swapped(), tol).unwrap();
        let reversed = total_phase_decomposition(&s, &cfg, &lp.reversed(), tol).unwrap();
        for ((name, f), ((_, w), (_, r))) in forward.terms().iter().zip(swapped.terms().iter().zip(reversed.terms().iter())) {
            let bound = 10.0 * (f.error + w.error + r.error) + 1e-12 * f.value.abs();
            prop_assert!((f.value + w.value).abs() <= bound, "{name}: {} vs {}", f.value, w.value);
            prop_assert!((f.value + r.value).abs() <= bound, "{name}: {} vs {}", f.value, r.value);
        }
    }

    #[test]
    fn velocity_fit_round_trip(a in -10.0f64..10.0, b in -1e4f64..1e4, c in -1e-2f64..1e-2, n in 6usize..40) {
        let truth = VelocityCoefficients { a_const: a, a_invv: b, a_linv: c };
        let speeds = speed_grid(500.0, 3000.0, n).unwrap();
        let phases: Vec<f64> = speeds.iter().map(|v| truth.eval(*v)).collect();
        let fit = fit_velocity_basis(&speeds, &phases).unwrap();
        let scale = a.abs() + b.abs() / 500.0 + c.abs() * 3000.0;
        let got = fit.coefficients;
        prop_assert!((got.a_const - a).abs() <= 1e-9 * scale);
        prop_assert!((got.a_invv - b).abs() <= 1e-9 * scale * 3000.0);
        prop_assert!((got.a_linv - c).abs() <= 1e-9 * scale / 500.0);
    }

    #[test]
    fn geometric_only_data_is_rank_one(gs in prop::collection::vec(1e37f64..1e39, 2..6), chi in 1e-40f64..1e-38) {
        let data: Vec<Measurement> = gs
            .iter()
            .enumerate()
            .map(|(i, g)| Measurement {
                id: format!("m{i}"),
                kernels: PhaseKernels { k_chi: *g, k_kappa: g / C2, offset: 0.0 },
                phase: g * chi,
                sigma: 1e-3,
            })
            .collect();
        let s = solve_polarizabilities(&data).unwrap();
        prop_assert_eq!(s.rank, 1);
        let d = s.degenerate_direction;
        prop_assert!((d[1] / d[0] * C2 - 1.0).abs() < 1e-8);
    }
}
