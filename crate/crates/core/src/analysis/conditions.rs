use super::enclosed::enclosed_charge;
use super::AnalysisError;
use crate::fields::{numeric_diff, DifferentialSample, FieldSelector};
use crate::fields::{FieldConfiguration, FieldError};
use crate::geometry::{GeometryError, InterferometerLoop};
use crate::phases::ParticleSpecies;
use crate::report::FlatRecord;
use crate::Vec3;

/// Relative residual below which an effective field counts as zero.
pub const FORCE_FREE_RELATIVE: f64 = 1e-6;
/// Relative numeric divergence of B above which ∇·B = 0 is violated.
pub const DIV_B_RELATIVE: f64 = 1e-6;
/// Stations per arm; each station contributes the centre and four tube points.
const STATIONS: usize = 16;

/// Peak effective fields over the tube around a loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// max |∇×𝒜| (magnetic side), T·V/m².
    pub max_curl_a_mag: f64,
    pub max_curl_a_elec: f64,
    /// max |∇𝒱|, T²/m (magnetic side) and V²/m³ (electric side).
    pub max_grad_v_mag: f64,
    pub max_grad_v_elec: f64,
    /// Same maxima relative to the local derivative scale of each field.
    pub rel_curl_a_mag: f64,
    pub rel_curl_a_elec: f64,
    pub rel_grad_v_mag: f64,
    pub rel_grad_v_elec: f64,
    /// max |∇·B| relative to |B|/L.
    pub rel_div_b: f64,
    /// C per metre along the loop normal; `None` for non-planar loops.
    pub enclosed_charge: Option<f64>,
    pub div_b_violation: bool,
    pub sample_count: usize,
    /// Tube points sitting on a field discontinuity, where no derivative exists.
    pub skipped_samples: usize,
    /// Points where the Richardson pair disagreed beyond tolerance.
    pub nonconverged_samples: usize,
    /// Whether κ (magnetic side) and χ (electric side) are nonzero.
    pub magnetic_relevant: bool,
    pub electric_relevant: bool,
    /// Effective fields vanish on every side the particle couples to.
    pub force_free: bool,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.force_free && !self.div_b_violation
    }

    pub fn to_record(&self) -> FlatRecord {
        let mut r = FlatRecord::new();
        r.real("max_curl_A_mag", self.max_curl_a_mag)
            .real("max_curl_A_elec", self.max_curl_a_elec)
            .real("max_grad_V_mag", self.max_grad_v_mag)
            .real("max_grad_V_elec", self.max_grad_v_elec)
            .real("rel_curl_A_mag", self.rel_curl_a_mag)
            .real("rel_curl_A_elec", self.rel_curl_a_elec)
            .real("rel_grad_V_mag", self.rel_grad_v_mag)
            .real("rel_grad_V_elec", self.rel_grad_v_elec)
            .real("rel_div_B", self.rel_div_b);
        match self.enclosed_charge {
            Some(q) => r.real("enclosed_charge", q),
            None => r.text("enclosed_charge", "n/a (non-planar loop)"),
        };
        r.flag("div_B_violation", self.div_b_violation)
            .integer("sample_count", self.sample_count as i64)
            .integer("skipped_samples", self.skipped_samples as i64)
            .integer("nonconverged_samples", self.nonconverged_samples as i64)
            .flag("force_free", self.force_free);
        r
    }
}

fn unit_normals(t: &Vec3) -> (Vec3, Vec3) {
    let helper = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let a = t.cross(&helper).normalize();
    (a, t.cross(&a))
}

/// Derivative at a tube point, tolerating non-convergence (which is
/// counted) but not singular points.
fn sample(
    config: &FieldConfiguration,
    selector: FieldSelector,
    r: &Vec3,
    v: &Vec3,
    nonconverged: &mut usize,
) -> Result<Option<DifferentialSample>, FieldError> {
    match numeric_diff(config, selector, r, v) {
        Ok(s) => Ok(Some(s)),
        Err(FieldError::NonConverged { sample, .. }) => {
            *nonconverged += 1;
            Ok(Some(*sample))
        }
        Err(FieldError::Discontinuity { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn relative(magnitude: f64, scale: f64) -> f64 {
    if magnitude == 0.0 {
        0.0
    } else if scale > 0.0 {
        magnitude / scale
    } else {
        f64::INFINITY
    }
}

/// Samples ∇×𝒜, ∇𝒱 of both effective potentials (at the local particle
/// velocity) and ∇·B on the loop and on a tube of radius `tube_radius`
/// around it; counts the enclosed charge; flags configurations with
/// magnetic charge.
pub fn check_conditions(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tube_radius: f64,
) -> Result<ConditionReport, AnalysisError> {
    if !(tube_radius >= 0.0 && tube_radius.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!(
            "tube radius must be a nonnegative length, got {tube_radius}"
        )));
    }
    let mut report = ConditionReport {
        max_curl_a_mag: 0.0,
        max_curl_a_elec: 0.0,
        max_grad_v_mag: 0.0,
        max_grad_v_elec: 0.0,
        rel_curl_a_mag: 0.0,
        rel_curl_a_elec: 0.0,
        rel_grad_v_mag: 0.0,
        rel_grad_v_elec: 0.0,
        rel_div_b: 0.0,
        enclosed_charge: None,
        div_b_violation: false,
        sample_count: 0,
        skipped_samples: 0,
        nonconverged_samples: 0,
        magnetic_relevant: species.kappa != 0.0,
        electric_relevant: species.chi != 0.0,
        force_free: true,
    };

    for (arm, label) in [(&lp.upper, "upper"), (&lp.lower, "lower")] {
        for i in 0..=STATIONS {
            let u = i as f64 / STATIONS as f64;
            let center = arm.point(u);
            let v = arm.velocity(u);
            let (a, b) = unit_normals(&arm.tangent(u));
            let points = [
                center,
                center + a * tube_radius,
                center - a * tube_radius,
                center + b * tube_radius,
                center - b * tube_radius,
            ];
            for p in points {
                let nc = &mut report.nonconverged_samples;
                let singular = |e: FieldError| -> AnalysisError { GeometryError::from_field(e, label).into() };
                let curl_m = sample(config, FieldSelector::MagneticVector, &p, &v, nc).map_err(singular)?;
                let curl_e = sample(config, FieldSelector::ElectricVector, &p, &v, nc).map_err(singular)?;
                let grad_m = sample(config, FieldSelector::MagneticScalar, &p, &v, nc).map_err(singular)?;
                let grad_e = sample(config, FieldSelector::ElectricScalar, &p, &v, nc).map_err(singular)?;
                let div_b = sample(config, FieldSelector::B, &p, &v, nc).map_err(singular)?;
                let (Some(cm), Some(ce), Some(gm), Some(ge), Some(db)) = (curl_m, curl_e, grad_m, grad_e, div_b) else {
                    report.skipped_samples += 1;
                    continue;
                };
                report.sample_count += 1;
                let r = &mut report;
                r.max_curl_a_mag = r.max_curl_a_mag.max(cm.curl_vector.norm());
                r.max_curl_a_elec = r.max_curl_a_elec.max(ce.curl_vector.norm());
                r.max_grad_v_mag = r.max_grad_v_mag.max(gm.grad_scalar.norm());
                r.max_grad_v_elec = r.max_grad_v_elec.max(ge.grad_scalar.norm());
                r.rel_curl_a_mag = r
                    .rel_curl_a_mag
                    .max(relative(cm.curl_vector.norm(), cm.derivative_scale));
                r.rel_curl_a_elec = r
                    .rel_curl_a_elec
                    .max(relative(ce.curl_vector.norm(), ce.derivative_scale));
                r.rel_grad_v_mag = r
                    .rel_grad_v_mag
                    .max(relative(gm.grad_scalar.norm(), gm.derivative_scale));
                r.rel_grad_v_elec = r
                    .rel_grad_v_elec
                    .max(relative(ge.grad_scalar.norm(), ge.derivative_scale));
                r.rel_div_b = r.rel_div_b.max(relative(db.div_vector.abs(), db.derivative_scale));
            }
        }
    }

    report.enclosed_charge = match enclosed_charge(config, lp) {
        Ok(q) => Some(q.total),
        Err(GeometryError::NonPlanarLoop { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    report.div_b_violation = config.magnetic_charge() != 0.0 || report.rel_div_b > DIV_B_RELATIVE;
    let magnetic_ok = report.rel_curl_a_mag < FORCE_FREE_RELATIVE && report.rel_grad_v_mag < FORCE_FREE_RELATIVE;
    let electric_ok = report.rel_curl_a_elec < FORCE_FREE_RELATIVE && report.rel_grad_v_elec < FORCE_FREE_RELATIVE;
    report.force_free = (!report.magnetic_relevant || magnetic_ok) && (!report.electric_relevant || electric_ok);
    Ok(report)
}
