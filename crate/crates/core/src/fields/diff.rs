//! Central-difference differential operators with one Richardson step.

use super::{electric_potential, magnetic_potential, FieldConfiguration, FieldError};
use crate::Vec3;

/// Two-step estimates disagreeing by more than this (relative to the
/// natural derivative scale |F|/L) are reported as non-converged.
pub const NONCONVERGED_RELATIVE: f64 = 1e-4;

/// Base step as a fraction of the local length scale.
const BASE_STEP_FRACTION: f64 = 1e-4;

/// Length scales below this are treated as sitting on a discontinuity.
const MIN_LENGTH_SCALE: f64 = 1e-12;

/// Which field a [`numeric_diff`] call differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSelector {
    E,
    B,
    /// 𝒜 of the induced magnetic dipole.
    MagneticVector,
    /// 𝒱 = −B²/2.
    MagneticScalar,
    /// 𝒜̃ of the induced electric dipole.
    ElectricVector,
    /// 𝒱̃ = −E²/2.
    ElectricScalar,
}

impl FieldSelector {
    pub fn is_scalar(self) -> bool {
        matches!(self, Self::MagneticScalar | Self::ElectricScalar)
    }

    fn eval(self, cfg: &FieldConfiguration, r: &Vec3, v: &Vec3) -> Result<Vec3, FieldError> {
        let (e, b) = cfg.eval_eb(r)?;
        Ok(match self {
            Self::E => e,
            Self::B => b,
            Self::MagneticVector => magnetic_potential(&e, &b, v).vector,
            Self::ElectricVector => electric_potential(&e, &b, v).vector,
            Self::MagneticScalar => Vec3::new(magnetic_potential(&e, &b, v).scalar, 0.0, 0.0),
            Self::ElectricScalar => Vec3::new(electric_potential(&e, &b, v).scalar, 0.0, 0.0),
        })
    }
}

/// Derivatives of one field at one point. For scalar selectors only
/// `grad_scalar` is populated; for vector selectors only `curl_vector` and
/// `div_vector`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialSample {
    pub point: Vec3,
    pub grad_scalar: Vec3,
    pub curl_vector: Vec3,
    pub div_vector: f64,
    /// Finest step of the Richardson pair, m.
    pub step_used: f64,
    /// |J(h) − J(h/2)| relative to max(|J|, |F|/L).
    pub relative_error: f64,
    /// max(|J|, |F|/L): the scale the relative error is measured against.
    pub derivative_scale: f64,
}

type Jacobian = [[f64; 3]; 3];

fn central_jacobian(f: &impl Fn(&Vec3) -> Result<Vec3, FieldError>, r: &Vec3, h: f64) -> Result<Jacobian, FieldError> {
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut step = Vec3::zeros();
        step[j] = h;
        let plus = f(&(r + step))?;
        let minus = f(&(r - step))?;
        let d = (plus - minus) / (2.0 * h);
        for (i, row) in jac.iter_mut().enumerate() {
            row[j] = d[i];
        }
    }
    Ok(jac)
}

/// Differentiates the selected field at `r` with the particle velocity held
/// at `v` (only the effective potentials depend on it).
///
/// The base step is 10⁻⁴ of the local length scale (distance to the nearest
/// source or discontinuity, at most 1 m); the result is Richardson
/// extrapolated from steps h and h/2.
pub fn numeric_diff(
    config: &FieldConfiguration,
    selector: FieldSelector,
    r: &Vec3,
    v: &Vec3,
) -> Result<DifferentialSample, FieldError> {
    config.check_regular(r)?;
    let scale = config.length_scale(r);
    if !(scale > MIN_LENGTH_SCALE) {
        return Err(FieldError::Discontinuity { point: *r });
    }
    let h = BASE_STEP_FRACTION * scale;
    let f = |p: &Vec3| selector.eval(config, p, v);

    let value = f(r)?;
    let coarse = central_jacobian(&f, r, h)?;
    let fine = central_jacobian(&f, r, 0.5 * h)?;

    let mut jac = [[0.0; 3]; 3];
    let mut disagreement: f64 = 0.0;
    let mut jmax: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            jac[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
            disagreement = disagreement.max((fine[i][j] - coarse[i][j]).abs());
            jmax = jmax.max(jac[i][j].abs());
        }
    }
    let derivative_scale = jmax.max(value.norm() / scale);
    let relative_error = if derivative_scale > 0.0 {
        disagreement / derivative_scale
    } else {
        0.0
    };

    let mut sample = DifferentialSample {
        point: *r,
        grad_scalar: Vec3::zeros(),
        curl_vector: Vec3::zeros(),
        div_vector: 0.0,
        step_used: 0.5 * h,
        relative_error,
        derivative_scale,
    };
    if selector.is_scalar() {
        sample.grad_scalar = Vec3::new(jac[0][0], jac[0][1], jac[0][2]);
    } else {
        sample.curl_vector = Vec3::new(jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]);
        sample.div_vector = jac[0][0] + jac[1][1] + jac[2][2];
    }

    if relative_error > NONCONVERGED_RELATIVE {
        return Err(FieldError::NonConverged {
            relative_error,
            sample: Box::new(sample),
        });
    }
    Ok(sample)
}
