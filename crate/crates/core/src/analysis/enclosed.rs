use crate::fields::{FieldConfiguration, FieldError};
use crate::geometry::{
    loop_plane, winding_about_line, winding_weighted_length, GeometryError, InterferometerLoop, QuadratureResult,
    SpanningSurface, Tolerance,
};
use crate::Vec3;

/// Sources lying (almost) parallel to the loop plane never pierce it.
const GRAZING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCrossing {
    /// C/m
    pub lambda: f64,
    /// Winding of the circuit about the line, counterclockwise about its
    /// direction.
    pub winding: i64,
    /// n̂·â between loop normal and line direction.
    pub obliquity: f64,
    /// Charge per unit length along the loop normal, C/m.
    pub contribution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetCrossing {
    /// C/m²
    pub sigma: f64,
    /// Winding-weighted length of the sheet's trace inside the loop, m.
    pub weighted_length: f64,
    /// Charge per unit length along the loop normal, C/m.
    pub contribution: f64,
}

/// Charge enclosed by a planar loop, counted per unit length along the loop
/// normal: singular sources by winding, volumetric density by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct EnclosedCharge {
    /// C/m
    pub total: f64,
    /// Right-handed loop normal (zero for a loop of no area).
    pub normal: Vec3,
    pub lines: Vec<LineCrossing>,
    pub sheets: Vec<SheetCrossing>,
    /// ∫ρ dS over the spanning surface, C/m.
    pub volumetric: QuadratureResult,
}

impl EnclosedCharge {
    /// Contribution of the singular sources (lines and sheets), C/m.
    pub fn singular(&self) -> f64 {
        self.lines.iter().map(|l| l.contribution).sum::<f64>() + self.sheets.iter().map(|s| s.contribution).sum::<f64>()
    }
}

/// Enclosed charge of a planar loop, using the flat fan from its centroid.
pub fn enclosed_charge(config: &FieldConfiguration, lp: &InterferometerLoop) -> Result<EnclosedCharge, GeometryError> {
    let surface = SpanningSurface::auto(lp)?;
    enclosed_charge_on(config, &surface, Tolerance::default())
}

/// ∫ f(r)·ρ(r) dS over the surface. Points on a singular locus (the fan
/// apex may sit on a line source) carry no volumetric charge.
pub(crate) fn volumetric_integral(
    config: &FieldConfiguration,
    surface: &SpanningSurface,
    weight: impl Fn(&Vec3) -> f64,
    tol: Tolerance,
) -> Result<QuadratureResult, GeometryError> {
    surface.surface_integral(
        |r, n| match config.eval_rho(r) {
            Ok(rho) => Ok(if rho == 0.0 { 0.0 } else { rho * weight(n) }),
            Err(FieldError::SingularPoint { .. }) => Ok(0.0),
            Err(e) => Err(e),
        },
        tol,
    )
}

pub(crate) fn enclosed_charge_on(
    config: &FieldConfiguration,
    surface: &SpanningSurface,
    tol: Tolerance,
) -> Result<EnclosedCharge, GeometryError> {
    let lp = &surface.boundary;
    let plane = loop_plane(lp);
    let tol_plane = 1e-9 * lp.extent().max(1.0);
    if plane.max_deviation > tol_plane {
        return Err(GeometryError::NonPlanarLoop {
            deviation: plane.max_deviation,
        });
    }
    let n = plane.normal;
    let mut out = EnclosedCharge {
        total: 0.0,
        normal: n,
        lines: Vec::new(),
        sheets: Vec::new(),
        volumetric: QuadratureResult::ZERO,
    };
    if n == Vec3::zeros() {
        return Ok(out);
    }

    for line in config.charge_lines() {
        let dir = line.direction.normalize();
        let obliquity = n.dot(&dir);
        if obliquity.abs() < GRAZING {
            continue;
        }
        let winding = winding_about_line(lp, &line.point, &dir)?;
        out.lines.push(LineCrossing {
            lambda: line.lambda,
            winding,
            obliquity,
            contribution: line.lambda * winding as f64 / obliquity,
        });
    }

    for sheet in config.charge_sheets() {
        let m = sheet.normal.normalize();
        let m_in_plane = m - n * m.dot(&n);
        let sin = m_in_plane.norm();
        if sin < GRAZING {
            continue;
        }
        let k = m_in_plane / sin;
        // Trace of the sheet in the loop plane: through q along n̂×m̂.
        let q = plane.centroid + k * ((sheet.point - plane.centroid).dot(&m) / sin);
        let weighted_length = winding_weighted_length(lp, &n, &q, &n.cross(&m));
        out.sheets.push(SheetCrossing {
            sigma: sheet.sigma,
            weighted_length,
            contribution: sheet.sigma * weighted_length / sin,
        });
    }

    out.volumetric = volumetric_integral(config, surface, |_| 1.0, tol)?;
    out.total = out.singular() + out.volumetric.value;
    Ok(out)
}
