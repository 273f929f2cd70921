//! Scenario files and the CSV inputs of the command-line front end.
//!
//! A scenario is a JSON document with four sections: `particle`, `fields`,
//! `loop` and optional `options`. Unknown keys are rejected. Errors carry
//! the JSON path of the offending value and, for syntax and type errors,
//! the line and column.

mod spec;
mod tables;

pub use spec::{
    ArmSpec, CircleSpec, FieldSpec, LoopSpec, OptionsSpec, ParticleSpec, PathSpec, ScenarioSpec, SpeedSpec, SurfaceSpec,
};
pub use tables::{parse_measurements, parse_vscan_csv, MeasurementRow, VscanTable};

use std::f64::consts::PI;
use std::path::Path;

use thiserror::Error;

use crate::constants::FOUR_PI_EPSILON_0;
use crate::fields::FieldConfiguration;
use crate::geometry::{Arm, Curve, GeometryError, InterferometerLoop, SpanningSurface, SpeedProfile, Tolerance};
use crate::phases::{chi_from_alpha, ParticleSpecies};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {path}: {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, message: impl ToString) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// Which spanning surface the surface-form phase uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceChoice {
    Auto,
    Apex(Vec3),
}

/// A validated scenario, ready for computation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub species: ParticleSpecies,
    pub config: FieldConfiguration,
    pub lp: InterferometerLoop,
    pub tol: Tolerance,
    pub tube_radius: f64,
    pub surface: SurfaceChoice,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_str_named(&text, name)
    }

    pub fn from_str_named(text: &str, name: impl Into<String>) -> Result<Self, ScenarioError> {
        parse_spec(text)?.build(name.into())
    }

    pub fn spanning_surface(&self) -> Result<SpanningSurface, GeometryError> {
        match self.surface {
            SurfaceChoice::Auto => SpanningSurface::auto(&self.lp),
            SurfaceChoice::Apex(apex) => Ok(SpanningSurface::with_apex(&self.lp, apex)),
        }
    }
}

/// Parses without building; errors are located by JSON path, line and column.
pub fn parse_spec(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ScenarioSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Syntax {
            path,
            line: inner.line(),
            column: inner.column(),
            message: strip_position(&inner.to_string()),
        }
    })?;
    Ok(spec)
}

/// serde_json appends " at line L column C"; the error type reports both separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl ScenarioSpec {
    pub fn build(self, name: String) -> Result<Scenario, ScenarioError> {
        let species = self.particle.build()?;
        let mut leaves = Vec::with_capacity(self.fields.len());
        for (i, f) in self.fields.iter().enumerate() {
            leaves.push(
                f.build()
                    .map_err(|e| ScenarioError::invalid(format!("fields[{i}]"), e))?,
            );
        }
        let config = if leaves.len() == 1 {
            leaves.pop().expect("one leaf")
        } else {
            FieldConfiguration::superposition(leaves)
        };
        let lp = self.loop_.build()?;
        let options = self.options;
        if !(options.tol > 0.0 && options.tol < 1.0) {
            return Err(ScenarioError::invalid("options.tol", "must lie in (0, 1)"));
        }
        if !(options.tube_radius >= 0.0 && options.tube_radius.is_finite()) {
            return Err(ScenarioError::invalid(
                "options.tube_radius",
                "must be a nonnegative length",
            ));
        }
        let surface = match options.surface {
            SurfaceSpec::Auto => SurfaceChoice::Auto,
            SurfaceSpec::Apex(a) => {
                if !a.iter().all(|x| x.is_finite()) {
                    return Err(ScenarioError::invalid("options.surface.apex", "must be finite"));
                }
                SurfaceChoice::Apex(v3(a))
            }
        };
        Ok(Scenario {
            name,
            description: self.description,
            species,
            config,
            lp,
            tol: Tolerance::relative(options.tol),
            tube_radius: options.tube_radius,
            surface,
        })
    }
}

impl ParticleSpec {
    fn build(&self) -> Result<ParticleSpecies, ScenarioError> {
        // Either of χ and α determines the other; if both are given they must agree.
        let (chi, alpha) = match (self.chi, self.alpha_vol_m3) {
            (None, None) => (0.0, 0.0),
            (Some(chi), None) => (chi, chi / FOUR_PI_EPSILON_0),
            (None, Some(alpha)) => (chi_from_alpha(alpha), alpha),
            (Some(chi), Some(alpha)) => {
                let implied = chi_from_alpha(alpha);
                if !((chi - implied).abs() <= 1e-9 * chi.abs().max(implied.abs())) {
                    return Err(ScenarioError::invalid(
                        "particle",
                        format!("chi = {chi:e} disagrees with alpha_vol_m3, which implies chi = {implied:e}"),
                    ));
                }
                (chi, alpha)
            }
        };
        let species = ParticleSpecies {
            mass: self.mass_kg,
            d0: v3(self.d0),
            mu0: v3(self.mu0),
            chi,
            kappa: self.kappa,
            alpha_vol: alpha,
        };
        species.validate().map_err(|e| ScenarioError::invalid("particle", e))?;
        Ok(species)
    }
}

impl FieldSpec {
    fn build(&self) -> Result<FieldConfiguration, crate::fields::FieldError> {
        let with_radius = |c: FieldConfiguration, r: Option<f64>| match r {
            Some(r) => c.with_exclusion_radius(r),
            None => Ok(c),
        };
        match self {
            FieldSpec::UniformE { e } => FieldConfiguration::uniform_e(v3(*e)),
            FieldSpec::UniformB { b } => FieldConfiguration::uniform_b(v3(*b)),
            FieldSpec::LineCharge {
                lambda,
                point,
                direction,
                exclusion_radius,
            } => with_radius(
                FieldConfiguration::line_charge(*lambda, v3(*point), v3(*direction))?,
                *exclusion_radius,
            ),
            FieldSpec::PointCharge {
                charge,
                position,
                exclusion_radius,
            } => with_radius(
                FieldConfiguration::point_charge(*charge, v3(*position))?,
                *exclusion_radius,
            ),
            FieldSpec::ParallelPlateSeptum {
                origin,
                normal,
                e_upper,
                e_lower,
                half_width,
            } => FieldConfiguration::septum(v3(*origin), v3(*normal), v3(*e_upper), v3(*e_lower), *half_width),
            FieldSpec::StraightCurrentWire {
                current,
                point,
                direction,
                exclusion_radius,
            } => with_radius(
                FieldConfiguration::current_wire(*current, v3(*point), v3(*direction))?,
                *exclusion_radius,
            ),
            FieldSpec::RadialBSynthetic {
                strength,
                center,
                exclusion_radius,
            } => with_radius(
                FieldConfiguration::radial_b_synthetic(*strength, v3(*center))?,
                *exclusion_radius,
            ),
        }
    }
}

impl SpeedSpec {
    fn build(&self) -> Result<SpeedProfile, GeometryError> {
        match self {
            SpeedSpec::Constant(v) => SpeedProfile::constant(*v),
            SpeedSpec::Knots(k) => SpeedProfile::piecewise_linear(k.iter().map(|p| (p[0], p[1])).collect()),
        }
    }
}

impl PathSpec {
    fn build(&self) -> Result<Curve, GeometryError> {
        match self {
            PathSpec::Polyline(points) => Curve::polyline(points.iter().copied().map(v3).collect()),
            PathSpec::Arc {
                center,
                normal,
                reference,
                radius,
                radius_end,
                angle_start,
                angle_end,
            } => Curve::arc(
                v3(*center),
                v3(*normal),
                v3(*reference),
                *radius,
                radius_end.unwrap_or(*radius),
                *angle_start,
                *angle_end,
            ),
        }
    }
}

impl LoopSpec {
    fn build(&self) -> Result<InterferometerLoop, ScenarioError> {
        let arm = |spec: &ArmSpec, label: &str| -> Result<Arm, ScenarioError> {
            let curve = spec
                .path
                .build()
                .map_err(|e| ScenarioError::invalid(format!("loop.arms.{label}.path"), e))?;
            let speed = spec
                .speed
                .build()
                .map_err(|e| ScenarioError::invalid(format!("loop.arms.{label}.speed"), e))?;
            Arm::new(curve, speed).map_err(|e| ScenarioError::invalid(format!("loop.arms.{label}"), e))
        };
        match self {
            LoopSpec::Circle(c) => {
                if c.winding == 0 {
                    return Err(ScenarioError::invalid("loop.circle.winding", "must be at least 1"));
                }
                let half = PI * c.winding as f64;
                let path = |end: f64| PathSpec::Arc {
                    center: c.center,
                    normal: c.normal,
                    reference: c.reference,
                    radius: c.radius,
                    radius_end: None,
                    angle_start: 0.0,
                    angle_end: end,
                };
                let make = |end: f64| -> Result<Arm, ScenarioError> {
                    let curve = path(end)
                        .build()
                        .map_err(|e| ScenarioError::invalid("loop.circle", e))?;
                    let speed = c
                        .speed
                        .build()
                        .map_err(|e| ScenarioError::invalid("loop.circle.speed", e))?;
                    Arm::new(curve, speed).map_err(|e| ScenarioError::invalid("loop.circle", e))
                };
                InterferometerLoop::new(make(half)?, make(-half)?).map_err(|e| ScenarioError::invalid("loop.circle", e))
            }
            LoopSpec::Arms { upper, lower } => InterferometerLoop::new(arm(upper, "upper")?, arm(lower, "lower")?)
                .map_err(|e| ScenarioError::invalid("loop.arms", e)),
        }
    }
}
