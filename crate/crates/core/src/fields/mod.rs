//! Analytic static field configurations.
//!
//! Every configuration evaluates E(r), B(r) and the volumetric charge
//! density ρ(r) in closed form. Line and point sources declare a singular
//! locus with an exclusion radius; evaluating inside it is an error, never
//! a garbage value.

mod diff;

pub use diff::{numeric_diff, DifferentialSample, FieldSelector, NONCONVERGED_RELATIVE};

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::constants::{C2, EPSILON_0, MU_0};
use crate::Vec3;

/// Default exclusion radius around line and point sources, m.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("point {} lies within {distance:.3e} m of a {kind} source (exclusion radius {radius:.3e} m)", fmt_vec(.point))]
    SingularPoint {
        point: Vec3,
        kind: &'static str,
        distance: f64,
        radius: f64,
    },
    #[error("point {} lies on a field discontinuity; derivatives undefined", fmt_vec(.point))]
    Discontinuity { point: Vec3 },
    #[error("numeric derivative did not converge at {}: two-step relative disagreement {relative_error:.3e}", fmt_vec(&.sample.point))]
    NonConverged {
        relative_error: f64,
        /// Best estimate available despite the failed convergence test.
        sample: Box<DifferentialSample>,
    },
    #[error("invalid field parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn fmt_vec(v: &Vec3) -> String {
    format!("({:.6e}, {:.6e}, {:.6e})", v.x, v.y, v.z)
}

/// A place where fields are undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularLocus {
    /// Infinite straight line through `point` along unit `direction`.
    Line {
        point: Vec3,
        direction: Vec3,
        radius: f64,
    },
    Point {
        position: Vec3,
        radius: f64,
    },
}

impl SingularLocus {
    pub fn distance(&self, r: &Vec3) -> f64 {
        match self {
            SingularLocus::Line { point, direction, .. } => perpendicular(r - point, direction).norm(),
            SingularLocus::Point { position, .. } => (r - position).norm(),
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            SingularLocus::Line { radius, .. } | SingularLocus::Point { radius, .. } => *radius,
        }
    }

    pub fn contains(&self, r: &Vec3) -> bool {
        self.distance(r) < self.radius()
    }
}

/// An infinite sheet of surface charge, as found on the faces of a septum
/// capacitor. `sigma` is in C/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeSheet {
    pub point: Vec3,
    pub normal: Vec3,
    pub sigma: f64,
}

/// An infinite line of charge, C/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeLine {
    pub lambda: f64,
    pub point: Vec3,
    pub direction: Vec3,
}

/// Analytic field configuration.
///
/// Construct through the associated functions, which validate and
/// normalise parameters. Configurations are immutable and `Sync`.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldConfiguration {
    UniformE {
        e: Vec3,
    },
    UniformB {
        b: Vec3,
    },
    LineCharge {
        lambda: f64,
        axis_point: Vec3,
        axis_dir: Vec3,
        exclusion_radius: f64,
    },
    PointCharge {
        charge: f64,
        position: Vec3,
        exclusion_radius: f64,
    },
    /// Piecewise-constant field on either side of a septum plane through
    /// `origin` with unit `normal`. `e_upper` fills 0 < s ≤ half_width,
    /// `e_lower` fills -half_width ≤ s < 0, where s is the signed distance
    /// along `normal`. Zero elsewhere and on the septum itself.
    ParallelPlateSeptum {
        origin: Vec3,
        normal: Vec3,
        e_upper: Vec3,
        e_lower: Vec3,
        half_width: f64,
    },
    StraightCurrentWire {
        current: f64,
        axis_point: Vec3,
        axis_dir: Vec3,
        exclusion_radius: f64,
    },
    /// B = g (r - c)/|r - c|³. Violates ∇·B = 0 at the centre; exists only
    /// so the divergence guard has something to catch.
    RadialBSynthetic {
        strength: f64,
        center: Vec3,
        exclusion_radius: f64,
    },
    Superposition(Vec<FieldConfiguration>),
}

fn finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn unit(v: Vec3, what: &str) -> Result<Vec3, FieldError> {
    let n = v.norm();
    if !n.is_finite() || n == 0.0 {
        return Err(FieldError::InvalidParameter(format!(
            "{what} must be a finite nonzero vector"
        )));
    }
    Ok(v / n)
}

fn check_finite(v: &Vec3, what: &str) -> Result<(), FieldError> {
    if finite(v) {
        Ok(())
    } else {
        Err(FieldError::InvalidParameter(format!("{what} must be finite")))
    }
}

fn check_scalar(x: f64, what: &str) -> Result<(), FieldError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(FieldError::InvalidParameter(format!("{what} must be finite")))
    }
}

fn check_radius(r: f64) -> Result<(), FieldError> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(FieldError::InvalidParameter("exclusion radius must be positive".into()))
    }
}

/// Component of `v` perpendicular to unit `dir`.
#[inline]
pub(crate) fn perpendicular(v: Vec3, dir: &Vec3) -> Vec3 {
    v - dir * v.dot(dir)
}

impl FieldConfiguration {
    pub fn uniform_e(e: Vec3) -> Result<Self, FieldError> {
        check_finite(&e, "E")?;
        Ok(Self::UniformE { e })
    }

    pub fn uniform_b(b: Vec3) -> Result<Self, FieldError> {
        check_finite(&b, "B")?;
        Ok(Self::UniformB { b })
    }

    pub fn line_charge(lambda: f64, axis_point: Vec3, axis_dir: Vec3) -> Result<Self, FieldError> {
        check_scalar(lambda, "lambda")?;
        check_finite(&axis_point, "axis point")?;
        Ok(Self::LineCharge {
            lambda,
            axis_point,
            axis_dir: unit(axis_dir, "axis direction")?,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        })
    }

    pub fn point_charge(charge: f64, position: Vec3) -> Result<Self, FieldError> {
        check_scalar(charge, "charge")?;
        check_finite(&position, "position")?;
        Ok(Self::PointCharge {
            charge,
            position,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        })
    }

    pub fn septum(
        origin: Vec3,
        normal: Vec3,
        e_upper: Vec3,
        e_lower: Vec3,
        half_width: f64,
    ) -> Result<Self, FieldError> {
        check_finite(&origin, "septum origin")?;
        check_finite(&e_upper, "E_upper")?;
        check_finite(&e_lower, "E_lower")?;
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(FieldError::InvalidParameter(
                "septum half width must be positive".into(),
            ));
        }
        Ok(Self::ParallelPlateSeptum {
            origin,
            normal: unit(normal, "septum normal")?,
            e_upper,
            e_lower,
            half_width,
        })
    }

    pub fn current_wire(current: f64, axis_point: Vec3, axis_dir: Vec3) -> Result<Self, FieldError> {
        check_scalar(current, "current")?;
        check_finite(&axis_point, "axis point")?;
        Ok(Self::StraightCurrentWire {
            current,
            axis_point,
            axis_dir: unit(axis_dir, "axis direction")?,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        })
    }

    pub fn radial_b_synthetic(strength: f64, center: Vec3) -> Result<Self, FieldError> {
        check_scalar(strength, "strength")?;
        check_finite(&center, "center")?;
        Ok(Self::RadialBSynthetic {
            strength,
            center,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
        })
    }

    pub fn superposition(children: Vec<FieldConfiguration>) -> Self {
        Self::Superposition(children)
    }

    /// Replaces the exclusion radius of every singular source.
    pub fn with_exclusion_radius(mut self, radius: f64) -> Result<Self, FieldError> {
        check_radius(radius)?;
        self.set_exclusion_radius(radius);
        Ok(self)
    }

    fn set_exclusion_radius(&mut self, radius: f64) {
        match self {
            Self::LineCharge { exclusion_radius, .. }
            | Self::PointCharge { exclusion_radius, .. }
            | Self::StraightCurrentWire { exclusion_radius, .. }
            | Self::RadialBSynthetic { exclusion_radius, .. } => *exclusion_radius = radius,
            Self::Superposition(children) => children.iter_mut().for_each(|c| c.set_exclusion_radius(radius)),
            _ => {}
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::UniformE { .. } => "uniform_E",
            Self::UniformB { .. } => "uniform_B",
            Self::LineCharge { .. } => "line_charge",
            Self::PointCharge { .. } => "point_charge",
            Self::ParallelPlateSeptum { .. } => "parallel_plate_septum",
            Self::StraightCurrentWire { .. } => "straight_current_wire",
            Self::RadialBSynthetic { .. } => "radial_B_synthetic",
            Self::Superposition(_) => "superposition",
        }
    }

    /// Visits every non-superposition leaf.
    pub fn leaves(&self) -> Vec<&FieldConfiguration> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a FieldConfiguration>) {
        match self {
            Self::Superposition(children) => children.iter().for_each(|c| c.collect_leaves(out)),
            leaf => out.push(leaf),
        }
    }

    /// The exclusion regions of all sources in the configuration.
    pub fn singular_loci(&self) -> Vec<SingularLocus> {
        self.leaves()
            .into_iter()
            .filter_map(|leaf| match *leaf {
                Self::LineCharge {
                    axis_point,
                    axis_dir,
                    exclusion_radius,
                    ..
                }
                | Self::StraightCurrentWire {
                    axis_point,
                    axis_dir,
                    exclusion_radius,
                    ..
                } => Some(SingularLocus::Line {
                    point: axis_point,
                    direction: axis_dir,
                    radius: exclusion_radius,
                }),
                Self::PointCharge {
                    position,
                    exclusion_radius,
                    ..
                } => Some(SingularLocus::Point {
                    position,
                    radius: exclusion_radius,
                }),
                Self::RadialBSynthetic {
                    center,
                    exclusion_radius,
                    ..
                } => Some(SingularLocus::Point {
                    position: center,
                    radius: exclusion_radius,
                }),
                _ => None,
            })
            .collect()
    }

    pub fn charge_lines(&self) -> Vec<ChargeLine> {
        self.leaves()
            .into_iter()
            .filter_map(|leaf| match *leaf {
                Self::LineCharge {
                    lambda,
                    axis_point,
                    axis_dir,
                    ..
                } => Some(ChargeLine {
                    lambda,
                    point: axis_point,
                    direction: axis_dir,
                }),
                _ => None,
            })
            .collect()
    }

    /// Total charge of point sources (C).
    pub fn point_charges(&self) -> Vec<(f64, Vec3)> {
        self.leaves()
            .into_iter()
            .filter_map(|leaf| match *leaf {
                Self::PointCharge { charge, position, .. } => Some((charge, position)),
                _ => None,
            })
            .collect()
    }

    /// Surface charges implied by the field jumps of septum configurations.
    pub fn charge_sheets(&self) -> Vec<ChargeSheet> {
        let mut sheets = Vec::new();
        for leaf in self.leaves() {
            if let Self::ParallelPlateSeptum {
                origin,
                normal,
                e_upper,
                e_lower,
                half_width,
            } = *leaf
            {
                let jumps = [
                    (origin, (e_upper - e_lower).dot(&normal)),
                    (origin + normal * half_width, -e_upper.dot(&normal)),
                    (origin - normal * half_width, e_lower.dot(&normal)),
                ];
                for (point, jump) in jumps {
                    if jump != 0.0 {
                        sheets.push(ChargeSheet {
                            point,
                            normal,
                            sigma: EPSILON_0 * jump,
                        });
                    }
                }
            }
        }
        sheets
    }

    /// Planes on which the field is discontinuous (septum faces).
    pub(crate) fn discontinuity_planes(&self) -> Vec<(Vec3, Vec3)> {
        let mut planes = Vec::new();
        for leaf in self.leaves() {
            if let Self::ParallelPlateSeptum {
                origin,
                normal,
                half_width,
                ..
            } = *leaf
            {
                planes.push((origin, normal));
                planes.push((origin + normal * half_width, normal));
                planes.push((origin - normal * half_width, normal));
            }
        }
        planes
    }

    /// Net magnetic charge ∮B·dS of the configuration (T·m²). Nonzero only
    /// for configurations containing the synthetic monopole.
    pub fn magnetic_charge(&self) -> f64 {
        self.leaves()
            .into_iter()
            .map(|leaf| match *leaf {
                Self::RadialBSynthetic { strength, .. } => 4.0 * PI * strength,
                _ => 0.0,
            })
            .sum()
    }

    pub fn contains_synthetic_monopole(&self) -> bool {
        self.leaves().iter().any(|l| matches!(l, Self::RadialBSynthetic { .. }))
    }

    /// Characteristic length near `r`: distance to the nearest source locus
    /// or discontinuity, capped at 1 m.
    pub fn length_scale(&self, r: &Vec3) -> f64 {
        let mut scale: f64 = 1.0;
        for locus in self.singular_loci() {
            scale = scale.min(locus.distance(r));
        }
        for (point, normal) in self.discontinuity_planes() {
            scale = scale.min((r - point).dot(&normal).abs());
        }
        scale
    }

    /// Fails if `r` is inside any exclusion region.
    pub fn check_regular(&self, r: &Vec3) -> Result<(), FieldError> {
        for leaf in self.leaves() {
            leaf.check_leaf(r)?;
        }
        Ok(())
    }

    fn check_leaf(&self, r: &Vec3) -> Result<(), FieldError> {
        let (locus, kind) = match *self {
            Self::LineCharge {
                axis_point,
                axis_dir,
                exclusion_radius,
                ..
            } => (
                SingularLocus::Line {
                    point: axis_point,
                    direction: axis_dir,
                    radius: exclusion_radius,
                },
                "line_charge",
            ),
            Self::StraightCurrentWire {
                axis_point,
                axis_dir,
                exclusion_radius,
                ..
            } => (
                SingularLocus::Line {
                    point: axis_point,
                    direction: axis_dir,
                    radius: exclusion_radius,
                },
                "straight_current_wire",
            ),
            Self::PointCharge {
                position,
                exclusion_radius,
                ..
            } => (
                SingularLocus::Point {
                    position,
                    radius: exclusion_radius,
                },
                "point_charge",
            ),
            Self::RadialBSynthetic {
                center,
                exclusion_radius,
                ..
            } => (
                SingularLocus::Point {
                    position: center,
                    radius: exclusion_radius,
                },
                "radial_B_synthetic",
            ),
            _ => return Ok(()),
        };
        let distance = locus.distance(r);
        // `!(a >= b)` also rejects NaN distances.
        if !(distance >= locus.radius()) {
            return Err(FieldError::SingularPoint {
                point: *r,
                kind,
                distance,
                radius: locus.radius(),
            });
        }
        Ok(())
    }

    /// Electric field at `r`, V/m.
    pub fn eval_e(&self, r: &Vec3) -> Result<Vec3, FieldError> {
        self.check_regular(r)?;
        Ok(self.e_unchecked(r))
    }

    /// Magnetic flux density at `r`, T.
    pub fn eval_b(&self, r: &Vec3) -> Result<Vec3, FieldError> {
        self.check_regular(r)?;
        Ok(self.b_unchecked(r))
    }

    /// Both fields with a single exclusion check.
    pub fn eval_eb(&self, r: &Vec3) -> Result<(Vec3, Vec3), FieldError> {
        self.check_regular(r)?;
        Ok((self.e_unchecked(r), self.b_unchecked(r)))
    }

    /// Volumetric charge density, C/m³. All provided kinds are source-free
    /// off their singular loci and discontinuity planes; line and point
    /// charges are reported through [`Self::charge_lines`] and
    /// [`Self::point_charges`] instead.
    pub fn eval_rho(&self, r: &Vec3) -> Result<f64, FieldError> {
        self.check_regular(r)?;
        Ok(0.0)
    }

    fn e_unchecked(&self, r: &Vec3) -> Vec3 {
        match self {
            Self::UniformE { e } => *e,
            Self::LineCharge {
                lambda,
                axis_point,
                axis_dir,
                ..
            } => {
                let rho = perpendicular(r - axis_point, axis_dir);
                rho * (lambda / (2.0 * PI * EPSILON_0 * rho.norm_squared()))
            }
            Self::PointCharge { charge, position, .. } => {
                let d = r - position;
                let n = d.norm();
                d * (charge / (4.0 * PI * EPSILON_0 * n * n * n))
            }
            Self::ParallelPlateSeptum {
                origin,
                normal,
                e_upper,
                e_lower,
                half_width,
            } => {
                let s = (r - origin).dot(normal);
                if s > 0.0 && s <= *half_width {
                    *e_upper
                } else if s < 0.0 && s >= -*half_width {
                    *e_lower
                } else {
                    Vec3::zeros()
                }
            }
            Self::Superposition(children) => children.iter().fold(Vec3::zeros(), |acc, c| acc + c.e_unchecked(r)),
            Self::UniformB { .. } | Self::StraightCurrentWire { .. } | Self::RadialBSynthetic { .. } => Vec3::zeros(),
        }
    }

    fn b_unchecked(&self, r: &Vec3) -> Vec3 {
        match self {
            Self::UniformB { b } => *b,
            Self::StraightCurrentWire {
                current,
                axis_point,
                axis_dir,
                ..
            } => {
                let rho = perpendicular(r - axis_point, axis_dir);
                axis_dir.cross(&rho) * (MU_0 * current / (2.0 * PI * rho.norm_squared()))
            }
            Self::RadialBSynthetic { strength, center, .. } => {
                let d = r - center;
                let n = d.norm();
                d * (strength / (n * n * n))
            }
            Self::Superposition(children) => children.iter().fold(Vec3::zeros(), |acc, c| acc + c.b_unchecked(r)),
            Self::UniformE { .. }
            | Self::LineCharge { .. }
            | Self::PointCharge { .. }
            | Self::ParallelPlateSeptum { .. } => Vec3::zeros(),
        }
    }

    /// Effective potentials seen by an induced magnetic dipole:
    /// 𝒜 = (B − v×E/c²)×E and 𝒱 = −B²/2. The polarizability κ is kept
    /// out of both; phases multiply it back in.
    pub fn effective_potential_magnetic(&self, r: &Vec3, v: &Vec3) -> Result<EffectivePotential, FieldError> {
        let (e, b) = self.eval_eb(r)?;
        Ok(magnetic_potential(&e, &b, v))
    }

    /// Effective potentials seen by an induced electric dipole:
    /// 𝒜̃ = −(E + v×B)×B and 𝒱̃ = −E²/2.
    pub fn effective_potential_electric(&self, r: &Vec3, v: &Vec3) -> Result<EffectivePotential, FieldError> {
        let (e, b) = self.eval_eb(r)?;
        Ok(electric_potential(&e, &b, v))
    }
}

/// Vector/scalar pair of an effective gauge potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePotential {
    pub vector: Vec3,
    pub scalar: f64,
}

/// Magnetic flux density in the particle rest frame, first order in v/c.
#[inline]
pub fn rest_frame_b(e: &Vec3, b: &Vec3, v: &Vec3) -> Vec3 {
    b - v.cross(e) / C2
}

/// Electric field in the particle rest frame, first order in v/c.
#[inline]
pub fn rest_frame_e(e: &Vec3, b: &Vec3, v: &Vec3) -> Vec3 {
    e + v.cross(b)
}

#[inline]
pub(crate) fn magnetic_potential(e: &Vec3, b: &Vec3, v: &Vec3) -> EffectivePotential {
    EffectivePotential {
        vector: rest_frame_b(e, b, v).cross(e),
        scalar: -0.5 * b.norm_squared(),
    }
}

#[inline]
pub(crate) fn electric_potential(e: &Vec3, b: &Vec3, v: &Vec3) -> EffectivePotential {
    EffectivePotential {
        vector: -rest_frame_e(e, b, v).cross(b),
        scalar: -0.5 * e.norm_squared(),
    }
}

impl fmt::Display for FieldConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Superposition(children) => {
                write!(f, "superposition[")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")
            }
            other => f.write_str(other.kind_name()),
        }
    }
}
