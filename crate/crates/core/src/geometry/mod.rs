//! Interferometer arms and loops, spanning surfaces, loop deformation and
//! the quadrature engine behind every line, time and surface integral.

mod clock;
mod curve;
mod deform;
mod interferometer;
pub mod quadrature;
mod surface;
mod winding;

pub use clock::ArmClock;
pub use curve::{Arm, Curve, Deformation, SpeedProfile, V_MIN};
pub use deform::deform_loop;
pub use interferometer::{
    arm_line_integral, arm_time_integral, min_distance_to_locus, InterferometerLoop, Orientation, PathPoint,
};
pub use quadrature::{QuadratureResult, Tolerance};
pub use surface::{loop_plane, LoopPlane, SpanningSurface, SurfaceMesh};
pub use winding::{winding_about_line, winding_about_point_in_plane, winding_weighted_length};

use thiserror::Error;

use crate::fields::FieldError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{arm} arm passes within {distance:.3e} m of a singular source (exclusion radius {radius:.3e} m)")]
    SingularPathPoint {
        arm: &'static str,
        distance: f64,
        radius: f64,
    },
    #[error("quadrature did not converge: error estimate {achieved:.3e} above target {target:.3e} after {evaluations} evaluations")]
    NonConvergence {
        achieved: f64,
        target: f64,
        evaluations: usize,
    },
    #[error("deformation sweeps through a singular source (at homotopy fraction {fraction:.3})")]
    CrossesSource { fraction: f64 },
    #[error("arms do not share endpoints: start gap {start_gap:.3e} m, end gap {end_gap:.3e} m")]
    EndpointMismatch { start_gap: f64, end_gap: f64 },
    #[error("loop is not planar: deviation {deviation:.3e} m")]
    NonPlanarLoop { deviation: f64 },
    #[error("winding number {value:.4} is not close to an integer")]
    AmbiguousWinding { value: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid speed profile: {0}")]
    InvalidSpeed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl GeometryError {
    pub(crate) fn from_field(err: FieldError, arm: &'static str) -> Self {
        match err {
            FieldError::SingularPoint { distance, radius, .. } => Self::SingularPathPoint { arm, distance, radius },
            other => Self::Field(other),
        }
    }
}
