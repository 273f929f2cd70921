//! Force-free certification, enclosed-charge accounting, velocity scans and
//! inference of (χ, κ) from measured phases.

mod conditions;
pub mod enclosed;
mod polarizability;
mod velocity;

pub use conditions::{check_conditions, ConditionReport, DIV_B_RELATIVE, FORCE_FREE_RELATIVE};
pub use enclosed::{enclosed_charge, EnclosedCharge, LineCrossing, SheetCrossing};
pub use polarizability::{
    discrepancy_explainer, geometric_phase_ratio, phase_kernels, solve_polarizabilities, Measurement, PhaseKernels,
    PolarizabilitySolution,
};
pub use velocity::{
    fit_velocity_basis, speed_grid, velocity_scan, FitResult, VelocityCoefficients, VelocityScanResult,
    MAX_CONDITION_NUMBER,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::phases::PhaseError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("design matrix condition number {condition_number:.3e} is too large for a reliable fit")]
    IllConditioned { condition_number: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
