//! Phase terms for permanent and induced dipoles, the canonical-momentum
//! oracle and the full decomposition of the interferometer phase.
//!
//! Sign conventions: spatial terms are (1/ħ)∮(P − mv)·dr around the circuit
//! (first arm forward, second arm back), temporal terms are arm differences
//! ∫_first − ∫_second. Both negate when the arms are swapped.

mod breakdown;
mod oracle;
mod species;
mod stark;
mod surface;
mod terms;

pub use breakdown::{total_phase_decomposition, PhaseBreakdown, PhaseTerm};
pub use oracle::{canonical_momentum_closed_form, canonical_momentum_oracle, interaction_lagrangian};
pub use species::{chi_from_alpha, kappa_equivalent, ParticleSpecies};
pub use stark::{
    duality_check, stark_scan_phase, stark_time_route, DualityReport, DualitySensitivity, DEFAULT_MU_PRIME_FACTOR,
};
pub use surface::surface_form_phase;
pub use terms::{
    combined_geometric_phase, induced_electric_phase, induced_magnetic_phase, lepoutre_phase, paper_eq16_variant,
    permanent_dipole_phase, static_spatial_phases, velocity_linear_phase, PermanentDipolePhases,
};

use thiserror::Error;

use crate::fields::{FieldConfiguration, FieldError};
use crate::geometry::{GeometryError, InterferometerLoop};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("configuration contains a {0} field, which has no physical source and is rejected by phase computations")]
    RejectedField(&'static str),
    #[error("B varies by {variation:.3e} (relative) over the spanning surface; the surface form needs uniform B")]
    NonUniformB { variation: f64 },
    #[error("speed {speed:.3e} m/s is below the minimum {minimum:.3e} m/s")]
    DegenerateVelocity { speed: f64, minimum: f64 },
    #[error("invalid species: {0}")]
    InvalidSpecies(String),
}

fn reject_synthetic(config: &FieldConfiguration) -> Result<(), PhaseError> {
    if config.contains_synthetic_monopole() {
        return Err(PhaseError::RejectedField("radial_B_synthetic"));
    }
    Ok(())
}

/// Common preconditions of every loop phase.
fn prepare(species: &ParticleSpecies, config: &FieldConfiguration, lp: &InterferometerLoop) -> Result<(), PhaseError> {
    species.validate()?;
    reject_synthetic(config)?;
    lp.ensure_clear(config)?;
    Ok(())
}
