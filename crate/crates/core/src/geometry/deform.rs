use super::{min_distance_to_locus, winding_about_point_in_plane, Deformation, GeometryError, InterferometerLoop};
use crate::fields::{FieldConfiguration, SingularLocus};

/// Homotopy steps checked between the original and the deformed loop.
const HOMOTOPY_STEPS: usize = 32;

fn windings(lp: &InterferometerLoop, loci: &[SingularLocus]) -> Vec<Option<f64>> {
    loci.iter()
        .map(|locus| match locus {
            SingularLocus::Line { point, direction, .. } => winding_about_point_in_plane(lp, point, direction),
            SingularLocus::Point { .. } => Some(0.0),
        })
        .collect()
}

fn clear_of(lp: &InterferometerLoop, loci: &[SingularLocus]) -> bool {
    loci.iter().all(|locus| {
        [&lp.upper, &lp.lower]
            .iter()
            .all(|arm| min_distance_to_locus(arm, locus) >= locus.radius())
    })
}

/// Applies `perturbation` to both arms. The straight-line homotopy from the
/// identity is checked at evenly spaced fractions: every intermediate loop
/// must stay outside all exclusion regions of `guard` and keep its winding
/// about every line source.
pub fn deform_loop(
    lp: &InterferometerLoop,
    perturbation: &Deformation,
    guard: &FieldConfiguration,
) -> Result<InterferometerLoop, GeometryError> {
    let loci = guard.singular_loci();
    let reference = windings(lp, &loci);
    for step in 1..=HOMOTOPY_STEPS {
        let fraction = step as f64 / HOMOTOPY_STEPS as f64;
        let candidate = lp.mapped(&perturbation.partial(fraction));
        if !clear_of(&candidate, &loci) {
            return Err(GeometryError::CrossesSource { fraction });
        }
        let current = windings(&candidate, &loci);
        let same = reference.iter().zip(&current).all(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => (a - b).abs() < 0.5,
            _ => false,
        });
        if !same {
            return Err(GeometryError::CrossesSource { fraction });
        }
    }
    Ok(lp.mapped(perturbation))
}
