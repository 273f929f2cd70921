use std::f64::consts::PI;

use super::{GeometryError, InterferometerLoop};
use crate::fields::perpendicular;
use crate::Vec3;

/// Half-width of the band around an integer inside which a winding value
/// is accepted.
const GUARD_BAND: f64 = 0.1;
/// Largest angle step tolerated between consecutive samples, rad.
const MAX_STEP: f64 = 0.25;

/// Raw (unrounded) angle accumulated by the circuit about the line through
/// `point` along `direction`, in turns, counterclockwise about `direction`.
/// `None` when the loop touches or grazes the line.
pub fn winding_about_point_in_plane(lp: &InterferometerLoop, point: &Vec3, direction: &Vec3) -> Option<f64> {
    let dir = direction.try_normalize(0.0)?;
    let mut per_arm = 512;
    loop {
        let pts = lp.circuit_samples(per_arm);
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        let n = pts.len();
        for i in 0..n {
            let a = perpendicular(pts[i] - point, &dir);
            let b = perpendicular(pts[(i + 1) % n] - point, &dir);
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return None;
            }
            let step = a.cross(&b).dot(&dir).atan2(a.dot(&b));
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step <= MAX_STEP {
            return Some(total / (2.0 * PI));
        }
        if per_arm >= 1 << 17 {
            // Still jumping by large angles: the loop grazes the line.
            return None;
        }
        per_arm *= 4;
    }
}

/// Signed number of times the circuit winds about the line through `point`
/// along `direction`, by planar angle accumulation.
pub fn winding_about_line(lp: &InterferometerLoop, point: &Vec3, direction: &Vec3) -> Result<i64, GeometryError> {
    let raw = winding_about_point_in_plane(lp, point, direction)
        .ok_or(GeometryError::AmbiguousWinding { value: f64::NAN })?;
    let rounded = raw.round();
    if (raw - rounded).abs() > GUARD_BAND {
        return Err(GeometryError::AmbiguousWinding { value: raw });
    }
    Ok(rounded as i64)
}

/// Crossing samples per circuit piece when locating line crossings.
const CROSSING_SAMPLES: usize = 2048;

/// ∫ w(s) ds along the in-plane line q + s·t̂, where w is the winding of the
/// circuit about each point of the line (counterclockwise about `normal`).
/// Evaluated exactly from the crossings: a ray from a point on the line
/// towards +t̂ picks up ±1 at every crossing, so ∫ w ds = Σ sign_c·s_c.
pub fn winding_weighted_length(lp: &InterferometerLoop, normal: &Vec3, point: &Vec3, direction: &Vec3) -> f64 {
    let Some(t) = perpendicular(*direction, normal).try_normalize(0.0) else {
        return 0.0;
    };
    let k = normal.cross(&t);
    let side = |r: Vec3| (r - point).dot(&k) >= 0.0;
    let mut total = 0.0;
    // Pieces in true traversal order, bounds running along the circuit.
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    for (arm, a, b, reversed) in lp.circuit_segments() {
        if reversed {
            backward.push((arm, b, a));
        } else {
            forward.push((arm, a, b));
        }
    }
    backward.reverse();
    let segments: Vec<_> = forward.into_iter().chain(backward).collect();
    // Side of the last point of the previous piece (cyclically), so that
    // crossings exactly at arm junctions are not lost.
    let (last_arm, _, last_b) = segments[segments.len() - 1];
    let mut prev_side = side(last_arm.curve.point(last_b));
    for (arm, a, b) in segments {
        let at = |u: f64| arm.curve.point(u);
        let start = side(at(a));
        if start != prev_side {
            total += if start { 1.0 } else { -1.0 } * (at(a) - point).dot(&t);
        }
        prev_side = start;
        let mut prev_u = a;
        for i in 1..=CROSSING_SAMPLES {
            let u = a + (b - a) * i as f64 / CROSSING_SAMPLES as f64;
            let s = side(at(u));
            if s != prev_side {
                // Bisect to adjacent representable parameters.
                let (mut lo, mut hi) = (prev_u, u);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if side(at(mid)) == prev_side {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                // Moving towards +k is counterclockwise as seen from points
                // behind the crossing on the line.
                let sign = if s { 1.0 } else { -1.0 };
                total += sign * (at(hi) - point).dot(&t);
            }
            prev_u = u;
            prev_side = s;
        }
    }
    total
}
