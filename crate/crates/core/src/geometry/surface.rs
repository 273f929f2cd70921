use std::cell::Cell;

use super::quadrature::{integrate, integrate_pieces, QuadratureResult, Tolerance, DEFAULT_MAX_EVALUATIONS};
use super::{GeometryError, InterferometerLoop};
use crate::fields::FieldError;
use crate::Vec3;

/// Best-fit plane of a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPlane {
    pub centroid: Vec3,
    /// Unit normal, right-handed with respect to the circuit. Zero when the
    /// loop encloses no area.
    pub normal: Vec3,
    /// Enclosed vector area, m².
    pub area: Vec3,
    /// Largest distance of a sampled loop point from the plane, m.
    pub max_deviation: f64,
}

const PLANE_SAMPLES: usize = 512;

/// Newell-style plane fit over dense circuit samples.
pub fn loop_plane(lp: &InterferometerLoop) -> LoopPlane {
    let pts = lp.circuit_samples(PLANE_SAMPLES);
    let centroid = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / pts.len() as f64;
    let mut area = Vec3::zeros();
    for i in 0..pts.len() {
        let a = pts[i] - centroid;
        let b = pts[(i + 1) % pts.len()] - centroid;
        area += a.cross(&b) * 0.5;
    }
    let normal = area.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
    let max_deviation = if normal == Vec3::zeros() {
        0.0
    } else {
        pts.iter()
            .map(|p| (p - centroid).dot(&normal).abs())
            .fold(0.0, f64::max)
    };
    LoopPlane {
        centroid,
        normal,
        area,
        max_deviation,
    }
}

/// Triangle list for debugging output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Cone (a flat fan for planar loops) joining an apex to every point of the
/// loop. The boundary is the loop itself, exactly; the vector area element
/// follows the circuit by the right-hand rule.
#[derive(Debug, Clone)]
pub struct SpanningSurface {
    pub apex: Vec3,
    pub boundary: InterferometerLoop,
}

impl SpanningSurface {
    /// Fan from the centroid. Only valid for planar loops.
    pub fn auto(lp: &InterferometerLoop) -> Result<Self, GeometryError> {
        let plane = loop_plane(lp);
        let tol = 1e-9 * lp.extent().max(1.0);
        if plane.max_deviation > tol {
            return Err(GeometryError::NonPlanarLoop {
                deviation: plane.max_deviation,
            });
        }
        Ok(Self {
            apex: plane.centroid,
            boundary: lp.clone(),
        })
    }

    pub fn with_apex(lp: &InterferometerLoop, apex: Vec3) -> Self {
        Self {
            apex,
            boundary: lp.clone(),
        }
    }

    /// ∫∫ f(r, n̂) dS over the surface. Nested adaptive quadrature: along the
    /// boundary parameter outside, along the apex-to-boundary ray inside.
    pub fn surface_integral<F>(&self, mut f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
    where
        F: FnMut(&Vec3, &Vec3) -> Result<f64, FieldError>,
    {
        let segments = self.boundary.circuit_segments();
        let bounds: Vec<(f64, f64)> = segments.iter().map(|s| (s.1, s.2)).collect();
        let inner_tol = tol.tightened(10.0);
        let worst_inner = Cell::new(0.0f64);
        let inner_evals = Cell::new(0usize);
        let mut pending: Option<GeometryError> = None;

        let outer = integrate_pieces(
            &bounds,
            |i, u| {
                let (arm, _, _, reversed) = segments[i];
                let edge = arm.curve.point(u) - self.apex;
                let sign = if reversed { -1.0 } else { 1.0 };
                // Vector area density at ρ = 1; it scales linearly in ρ.
                let element = edge.cross(&arm.curve.derivative(u)) * sign;
                let magnitude = element.norm();
                if magnitude == 0.0 {
                    return Ok(0.0);
                }
                let normal = element / magnitude;
                match integrate(
                    0.0,
                    1.0,
                    |rho| Ok(f(&(self.apex + edge * rho), &normal)? * rho * magnitude),
                    inner_tol,
                ) {
                    Ok(r) => {
                        worst_inner.set(worst_inner.get().max(r.abs_error_estimate));
                        inner_evals.set(inner_evals.get() + r.evaluations);
                        Ok(r.value)
                    }
                    Err(GeometryError::Field(fe)) => Err(fe),
                    Err(other) => {
                        pending = Some(other);
                        Err(FieldError::InvalidParameter("inner quadrature failed".into()))
                    }
                }
            },
            tol,
            DEFAULT_MAX_EVALUATIONS / 16,
        );
        if let Some(err) = pending {
            return Err(err);
        }
        let outer = outer?;
        let span: f64 = bounds.iter().map(|(a, b)| (b - a).abs()).sum();
        Ok(QuadratureResult {
            value: outer.value,
            abs_error_estimate: outer.abs_error_estimate + worst_inner.get() * span,
            evaluations: outer.evaluations + inner_evals.get(),
        })
    }

    /// Fan triangulation with `rings` concentric rings and `per_arm`
    /// boundary segments on each arm. Vertex 0 is the apex.
    pub fn triangulate(&self, per_arm: usize, rings: usize) -> SurfaceMesh {
        let boundary = self.boundary.circuit_samples(per_arm.max(2));
        let n = boundary.len();
        let rings = rings.max(1);
        let mut vertices = vec![[self.apex.x, self.apex.y, self.apex.z]];
        for k in 1..=rings {
            let rho = k as f64 / rings as f64;
            for b in &boundary {
                let p = self.apex + (b - self.apex) * rho;
                vertices.push([p.x, p.y, p.z]);
            }
        }
        let idx = |ring: usize, j: usize| 1 + (ring - 1) * n + (j % n);
        let mut triangles = Vec::new();
        for j in 0..n {
            triangles.push([0, idx(1, j), idx(1, j + 1)]);
        }
        for k in 1..rings {
            for j in 0..n {
                triangles.push([idx(k, j), idx(k + 1, j), idx(k + 1, j + 1)]);
                triangles.push([idx(k, j), idx(k + 1, j + 1), idx(k, j + 1)]);
            }
        }
        SurfaceMesh { vertices, triangles }
    }
}
