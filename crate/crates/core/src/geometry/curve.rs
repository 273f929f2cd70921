use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use super::GeometryError;
use crate::Vec3;

/// Lowest admissible particle speed, m/s. Time integrals diverge as v → 0.
pub const V_MIN: f64 = 1e-6;

/// A smooth map of space, used to deform loops.
#[derive(Clone)]
pub struct Deformation {
    name: String,
    map: Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>,
    identity: bool,
}

impl Deformation {
    pub fn new(name: impl Into<String>, map: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            map: Arc::new(map),
            identity: false,
        }
    }

    pub fn identity() -> Self {
        Self {
            identity: true,
            ..Self::new("identity", |p| *p)
        }
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn translation(offset: Vec3) -> Self {
        Self::new("translation", move |p| p + offset)
    }

    /// Uniform scaling about `center`.
    pub fn scaling(center: Vec3, factor: f64) -> Self {
        Self::new("scaling", move |p| center + (p - center) * factor)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (self.map)(p)
    }

    /// Straight-line homotopy from the identity: p ↦ p + t(φ(p) − p).
    pub fn partial(&self, t: f64) -> Self {
        if self.identity {
            return self.clone();
        }
        let inner = self.clone();
        Self::new(format!("{}@{t}", self.name), move |p| p + (inner.apply(p) - p) * t)
    }

    /// Directional derivative J(p)·d, Richardson-extrapolated central
    /// differences with spatial step ~1e-4·|d|.
    fn push_forward(&self, p: &Vec3, d: &Vec3) -> Vec3 {
        let diff = |delta: f64| (self.apply(&(p + d * delta)) - self.apply(&(p - d * delta))) / (2.0 * delta);
        let coarse = diff(1e-4);
        let fine = diff(5e-5);
        (fine * 4.0 - coarse) / 3.0
    }
}

impl fmt::Debug for Deformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Deformation").field("name", &self.name).finish()
    }
}

/// Parametric curve on u ∈ [0, 1].
#[derive(Debug, Clone)]
pub enum Curve {
    /// Straight segments, parametrised by arclength fraction.
    Polyline {
        points: Vec<Vec3>,
        /// Arclength fraction at each vertex; first 0, last 1.
        knots: Vec<f64>,
        length: f64,
    },
    /// Circular arc (or Archimedean spiral when the radii differ) in the
    /// plane spanned by orthonormal `e1`, `e2`, angle measured from `e1`
    /// towards `e2`.
    Arc {
        center: Vec3,
        e1: Vec3,
        e2: Vec3,
        radius_start: f64,
        radius_end: f64,
        angle_start: f64,
        angle_end: f64,
    },
    Mapped {
        base: Box<Curve>,
        map: Deformation,
    },
}

impl Curve {
    pub fn polyline(points: Vec<Vec3>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::InvalidCurve("polyline needs at least two points".into()));
        }
        if points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(GeometryError::InvalidCurve("polyline point is not finite".into()));
        }
        let mut cumulative = vec![0.0];
        for (i, w) in points.windows(2).enumerate() {
            let len = (w[1] - w[0]).norm();
            if !(len > 0.0) {
                return Err(GeometryError::InvalidCurve(format!(
                    "polyline segment {i} has zero length"
                )));
            }
            cumulative.push(cumulative[i] + len);
        }
        let length = *cumulative.last().unwrap();
        let mut knots: Vec<f64> = cumulative.iter().map(|c| c / length).collect();
        *knots.last_mut().unwrap() = 1.0;
        Ok(Self::Polyline { points, knots, length })
    }

    /// Polyline through `n + 1` samples of an analytic curve.
    pub fn sampled(n: usize, f: impl Fn(f64) -> Vec3) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidCurve("need at least one segment".into()));
        }
        Self::polyline((0..=n).map(|i| f(i as f64 / n as f64)).collect())
    }

    /// Arc about `center` in the plane with unit normal `normal`. Angles are
    /// measured counterclockwise about `normal` from `reference` (projected
    /// into the plane).
    #[allow(clippy::too_many_arguments)]
    pub fn arc(
        center: Vec3,
        normal: Vec3,
        reference: Vec3,
        radius_start: f64,
        radius_end: f64,
        angle_start: f64,
        angle_end: f64,
    ) -> Result<Self, GeometryError> {
        let n = normal
            .try_normalize(0.0)
            .ok_or_else(|| GeometryError::InvalidCurve("arc normal must be nonzero".into()))?;
        let e1 = (reference - n * reference.dot(&n))
            .try_normalize(1e-12)
            .ok_or_else(|| GeometryError::InvalidCurve("arc reference direction is parallel to normal".into()))?;
        let e2 = n.cross(&e1);
        let ok = |x: f64| x.is_finite();
        if !(radius_start > 0.0 && radius_end > 0.0 && ok(radius_start) && ok(radius_end)) {
            return Err(GeometryError::InvalidCurve("arc radii must be positive".into()));
        }
        if !(ok(angle_start) && ok(angle_end)) || angle_start == angle_end {
            return Err(GeometryError::InvalidCurve(
                "arc must sweep a nonzero finite angle".into(),
            ));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidCurve("arc center is not finite".into()));
        }
        Ok(Self::Arc {
            center,
            e1,
            e2,
            radius_start,
            radius_end,
            angle_start,
            angle_end,
        })
    }

    pub fn mapped(self, map: Deformation) -> Self {
        if map.is_identity() {
            return self;
        }
        Self::Mapped {
            base: Box::new(self),
            map,
        }
    }

    fn segment_index(knots: &[f64], u: f64) -> usize {
        let last = knots.len() - 2;
        match knots.binary_search_by(|k| k.total_cmp(&u)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    pub fn point(&self, u: f64) -> Vec3 {
        match self {
            Self::Polyline { points, knots, .. } => {
                let i = Self::segment_index(knots, u);
                let t = (u - knots[i]) / (knots[i + 1] - knots[i]);
                points[i] + (points[i + 1] - points[i]) * t
            }
            Self::Arc {
                center,
                e1,
                e2,
                radius_start,
                radius_end,
                angle_start,
                angle_end,
            } => {
                let theta = angle_start + u * (angle_end - angle_start);
                let rho = radius_start + u * (radius_end - radius_start);
                center + (e1 * theta.cos() + e2 * theta.sin()) * rho
            }
            Self::Mapped { base, map } => map.apply(&base.point(u)),
        }
    }

    /// dr/du.
    pub fn derivative(&self, u: f64) -> Vec3 {
        match self {
            Self::Polyline { points, knots, .. } => {
                let i = Self::segment_index(knots, u);
                (points[i + 1] - points[i]) / (knots[i + 1] - knots[i])
            }
            Self::Arc {
                e1,
                e2,
                radius_start,
                radius_end,
                angle_start,
                angle_end,
                ..
            } => {
                let sweep = angle_end - angle_start;
                let theta = angle_start + u * sweep;
                let rho = radius_start + u * (radius_end - radius_start);
                let (s, c) = theta.sin_cos();
                (e1 * c + e2 * s) * (radius_end - radius_start) + (e2 * c - e1 * s) * (rho * sweep)
            }
            Self::Mapped { base, map } => map.push_forward(&base.point(u), &base.derivative(u)),
        }
    }

    /// Parameters where the curve may have a corner, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Polyline { knots, .. } => knots.clone(),
            Self::Arc {
                angle_start, angle_end, ..
            } => {
                let quarters = ((angle_end - angle_start).abs() / FRAC_PI_2).ceil().max(1.0) as usize;
                (0..=quarters).map(|k| k as f64 / quarters as f64).collect()
            }
            Self::Mapped { base, .. } => base.breakpoints(),
        }
    }
}

/// Speed along an arm as a function of the curve parameter u.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeedProfile {
    Constant(f64),
    /// Linear interpolation between `(u, speed)` knots; u runs 0 → 1.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl SpeedProfile {
    pub fn constant(speed: f64) -> Result<Self, GeometryError> {
        let p = Self::Constant(speed);
        p.validate()?;
        Ok(p)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        let p = Self::PiecewiseLinear(knots);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Self::Constant(v) => check_speed(*v),
            Self::PiecewiseLinear(knots) => {
                if knots.len() < 2 {
                    return Err(GeometryError::InvalidSpeed(
                        "speed profile needs at least two knots".into(),
                    ));
                }
                if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
                    return Err(GeometryError::InvalidSpeed(
                        "speed knots must start at u = 0 and end at u = 1".into(),
                    ));
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(GeometryError::InvalidSpeed(
                        "speed knots must be strictly increasing in u".into(),
                    ));
                }
                knots.iter().try_for_each(|k| check_speed(k.1))
            }
        }
    }

    pub fn speed(&self, u: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::PiecewiseLinear(knots) => {
                let i = knots.partition_point(|k| k.0 <= u).clamp(1, knots.len() - 1);
                let (u0, v0) = knots[i - 1];
                let (u1, v1) = knots[i];
                v0 + (v1 - v0) * (u - u0) / (u1 - u0)
            }
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Constant(_) => vec![0.0, 1.0],
            Self::PiecewiseLinear(knots) => knots.iter().map(|k| k.0).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::Constant(v) => Self::Constant(v * factor),
            Self::PiecewiseLinear(knots) => {
                Self::PiecewiseLinear(knots.iter().map(|&(u, v)| (u, v * factor)).collect())
            }
        }
    }

    pub fn min_speed(&self) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::PiecewiseLinear(knots) => knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min),
        }
    }
}

fn check_speed(v: f64) -> Result<(), GeometryError> {
    if v.is_finite() && v >= V_MIN {
        Ok(())
    } else {
        Err(GeometryError::InvalidSpeed(format!(
            "speed {v} m/s is below the minimum {V_MIN} m/s or not finite"
        )))
    }
}

/// One interferometer arm: a curve traversed at a strictly positive speed.
#[derive(Debug, Clone)]
pub struct Arm {
    pub curve: Curve,
    pub speed: SpeedProfile,
}

impl Arm {
    pub fn new(curve: Curve, speed: SpeedProfile) -> Result<Self, GeometryError> {
        speed.validate()?;
        Ok(Self { curve, speed })
    }

    pub fn point(&self, u: f64) -> Vec3 {
        self.curve.point(u)
    }

    /// Unit tangent in the direction of travel.
    pub fn tangent(&self, u: f64) -> Vec3 {
        self.curve.derivative(u).normalize()
    }

    pub fn velocity(&self, u: f64) -> Vec3 {
        self.tangent(u) * self.speed.speed(u)
    }

    /// Sorted union of curve and speed breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut all = self.curve.breakpoints();
        all.extend(self.speed.breakpoints());
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        all
    }

    pub fn with_speed(&self, speed: SpeedProfile) -> Result<Self, GeometryError> {
        Self::new(self.curve.clone(), speed)
    }

    pub fn mapped(&self, map: Deformation) -> Self {
        Self {
            curve: self.curve.clone().mapped(map),
            speed: self.speed.clone(),
        }
    }

    /// Evenly spaced samples including both endpoints.
    pub fn samples(&self, n: usize) -> Vec<Vec3> {
        (0..=n).map(|i| self.point(i as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polyline_is_arclength_parametrised() {
        let c = Curve::polyline(vec![Vec3::zeros(), vec3(1.0, 0.0, 0.0), vec3(1.0, 3.0, 0.0)]).unwrap();
        assert_relative_eq!(c.point(0.25), vec3(1.0, 0.0, 0.0));
        assert_relative_eq!(c.point(0.5), vec3(1.0, 1.0, 0.0));
        assert_relative_eq!(c.derivative(0.1).norm(), 4.0);
        assert_eq!(c.breakpoints(), vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn degenerate_polyline_rejected() {
        assert!(Curve::polyline(vec![Vec3::zeros(), Vec3::zeros()]).is_err());
        assert!(Curve::polyline(vec![Vec3::zeros()]).is_err());
    }

    #[test]
    fn arc_derivative_matches_finite_difference() {
        let c = Curve::arc(
            vec3(1.0, 2.0, 3.0),
            vec3(0.0, 0.0, 1.0),
            vec3(1.0, 0.0, 0.0),
            0.1,
            0.3,
            0.2,
            5.0,
        )
        .unwrap();
        for u in [0.1, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (c.point(u + h) - c.point(u - h)) / (2.0 * h);
            assert_relative_eq!(c.derivative(u), fd, max_relative = 1e-8);
        }
    }

    #[test]
    fn mapped_derivative_uses_chain_rule() {
        let base = Curve::arc(
            Vec3::zeros(),
            vec3(0.0, 0.0, 1.0),
            vec3(1.0, 0.0, 0.0),
            1.0,
            1.0,
            0.0,
            PI,
        )
        .unwrap();
        let map = Deformation::new("squash", |p| vec3(2.0 * p.x + p.y * p.y, 0.5 * p.y, p.z));
        let c = base.mapped(map);
        for u in [0.2, 0.7] {
            let h = 1e-6;
            let fd = (c.point(u + h) - c.point(u - h)) / (2.0 * h);
            assert_relative_eq!(c.derivative(u), fd, max_relative = 1e-8);
        }
    }

    #[test]
    fn speed_profile_interpolates_and_validates() {
        let p = SpeedProfile::piecewise_linear(vec![(0.0, 100.0), (0.5, 200.0), (1.0, 200.0)]).unwrap();
        assert_relative_eq!(p.speed(0.25), 150.0);
        assert_relative_eq!(p.speed(0.75), 200.0);
        assert_eq!(p.min_speed(), 100.0);
        assert!(SpeedProfile::constant(0.0).is_err());
        assert!(SpeedProfile::piecewise_linear(vec![(0.0, 1.0), (0.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(SpeedProfile::piecewise_linear(vec![(0.1, 1.0), (1.0, 1.0)]).is_err());
    }
}
