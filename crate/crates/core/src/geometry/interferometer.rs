use std::cell::Cell;

use super::quadrature::{integrate_pieces, QuadratureResult, Tolerance, DEFAULT_MAX_EVALUATIONS};
use super::{Arm, Deformation, GeometryError};
use crate::fields::{FieldConfiguration, FieldError, SingularLocus};
use crate::Vec3;

/// Which arm is traversed forward when the two arms are joined into a
/// closed circuit. The other arm is traversed in reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    UpperFirst,
    LowerFirst,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Self::UpperFirst => Self::LowerFirst,
            Self::LowerFirst => Self::UpperFirst,
        }
    }
}

/// Kinematic state handed to integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub position: Vec3,
    /// Physical velocity: the particle always moves from the splitter to
    /// the recombination point, whatever the circuit direction.
    pub velocity: Vec3,
    /// Unit tangent in the circuit direction (reversed on the returning arm).
    pub tangent: Vec3,
    pub speed: f64,
}

/// Two arms sharing source and recombination points. The closed circuit is
/// the first arm forward followed by the second arm reversed.
#[derive(Debug, Clone)]
pub struct InterferometerLoop {
    pub upper: Arm,
    pub lower: Arm,
    pub orientation: Orientation,
}

const ENDPOINT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Piece {
    upper: bool,
    reversed: bool,
    a: f64,
    b: f64,
}

fn arm_label(upper: bool) -> &'static str {
    if upper {
        "upper"
    } else {
        "lower"
    }
}

fn path_point(arm: &Arm, u: f64, reversed: bool) -> (PathPoint, f64) {
    let d = arm.curve.derivative(u);
    let ds = d.norm();
    let forward = d / ds;
    let speed = arm.speed.speed(u);
    (
        PathPoint {
            position: arm.curve.point(u),
            velocity: forward * speed,
            tangent: if reversed { -forward } else { forward },
            speed,
        },
        ds,
    )
}

fn arm_pieces(arm: &Arm, upper: bool, reversed: bool) -> Vec<Piece> {
    arm.breakpoints()
        .windows(2)
        .map(|w| Piece {
            upper,
            reversed,
            a: w[0],
            b: w[1],
        })
        .collect()
}

/// Integrates over pieces; `weight(point, ds) -> multiplier` converts the
/// integrand into a per-du density.
fn integrate_over<F>(
    arms: (&Arm, &Arm),
    pieces: &[Piece],
    mut f: F,
    weight: impl Fn(&Piece, &PathPoint, f64) -> f64,
    tol: Tolerance,
) -> Result<QuadratureResult, GeometryError>
where
    F: FnMut(&PathPoint) -> Result<f64, FieldError>,
{
    let bounds: Vec<(f64, f64)> = pieces.iter().map(|p| (p.a, p.b)).collect();
    let failing_arm = Cell::new("upper");
    let result = integrate_pieces(
        &bounds,
        |i, u| {
            let piece = &pieces[i];
            let arm = if piece.upper { arms.0 } else { arms.1 };
            let (pp, ds) = path_point(arm, u, piece.reversed);
            failing_arm.set(arm_label(piece.upper));
            Ok(f(&pp)? * weight(piece, &pp, ds))
        },
        tol,
        DEFAULT_MAX_EVALUATIONS,
    );
    result.map_err(|e| match e {
        GeometryError::Field(fe) => GeometryError::from_field(fe, failing_arm.get()),
        other => other,
    })
}

impl InterferometerLoop {
    pub fn new(upper: Arm, lower: Arm) -> Result<Self, GeometryError> {
        let lp = Self {
            upper,
            lower,
            orientation: Orientation::UpperFirst,
        };
        let scale = lp.extent().max(1.0);
        let start_gap = (lp.upper.point(0.0) - lp.lower.point(0.0)).norm();
        let end_gap = (lp.upper.point(1.0) - lp.lower.point(1.0)).norm();
        if !(start_gap <= ENDPOINT_TOLERANCE * scale && end_gap <= ENDPOINT_TOLERANCE * scale) {
            return Err(GeometryError::EndpointMismatch { start_gap, end_gap });
        }
        Ok(lp)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Same geometry, circuit traversed the other way.
    pub fn reversed(&self) -> Self {
        let mut lp = self.clone();
        lp.orientation = lp.orientation.flipped();
        lp
    }

    /// Arms exchanged, orientation kept.
    pub fn swapped(&self) -> Self {
        Self {
            upper: self.lower.clone(),
            lower: self.upper.clone(),
            orientation: self.orientation,
        }
    }

    /// Both speed profiles multiplied by `factor`.
    pub fn with_speed_scale(&self, factor: f64) -> Result<Self, GeometryError> {
        let mut lp = self.clone();
        lp.upper = self.upper.with_speed(self.upper.speed.scaled(factor))?;
        lp.lower = self.lower.with_speed(self.lower.speed.scaled(factor))?;
        Ok(lp)
    }

    /// Reference speed used when rescaling for velocity scans: the speed of
    /// the upper arm at the splitter.
    pub fn nominal_speed(&self) -> f64 {
        self.upper.speed.speed(0.0)
    }

    pub fn mapped(&self, map: &Deformation) -> Self {
        Self {
            upper: self.upper.mapped(map.clone()),
            lower: self.lower.mapped(map.clone()),
            orientation: self.orientation,
        }
    }

    /// (first, second) in circuit order.
    pub(crate) fn circuit_arms(&self) -> (&Arm, &Arm, bool) {
        match self.orientation {
            Orientation::UpperFirst => (&self.upper, &self.lower, true),
            Orientation::LowerFirst => (&self.lower, &self.upper, false),
        }
    }

    fn circuit_pieces(&self) -> Vec<Piece> {
        let (first, second, upper_first) = self.circuit_arms();
        let mut pieces = arm_pieces(first, upper_first, false);
        pieces.extend(arm_pieces(second, !upper_first, true));
        pieces
    }

    /// Visits circuit pieces as (arm, u_start, u_end, reversed) in circuit order.
    pub(crate) fn circuit_segments(&self) -> Vec<(&Arm, f64, f64, bool)> {
        self.circuit_pieces()
            .into_iter()
            .map(|p| {
                let arm = if p.upper { &self.upper } else { &self.lower };
                (arm, p.a, p.b, p.reversed)
            })
            .collect()
    }

    /// Ordered points around the closed circuit (the closing point is not
    /// repeated).
    pub fn circuit_samples(&self, per_arm: usize) -> Vec<Vec3> {
        let (first, second, _) = self.circuit_arms();
        let mut pts = first.samples(per_arm);
        let mut back = second.samples(per_arm);
        back.reverse();
        pts.extend(back.into_iter().skip(1).take(per_arm.saturating_sub(1)));
        pts
    }

    /// Diameter of the bounding box of the sampled loop, m.
    pub fn extent(&self) -> f64 {
        let pts: Vec<Vec3> = self
            .upper
            .samples(64)
            .into_iter()
            .chain(self.lower.samples(64))
            .collect();
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Fails if either arm enters an exclusion region of `config`.
    pub fn ensure_clear(&self, config: &FieldConfiguration) -> Result<(), GeometryError> {
        for locus in config.singular_loci() {
            for (arm, label) in [(&self.upper, "upper"), (&self.lower, "lower")] {
                let distance = min_distance_to_locus(arm, &locus);
                if !(distance >= locus.radius()) {
                    return Err(GeometryError::SingularPathPoint {
                        arm: label,
                        distance,
                        radius: locus.radius(),
                    });
                }
            }
        }
        Ok(())
    }

    /// ∮ f ds around the closed circuit. The integrand sees the circuit
    /// tangent and the physical velocity, so `f = A(r, v)·tangent` yields
    /// ∫_first A·dr − ∫_second A·dr.
    pub fn line_integral<F>(&self, f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
    where
        F: FnMut(&PathPoint) -> Result<f64, FieldError>,
    {
        integrate_over(
            (&self.upper, &self.lower),
            &self.circuit_pieces(),
            f,
            |_, _, ds| ds,
            tol,
        )
    }

    /// Arm-difference time integral: ∫_first f dt − ∫_second f dt.
    pub fn time_integral<F>(&self, f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
    where
        F: FnMut(&PathPoint) -> Result<f64, FieldError>,
    {
        integrate_over(
            (&self.upper, &self.lower),
            &self.circuit_pieces(),
            f,
            |piece, pp, ds| {
                let sign = if piece.reversed { -1.0 } else { 1.0 };
                sign * ds / pp.speed
            },
            tol,
        )
    }
}

/// ∫ f ds along a single arm in its direction of travel.
pub fn arm_line_integral<F>(arm: &Arm, f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
where
    F: FnMut(&PathPoint) -> Result<f64, FieldError>,
{
    integrate_over((arm, arm), &arm_pieces(arm, true, false), f, |_, _, ds| ds, tol)
}

/// ∫ f dt along a single arm.
pub fn arm_time_integral<F>(arm: &Arm, f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
where
    F: FnMut(&PathPoint) -> Result<f64, FieldError>,
{
    integrate_over(
        (arm, arm),
        &arm_pieces(arm, true, false),
        f,
        |_, pp, ds| ds / pp.speed,
        tol,
    )
}

/// Smallest distance between an arm and a singular locus, from dense
/// sampling refined by golden-section search around each local minimum.
pub fn min_distance_to_locus(arm: &Arm, locus: &SingularLocus) -> f64 {
    const N: usize = 1024;
    let dist = |u: f64| locus.distance(&arm.point(u));
    let samples: Vec<f64> = (0..=N).map(|i| dist(i as f64 / N as f64)).collect();
    let mut best = samples.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 0..=N {
        let left = if i == 0 { f64::INFINITY } else { samples[i - 1] };
        let right = if i == N { f64::INFINITY } else { samples[i + 1] };
        if samples[i] <= left && samples[i] <= right {
            let lo = (i.saturating_sub(1)) as f64 / N as f64;
            let hi = ((i + 1).min(N)) as f64 / N as f64;
            best = best.min(golden_min(&dist, lo, hi));
        }
    }
    best
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}
