//! Time parametrisation of an arm: t(u) = ∫ |r'(u)| / v(u) du and its
//! inverse. Lets dynamical phases be integrated in the time variable
//! directly, independently of the arclength route.

use super::quadrature::{fixed_gauss, integrate_pieces, QuadratureResult, Tolerance, DEFAULT_MAX_EVALUATIONS};
use super::{Arm, GeometryError, PathPoint};
use crate::fields::FieldError;

const SUBPANELS: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Panel {
    u0: f64,
    u1: f64,
    t0: f64,
}

/// Transit-time map of one arm.
#[derive(Debug, Clone)]
pub struct ArmClock {
    arm: Arm,
    panels: Vec<Panel>,
    /// Break times between smooth pieces of the arm (first 0, last total).
    breaks: Vec<f64>,
    total: f64,
}

impl ArmClock {
    pub fn new(arm: &Arm) -> Self {
        let breakpoints = arm.breakpoints();
        let mut panels = Vec::new();
        let mut breaks = vec![0.0];
        let mut t = 0.0;
        for w in breakpoints.windows(2) {
            for k in 0..SUBPANELS {
                let u0 = w[0] + (w[1] - w[0]) * k as f64 / SUBPANELS as f64;
                let u1 = w[0] + (w[1] - w[0]) * (k + 1) as f64 / SUBPANELS as f64;
                panels.push(Panel { u0, u1, t0: t });
                t += fixed_gauss(u0, u1, |u| Self::rate(arm, u));
            }
            breaks.push(t);
        }
        Self {
            arm: arm.clone(),
            panels,
            breaks,
            total: t,
        }
    }

    fn rate(arm: &Arm, u: f64) -> f64 {
        arm.curve.derivative(u).norm() / arm.speed.speed(u)
    }

    /// Total transit time, s.
    pub fn total_time(&self) -> f64 {
        self.total
    }

    fn panel_end_time(&self, i: usize) -> f64 {
        self.panels.get(i + 1).map_or(self.total, |p| p.t0)
    }

    pub fn time_at(&self, u: f64) -> f64 {
        let i = self.panels.partition_point(|p| p.u1 <= u).min(self.panels.len() - 1);
        let p = self.panels[i];
        p.t0 + fixed_gauss(p.u0, u, |s| Self::rate(&self.arm, s))
    }

    /// Curve parameter reached at time `t` (clamped to the arm).
    pub fn param_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.total {
            return 1.0;
        }
        let i = self.panels.partition_point(|p| p.t0 <= t).saturating_sub(1);
        let p = self.panels[i];
        let t1 = self.panel_end_time(i);
        let (mut lo, mut hi) = (p.u0, p.u1);
        let mut u = p.u0 + (p.u1 - p.u0) * (t - p.t0) / (t1 - p.t0);
        for _ in 0..60 {
            let residual = p.t0 + fixed_gauss(p.u0, u, |s| Self::rate(&self.arm, s)) - t;
            if residual > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let step = residual / Self::rate(&self.arm, u);
            let mut next = u - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-16 * (1.0 + u.abs()) {
                return next;
            }
            u = next;
        }
        u
    }

    /// ∫ f dt over the arm, integrating in the time variable.
    pub fn integrate_in_time<F>(&self, mut f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
    where
        F: FnMut(&PathPoint) -> Result<f64, FieldError>,
    {
        let pieces: Vec<(f64, f64)> = self.breaks.windows(2).map(|w| (w[0], w[1])).collect();
        integrate_pieces(
            &pieces,
            |_, t| {
                let u = self.param_at(t);
                let velocity = self.arm.velocity(u);
                let pp = PathPoint {
                    position: self.arm.point(u),
                    velocity,
                    tangent: self.arm.tangent(u),
                    speed: self.arm.speed.speed(u),
                };
                f(&pp)
            },
            tol,
            DEFAULT_MAX_EVALUATIONS,
        )
        .map_err(|e| match e {
            GeometryError::Field(fe) => GeometryError::from_field(fe, "upper"),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, SpeedProfile};
    use crate::vec3;
    use crate::Vec3;
    use approx::assert_relative_eq;

    #[test]
    fn linear_speed_ramp_has_logarithmic_clock() {
        // v(x) = v0 + (v1 − v0)x/L ⇒ T = L ln(v1/v0)/(v1 − v0)
        let arm = Arm::new(
            Curve::polyline(vec![Vec3::zeros(), vec3(2.0, 0.0, 0.0)]).unwrap(),
            SpeedProfile::piecewise_linear(vec![(0.0, 100.0), (1.0, 700.0)]).unwrap(),
        )
        .unwrap();
        let clock = ArmClock::new(&arm);
        let expected = 2.0 * (7.0f64).ln() / 600.0;
        assert_relative_eq!(clock.total_time(), expected, max_relative = 1e-14);
        for u in [0.0, 0.1, 0.37, 0.999] {
            let t = clock.time_at(u);
            assert_relative_eq!(clock.param_at(t), u, epsilon = 1e-14);
        }
    }

    #[test]
    fn time_integral_of_one_is_transit_time() {
        let arm = Arm::new(
            Curve::polyline(vec![Vec3::zeros(), vec3(1.0, 1.0, 0.0), vec3(2.0, 0.0, 0.0)]).unwrap(),
            SpeedProfile::piecewise_linear(vec![(0.0, 50.0), (0.3, 80.0), (1.0, 60.0)]).unwrap(),
        )
        .unwrap();
        let clock = ArmClock::new(&arm);
        let r = clock.integrate_in_time(|_| Ok(1.0), Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, clock.total_time(), max_relative = 1e-13);
        let via_arclength = crate::geometry::arm_time_integral(&arm, |_| Ok(1.0), Tolerance::default()).unwrap();
        assert_relative_eq!(via_arclength.value, clock.total_time(), max_relative = 1e-12);
    }
}
