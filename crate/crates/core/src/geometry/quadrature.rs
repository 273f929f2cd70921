//! Globally adaptive Gauss–Kronrod (7/15) quadrature over a set of pieces,
//! plus Gauss–Legendre rules for fixed-order work.
//!
//! The 15-point rule never evaluates interval endpoints, so integrands with
//! a jump exactly at a piece boundary (septum faces, polyline corners) are
//! handled without special casing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use super::GeometryError;
use crate::fields::FieldError;

/// Kronrod abscissae on [-1, 1] (positive half, descending).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default evaluation budget per integral.
pub const DEFAULT_MAX_EVALUATIONS: usize = 2_000_000;

/// Convergence target: an integral is accepted once its error estimate is
/// at most `max(abs, rel·|value|)` (or at the floating-point floor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }

    pub const fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    pub fn tightened(self, factor: f64) -> Self {
        Self {
            rel: self.rel / factor,
            abs: self.abs / factor,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub const ZERO: Self = Self {
        value: 0.0,
        abs_error_estimate: 0.0,
        evaluations: 0,
    };

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }

    /// Sum of two independent integrals; errors add linearly.
    pub fn plus(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn minus(self, other: Self) -> Self {
        self.plus(other.scaled(-1.0))
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F>(f: &mut F, piece: usize, a: f64, b: f64) -> Result<Panel, FieldError>
where
    F: FnMut(usize, f64) -> Result<f64, FieldError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(piece, center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(piece, center - dx)?;
        let f2 = f(piece, center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(FieldError::InvalidParameter(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Panel {
        piece,
        a,
        b,
        value,
        error,
        resabs: resabs * half.abs(),
    })
}

/// Integrates `f(piece, x)` over every `pieces[piece] = (a, b)` and returns
/// the sum. Subdivision is global: the panel with the largest error
/// estimate is bisected until the total estimate meets `tol`.
pub fn integrate_pieces<F>(
    pieces: &[(f64, f64)],
    mut f: F,
    tol: Tolerance,
    max_evaluations: usize,
) -> Result<QuadratureResult, GeometryError>
where
    F: FnMut(usize, f64) -> Result<f64, FieldError>,
{
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for (i, &(a, b)) in pieces.iter().enumerate() {
        if a == b {
            continue;
        }
        heap.push(kronrod_panel(&mut f, i, a, b)?);
        evaluations += 15;
    }
    if heap.is_empty() {
        return Ok(QuadratureResult::ZERO);
    }

    loop {
        let (value, error, resabs) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.error, acc.2 + p.resabs)
        });
        let floor = 50.0 * f64::EPSILON * resabs;
        let target = tol.abs.max(tol.rel * value.abs()).max(floor);
        if error <= target {
            // Kronrod-Gauss differences vanish on polynomial integrands; the
            // rounding of the sum does not.
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: error.max(f64::EPSILON * resabs),
                evaluations,
            });
        }
        if evaluations + 30 > max_evaluations {
            return Err(GeometryError::NonConvergence {
                achieved: error,
                target,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            return Err(GeometryError::NonConvergence {
                achieved: error,
                target,
                evaluations,
            });
        }
        heap.push(kronrod_panel(&mut f, worst.piece, worst.a, mid)?);
        heap.push(kronrod_panel(&mut f, worst.piece, mid, worst.b)?);
        evaluations += 30;
    }
}

/// Single-interval convenience wrapper around [`integrate_pieces`].
pub fn integrate<F>(a: f64, b: f64, mut f: F, tol: Tolerance) -> Result<QuadratureResult, GeometryError>
where
    F: FnMut(f64) -> Result<f64, FieldError>,
{
    integrate_pieces(&[(a, b)], |_, x| f(x), tol, DEFAULT_MAX_EVALUATIONS)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 20-point Gauss–Legendre rule.
pub(crate) fn gauss_legendre_20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// Fixed-order Gauss–Legendre integral of a smooth function on [a, b].
pub(crate) fn fixed_gauss<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let (nodes, weights) = gauss_legendre_20();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    nodes.iter().zip(weights).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let r = integrate(0.0, 2.0, |x| Ok(x.powi(9) - 3.0 * x * x), Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 1024.0 / 10.0 - 8.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrands() {
        // ∫_{-1}^{1} 1/(x² + ε²) dx = (2/ε) atan(1/ε)
        let eps: f64 = 1e-3;
        let r = integrate(-1.0, 1.0, |x| Ok(1.0 / (x * x + eps * eps)), Tolerance::relative(1e-12)).unwrap();
        let exact = 2.0 / eps * (1.0 / eps).atan();
        assert_relative_eq!(r.value, exact, max_relative = 1e-11);
        assert!((r.value - exact).abs() <= r.abs_error_estimate.max(1e-12 * exact));
    }

    #[test]
    fn jump_at_piece_boundary_is_exact() {
        let pieces = [(0.0, 0.3), (0.3, 1.0)];
        let r = integrate_pieces(
            &pieces,
            |_, x| Ok(if x < 0.3 { 1.0 } else { 5.0 }),
            Tolerance::default(),
            DEFAULT_MAX_EVALUATIONS,
        )
        .unwrap();
        assert_relative_eq!(r.value, 0.3 + 3.5, max_relative = 1e-14);
        assert_eq!(r.evaluations, 30);
    }

    #[test]
    fn cancelling_integral_stops_at_roundoff_floor() {
        let r = integrate(0.0, 2.0 * std::f64::consts::PI, |x| Ok(x.sin()), Tolerance::default()).unwrap();
        assert!(r.value.abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let err = integrate_pieces(
            &[(0.0, 1.0)],
            |_, x| Ok(1.0 / x.sqrt() + (1e6 * x).sin()),
            Tolerance::relative(1e-15),
            200,
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::NonConvergence { .. }));
    }

    #[test]
    fn tighter_tolerance_moves_less_than_prior_estimate() {
        let f = |x: f64| Ok((3.0 * x).cos() / (1.1 + x.sin()));
        let coarse = integrate(0.0, 6.0, f, Tolerance::relative(1e-6)).unwrap();
        let fine = integrate(0.0, 6.0, f, Tolerance::relative(1e-7)).unwrap();
        assert!((coarse.value - fine.value).abs() < coarse.abs_error_estimate);
    }

    #[test]
    fn gauss_legendre_weights_and_moments() {
        for n in [1, 2, 5, 20] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            // exact for degree 2n-1
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(m, 2.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
        assert_relative_eq!(fixed_gauss(1.0, 3.0, |x| 1.0 / x), 3f64.ln(), max_relative = 1e-14);
    }
}
