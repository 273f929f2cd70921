use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::AnalysisError;
use crate::constants::{C2, FOUR_PI_EPSILON_0};
use crate::fields::FieldConfiguration;
use crate::geometry::{InterferometerLoop, Tolerance};
use crate::phases::{total_phase_decomposition, ParticleSpecies};
use crate::report::FlatRecord;

/// Singular-value ratio below which the 2×2 system is treated as rank 1.
const RANK_TOLERANCE: f64 = 1e-8;

/// Phase response of one scenario to unit couplings: φ = offset + k_chi·χ + k_kappa·κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseKernels {
    /// rad per F·m² (geometric, Stark and velocity-linear terms).
    pub k_chi: f64,
    /// rad per J/T² (geometric/c², Zeeman and velocity-linear terms).
    pub k_kappa: f64,
    /// Phase from the species' permanent moments.
    pub offset: f64,
}

/// Kernels at unit coupling, χ = 1 F·m² and κ = 1 J/T². The total phase
/// is linear in (χ, κ), so they are exact up to quadrature error.
pub fn phase_kernels(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    tol: Tolerance,
) -> Result<PhaseKernels, AnalysisError> {
    let mut base = *species;
    base.chi = 0.0;
    base.kappa = 0.0;
    base.alpha_vol = 0.0;
    let offset = total_phase_decomposition(&base, config, lp, tol)?.phi_total.value;
    let chi = total_phase_decomposition(&base.with_chi(1.0), config, lp, tol)?
        .phi_total
        .value;
    let kappa = total_phase_decomposition(&base.with_kappa(1.0), config, lp, tol)?
        .phi_total
        .value;
    Ok(PhaseKernels {
        k_chi: chi - offset,
        k_kappa: kappa - offset,
        offset,
    })
}

/// One measured scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub id: String,
    pub kernels: PhaseKernels,
    pub phase: f64,
    /// One-sigma uncertainty; rows are weighted by 1/σ.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizabilitySolution {
    pub chi_hat: f64,
    pub kappa_hat: f64,
    /// Covariance of (χ̂, κ̂). On rank-deficient data this is the
    /// pseudo-inverse and says nothing about the null direction.
    pub covariance: Matrix2<f64>,
    pub rank: usize,
    /// Unit (χ, κ) direction the data constrain best; ∝ (1, 1/c²) when only
    /// geometric phases are measured.
    pub degenerate_direction: Vector2<f64>,
    /// Unit direction the data constrain least; ∝ (1, −c²) in the geometric-only case.
    pub null_direction: Vector2<f64>,
    /// Smallest over largest singular value of the equilibrated system.
    pub singular_ratio: f64,
}

impl PolarizabilitySolution {
    pub fn to_record(&self) -> FlatRecord {
        let mut r = FlatRecord::new();
        r.measured("chi_hat", self.chi_hat, self.covariance[(0, 0)].sqrt())
            .measured("kappa_hat", self.kappa_hat, self.covariance[(1, 1)].sqrt())
            .real("cov_chi_chi", self.covariance[(0, 0)])
            .real("cov_chi_kappa", self.covariance[(0, 1)])
            .real("cov_kappa_kappa", self.covariance[(1, 1)])
            .integer("rank", self.rank as i64)
            .real("singular_ratio", self.singular_ratio)
            .real("degenerate_direction_chi", self.degenerate_direction[0])
            .real("degenerate_direction_kappa", self.degenerate_direction[1])
            .real("null_direction_chi", self.null_direction[0])
            .real("null_direction_kappa", self.null_direction[1]);
        if self.rank < 2 {
            r.text(
                "warning",
                "measurements only constrain one combination of chi and kappa",
            );
        }
        r
    }
}

/// Weighted least squares for (χ, κ) from measured phases. Columns are
/// equilibrated before the SVD; the reported directions are mapped back to
/// physical (χ, κ) coordinates and normalised.
pub fn solve_polarizabilities(measurements: &[Measurement]) -> Result<PolarizabilitySolution, AnalysisError> {
    if measurements.len() < 2 {
        return Err(AnalysisError::InsufficientData(format!(
            "{} measurement(s); solving for chi and kappa needs at least 2",
            measurements.len()
        )));
    }
    for m in measurements {
        if !(m.sigma > 0.0 && m.sigma.is_finite()) || !m.phase.is_finite() {
            return Err(AnalysisError::InvalidInput(format!(
                "measurement {}: phase must be finite and sigma positive",
                m.id
            )));
        }
    }
    let n = measurements.len();
    let a = DMatrix::from_fn(n, 2, |i, j| {
        let m = &measurements[i];
        let k = if j == 0 { m.kernels.k_chi } else { m.kernels.k_kappa };
        k / m.sigma
    });
    let y = DVector::from_fn(n, |i, _| {
        let m = &measurements[i];
        (m.phase - m.kernels.offset) / m.sigma
    });
    let norms = [a.column(0).norm(), a.column(1).norm()];
    if norms.iter().any(|s| !(*s > 0.0)) {
        return Err(AnalysisError::InsufficientData(
            "a coupling has no effect on any measured scenario".into(),
        ));
    }
    let mut scaled = a.clone();
    for (j, s) in norms.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let svd = scaled.svd(true, true);
    let sv = &svd.singular_values;
    let (big, small) = if sv[0] >= sv[1] { (0, 1) } else { (1, 0) };
    let singular_ratio = sv[small] / sv[big];
    let rank = if singular_ratio > RANK_TOLERANCE { 2 } else { 1 };
    let v_t = svd.v_t.as_ref().expect("V requested");

    let cutoff = if rank == 2 { 0.0 } else { sv[big] * RANK_TOLERANCE };
    let z = svd
        .solve(&y, cutoff)
        .map_err(|e| AnalysisError::InvalidInput(e.to_string()))?;
    let chi_hat = z[0] / norms[0];
    let kappa_hat = z[1] / norms[1];

    // Pseudo-inverse covariance V Σ⁺² Vᵀ, then unscaled.
    let mut covariance = Matrix2::zeros();
    for k in 0..2 {
        if sv[k] <= cutoff || sv[k] == 0.0 {
            continue;
        }
        for i in 0..2 {
            for j in 0..2 {
                covariance[(i, j)] += v_t[(k, i)] * v_t[(k, j)] / (sv[k] * sv[k]) / (norms[i] * norms[j]);
            }
        }
    }

    // Right singular vectors back in physical units: the row space of the
    // unscaled design is spanned by D⁻¹v, its complement by D·v.
    let physical = |k: usize, best: bool| {
        let d = if best {
            Vector2::new(v_t[(k, 0)] * norms[0], v_t[(k, 1)] * norms[1])
        } else {
            Vector2::new(v_t[(k, 0)] / norms[0], v_t[(k, 1)] / norms[1])
        };
        let d = d.normalize();
        if d[0] < 0.0 {
            -d
        } else {
            d
        }
    };
    Ok(PolarizabilitySolution {
        chi_hat,
        kappa_hat,
        covariance,
        rank,
        degenerate_direction: physical(big, true),
        null_direction: physical(small, false),
        singular_ratio,
    })
}

/// (χ + κ/c²)/χ: how much larger the geometric phase is than the pure
/// electric prediction when a magnetic polarizability κ is present.
pub fn geometric_phase_ratio(alpha_vol: f64, kappa: f64) -> f64 {
    let chi = FOUR_PI_EPSILON_0 * alpha_vol;
    (chi + kappa / C2) / chi
}

/// The κ that would raise the geometric phase by `ratio` over the pure
/// electric prediction: κ = (ratio − 1)·4πε₀α·c².
pub fn discrepancy_explainer(alpha_vol: f64, ratio: f64) -> Result<f64, AnalysisError> {
    if !(alpha_vol > 0.0 && alpha_vol.is_finite() && ratio.is_finite()) {
        return Err(AnalysisError::InvalidInput(format!(
            "need a positive polarizability volume and a finite ratio, got alpha={alpha_vol}, ratio={ratio}"
        )));
    }
    Ok((ratio - 1.0) * FOUR_PI_EPSILON_0 * alpha_vol * C2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(id: &str, k_chi: f64, k_kappa: f64, chi: f64, kappa: f64) -> Measurement {
        Measurement {
            id: id.into(),
            kernels: PhaseKernels {
                k_chi,
                k_kappa,
                offset: 0.0,
            },
            phase: k_chi * chi + k_kappa * kappa,
            sigma: 1e-3,
        }
    }

    #[test]
    fn geometric_plus_stark_recovers_both() {
        let g = 8.5e38;
        let (chi, kappa) = (2.7e-39, 4.0e-23);
        let data = [m("geo", g, g / C2, chi, kappa), m("stark", 3.1e38, 0.0, chi, kappa)];
        let s = solve_polarizabilities(&data).unwrap();
        assert_eq!(s.rank, 2);
        assert_relative_eq!(s.chi_hat, chi, max_relative = 1e-10);
        assert_relative_eq!(s.kappa_hat, kappa, max_relative = 1e-8);
    }

    #[test]
    fn geometric_only_is_degenerate() {
        let data = [
            m("a", 8.5e38, 8.5e38 / C2, 1e-39, 0.0),
            m("b", -2.0e38, -2.0e38 / C2, 1e-39, 0.0),
        ];
        let s = solve_polarizabilities(&data).unwrap();
        assert_eq!(s.rank, 1);
        assert_relative_eq!(
            s.degenerate_direction[1] / s.degenerate_direction[0],
            1.0 / C2,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            s.null_direction[0] / s.null_direction[1],
            -1.0 / C2,
            max_relative = 1e-8
        );
        // The measured combination is reproduced.
        assert_relative_eq!(s.chi_hat + s.kappa_hat / C2, 1e-39, max_relative = 1e-8);
    }

    #[test]
    fn zero_phases_give_zero() {
        let data = [
            m("geo", 8.5e38, 8.5e38 / C2, 0.0, 0.0),
            m("stark", 3.1e38, 0.0, 0.0, 0.0),
        ];
        let s = solve_polarizabilities(&data).unwrap();
        assert_eq!((s.chi_hat, s.kappa_hat), (0.0, 0.0));
    }

    #[test]
    fn explainer_inverts_the_ratio() {
        let alpha = 24.3e-30;
        let kappa = discrepancy_explainer(alpha, 1.5).unwrap();
        assert_relative_eq!(geometric_phase_ratio(alpha, kappa), 1.5, max_relative = 1e-14);
        assert_eq!(discrepancy_explainer(alpha, 1.0).unwrap(), 0.0);
        assert!(discrepancy_explainer(0.0, 1.5).is_err());
    }

    #[test]
    fn needs_two_measurements() {
        assert!(matches!(
            solve_polarizabilities(&[]),
            Err(AnalysisError::InsufficientData(_))
        ));
    }
}
