use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::AnalysisError;
use crate::fields::FieldConfiguration;
use crate::geometry::{InterferometerLoop, Tolerance};
use crate::phases::{total_phase_decomposition, ParticleSpecies, PhaseBreakdown};
use crate::report::FlatRecord;

/// Fits whose raw design matrix is worse conditioned than this are refused.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// Total phase against nominal speed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VelocityScanResult {
    pub speeds: Vec<f64>,
    pub phases: Vec<f64>,
    pub errors: Vec<f64>,
}

/// φ(v) = a_const + a_invv/v + a_linv·v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCoefficients {
    pub a_const: f64,
    pub a_invv: f64,
    pub a_linv: f64,
}

impl VelocityCoefficients {
    /// Exact coefficients implied by one decomposition at nominal speed
    /// `speed`: spatial terms are speed independent, temporal ones scale as
    /// 1/v and the velocity-linear remainder as v.
    pub fn from_breakdown(b: &PhaseBreakdown, speed: f64) -> Self {
        Self {
            a_const: b.phi_ac_e.value + b.phi_ac_b.value + b.phi_hmw_e.value + b.phi_hmw_b.value + b.phi_mix.value,
            a_invv: (b.phi_stark.value + b.phi_zeeman.value) * speed,
            a_linv: b.phi_vlinear.value / speed,
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.a_const + self.a_invv / v + self.a_linv * v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: VelocityCoefficients,
    /// One-sigma standard errors of (a_const, a_invv, a_linv), from the
    /// residual scatter.
    pub std_errors: [f64; 3],
    pub residual_rms: f64,
    /// 2-norm condition number of the unscaled design matrix.
    pub condition_number: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn to_record(&self) -> FlatRecord {
        let c = &self.coefficients;
        let mut r = FlatRecord::new();
        r.measured("a_const", c.a_const, self.std_errors[0])
            .measured("a_invv", c.a_invv, self.std_errors[1])
            .measured("a_linv", c.a_linv, self.std_errors[2])
            .real("residual_rms", self.residual_rms)
            .real("condition_number", self.condition_number)
            .integer("n_points", self.n_points as i64);
        r
    }
}

/// Recomputes the full decomposition at each nominal speed by rescaling
/// both arms' speed profiles.
pub fn velocity_scan(
    species: &ParticleSpecies,
    config: &FieldConfiguration,
    lp: &InterferometerLoop,
    speeds: &[f64],
    tol: Tolerance,
) -> Result<VelocityScanResult, AnalysisError> {
    let nominal = lp.nominal_speed();
    if speeds.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(AnalysisError::InvalidInput(
            "scan speeds must be positive and finite".into(),
        ));
    }
    let rows: Vec<(f64, f64)> = speeds
        .par_iter()
        .map(|&v| -> Result<(f64, f64), AnalysisError> {
            let scaled = lp.with_speed_scale(v / nominal)?;
            let b = total_phase_decomposition(species, config, &scaled, tol)?;
            Ok((b.phi_total.value, b.phi_total.error))
        })
        .collect::<Result<_, _>>()?;
    Ok(VelocityScanResult {
        speeds: speeds.to_vec(),
        phases: rows.iter().map(|r| r.0).collect(),
        errors: rows.iter().map(|r| r.1).collect(),
    })
}

/// `n` log-spaced speeds from `vmin` to `vmax`, endpoints exact.
pub fn speed_grid(vmin: f64, vmax: f64, n: usize) -> Result<Vec<f64>, AnalysisError> {
    if !(vmin > 0.0 && vmax > vmin && vmax.is_finite()) || n < 2 {
        return Err(AnalysisError::InvalidInput(format!(
            "need 0 < vmin < vmax and at least 2 steps, got vmin={vmin}, vmax={vmax}, steps={n}"
        )));
    }
    let ratio = vmax / vmin;
    Ok((0..n)
        .map(|i| match i {
            0 => vmin,
            i if i == n - 1 => vmax,
            i => vmin * ratio.powf(i as f64 / (n - 1) as f64),
        })
        .collect())
}

/// Least-squares fit of φ(v) in the basis {1, 1/v, v}. Columns are
/// normalised before the SVD solve.
pub fn fit_velocity_basis(speeds: &[f64], phases: &[f64]) -> Result<FitResult, AnalysisError> {
    let n = speeds.len();
    if phases.len() != n {
        return Err(AnalysisError::InvalidInput(format!(
            "{n} speeds but {} phases",
            phases.len()
        )));
    }
    if n < 4 {
        return Err(AnalysisError::InsufficientData(format!(
            "{n} points; the three-term fit needs at least 4"
        )));
    }
    if speeds.iter().chain(phases).any(|x| !x.is_finite()) || speeds.iter().any(|v| *v <= 0.0) {
        return Err(AnalysisError::InvalidInput(
            "speeds must be positive and all values finite".into(),
        ));
    }
    let vmin = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = speeds.iter().copied().fold(0.0, f64::max);
    if vmax < 2.0 * vmin {
        return Err(AnalysisError::InsufficientData(format!(
            "speed range {vmin:.4e}..{vmax:.4e} m/s spans less than a factor of 2"
        )));
    }

    let raw = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => 1.0 / speeds[i],
        _ => speeds[i],
    });
    let raw_sv = raw.clone().svd(false, false).singular_values;
    let condition_number = raw_sv.max() / raw_sv.min();
    if !(condition_number <= MAX_CONDITION_NUMBER) {
        return Err(AnalysisError::IllConditioned { condition_number });
    }

    let norms: Vec<f64> = (0..3).map(|j| raw.column(j).norm()).collect();
    let mut scaled = raw.clone();
    for (j, s) in norms.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let y = DVector::from_column_slice(phases);
    let svd = scaled.svd(true, true);
    let z = svd
        .solve(&y, 0.0)
        .map_err(|e| AnalysisError::InvalidInput(e.to_string()))?;
    let coef: Vec<f64> = (0..3).map(|j| z[j] / norms[j]).collect();

    let fitted = &raw * DVector::from_column_slice(&coef);
    let rss = (&y - fitted).norm_squared();
    let residual_rms = (rss / n as f64).sqrt();
    let s2 = rss / (n - 3) as f64;
    // cov(z) = s²·V Σ⁻² Vᵀ in scaled coordinates.
    let v_t = svd.v_t.as_ref().expect("V requested");
    let mut std_errors = [0.0; 3];
    for (j, se) in std_errors.iter_mut().enumerate() {
        let var: f64 = (0..3).map(|k| (v_t[(k, j)] / svd.singular_values[k]).powi(2)).sum();
        *se = (s2 * var).sqrt() / norms[j];
    }

    Ok(FitResult {
        coefficients: VelocityCoefficients {
            a_const: coef[0],
            a_invv: coef[1],
            a_linv: coef[2],
        },
        std_errors,
        residual_rms,
        condition_number,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const TRUTH: VelocityCoefficients = VelocityCoefficients {
        a_const: 0.37,
        a_invv: 210.0,
        a_linv: 2.4e-4,
    };

    #[test]
    fn noiseless_round_trip() {
        let speeds = speed_grid(300.0, 3000.0, 25).unwrap();
        let phases: Vec<f64> = speeds.iter().map(|v| TRUTH.eval(*v)).collect();
        let fit = fit_velocity_basis(&speeds, &phases).unwrap();
        assert_relative_eq!(fit.coefficients.a_const, TRUTH.a_const, max_relative = 1e-10);
        assert_relative_eq!(fit.coefficients.a_invv, TRUTH.a_invv, max_relative = 1e-10);
        assert_relative_eq!(fit.coefficients.a_linv, TRUTH.a_linv, max_relative = 1e-10);
        assert!(fit.condition_number < MAX_CONDITION_NUMBER);
    }

    #[test]
    fn noisy_fit_within_three_sigma() {
        let speeds = speed_grid(300.0, 3000.0, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phases: Vec<f64> = speeds
            .iter()
            .map(|v| {
                let clean = TRUTH.eval(*v);
                clean + Normal::new(0.0, 0.01 * clean.abs()).unwrap().sample(&mut rng)
            })
            .collect();
        let fit = fit_velocity_basis(&speeds, &phases).unwrap();
        let c = fit.coefficients;
        for (got, want, se) in [
            (c.a_const, TRUTH.a_const, fit.std_errors[0]),
            (c.a_invv, TRUTH.a_invv, fit.std_errors[1]),
            (c.a_linv, TRUTH.a_linv, fit.std_errors[2]),
        ] {
            assert!((got - want).abs() < 3.0 * se, "{got} vs {want} ± {se}");
        }
    }

    #[test]
    fn too_little_data() {
        assert!(matches!(
            fit_velocity_basis(&[1.0, 2.0, 3.0], &[0.0; 3]),
            Err(AnalysisError::InsufficientData(_))
        ));
        assert!(matches!(
            fit_velocity_basis(&[100.0, 110.0, 120.0, 130.0, 150.0], &[0.0; 5]),
            Err(AnalysisError::InsufficientData(_))
        ));
    }

    #[test]
    fn extreme_speeds_are_ill_conditioned() {
        let speeds = speed_grid(1e7, 3e7, 8).unwrap();
        let phases = vec![1.0; 8];
        assert!(matches!(
            fit_velocity_basis(&speeds, &phases),
            Err(AnalysisError::IllConditioned { .. })
        ));
    }
}
