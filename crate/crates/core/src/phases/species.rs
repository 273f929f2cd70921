use super::PhaseError;
use crate::constants::{C2, FOUR_PI_EPSILON_0};
use crate::Vec3;

/// Neutral particle: mass, permanent dipoles fixed in the lab frame and the
/// two induced-dipole couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSpecies {
    /// kg
    pub mass: f64,
    /// Permanent electric dipole, C·m.
    pub d0: Vec3,
    /// Permanent magnetic dipole, J/T.
    pub mu0: Vec3,
    /// Electric coupling, F·m²: d = χ·E_rest.
    pub chi: f64,
    /// Magnetic coupling, J/T²: m = κ·B_rest.
    pub kappa: f64,
    /// Volume polarizability, m³; χ = 4πε₀α.
    pub alpha_vol: f64,
}

/// χ for a volume polarizability α.
pub fn chi_from_alpha(alpha_vol: f64) -> f64 {
    FOUR_PI_EPSILON_0 * alpha_vol
}

/// The κ whose geometric phase equals that of χ = 4πε₀α, i.e. κ/c² = χ.
pub fn kappa_equivalent(alpha_vol: f64) -> f64 {
    FOUR_PI_EPSILON_0 * alpha_vol * C2
}

impl ParticleSpecies {
    /// Particle with no dipoles and no polarizability.
    pub fn inert(mass: f64) -> Self {
        Self {
            mass,
            d0: Vec3::zeros(),
            mu0: Vec3::zeros(),
            chi: 0.0,
            kappa: 0.0,
            alpha_vol: 0.0,
        }
    }

    /// Induced electric dipole only, with χ and α kept consistent.
    pub fn polarizable(mass: f64, alpha_vol: f64) -> Self {
        Self {
            chi: chi_from_alpha(alpha_vol),
            alpha_vol,
            ..Self::inert(mass)
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn with_alpha(mut self, alpha_vol: f64) -> Self {
        self.alpha_vol = alpha_vol;
        self
    }

    pub fn with_d0(mut self, d0: Vec3) -> Self {
        self.d0 = d0;
        self
    }

    pub fn with_mu0(mut self, mu0: Vec3) -> Self {
        self.mu0 = mu0;
        self
    }

    pub fn validate(&self) -> Result<(), PhaseError> {
        let finite = [self.mass, self.chi, self.kappa, self.alpha_vol]
            .iter()
            .chain(self.d0.iter())
            .chain(self.mu0.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(PhaseError::InvalidSpecies("non-finite parameter".into()));
        }
        if !(self.mass > 0.0) {
            return Err(PhaseError::InvalidSpecies(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if self.chi < 0.0 || self.kappa < 0.0 || self.alpha_vol < 0.0 {
            return Err(PhaseError::InvalidSpecies(
                "chi, kappa and alpha_vol must be nonnegative".into(),
            ));
        }
        if self.chi != 0.0 && self.alpha_vol != 0.0 {
            let implied = chi_from_alpha(self.alpha_vol);
            if (self.chi - implied).abs() >= 1e-12 * self.chi {
                return Err(PhaseError::InvalidSpecies(format!(
                    "chi = {:e} is inconsistent with alpha_vol = {:e} (4πε₀α = {:e})",
                    self.chi, self.alpha_vol, implied
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{C, EPSILON_0};
    use crate::vec3;

    #[test]
    fn polarizable_species_is_consistent() {
        let s = ParticleSpecies::polarizable(1.16e-26, 24.3e-30);
        assert!(s.validate().is_ok());
        assert_eq!(s.chi, 4.0 * std::f64::consts::PI * EPSILON_0 * 24.3e-30);
    }

    #[test]
    fn inconsistent_alpha_rejected() {
        let s = ParticleSpecies::polarizable(1.0, 1e-30).with_chi(2e-40);
        assert!(matches!(s.validate(), Err(PhaseError::InvalidSpecies(_))));
        assert!(ParticleSpecies::inert(0.0).validate().is_err());
        assert!(ParticleSpecies::inert(1.0).with_kappa(-1.0).validate().is_err());
        assert!(ParticleSpecies::inert(1.0)
            .with_d0(vec3(f64::NAN, 0.0, 0.0))
            .validate()
            .is_err());
    }

    #[test]
    fn kappa_equivalent_matches_hand_value() {
        let k = kappa_equivalent(1e-30);
        let hand = 4.0 * std::f64::consts::PI * 8.8541878128e-12 * 1e-30 * C * C;
        assert!((k - hand).abs() < 1e-15 * hand);
    }
}
