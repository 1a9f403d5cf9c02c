//! Stationary isotropic covariance functions of the Matérn family.

use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use crate::special::bessel_k;

/// Matérn covariance parameters on the unit cube in `dim` spatial dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceModel {
    variance: f64,
    corr_length: f64,
    smoothness: f64,
    dim: usize,
}

impl CovarianceModel {
    pub fn matern(variance: f64, corr_length: f64, smoothness: f64, dim: usize) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variance must be positive and finite, got {variance}"
            )));
        }
        if !(corr_length.is_finite() && corr_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "correlation length must be positive and finite, got {corr_length}"
            )));
        }
        if !(smoothness.is_finite() && smoothness >= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "smoothness must be finite and at least 1/2, got {smoothness}"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        Ok(Self {
            variance,
            corr_length,
            smoothness,
            dim,
        })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn corr_length(&self) -> f64 {
        self.corr_length
    }

    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Covariance as a function of the Euclidean distance `r ≥ 0`.
    pub fn rho_at_distance(&self, r: f64) -> f64 {
        let nu = self.smoothness;
        let z = (2.0 * nu).sqrt() * r / self.corr_length;
        if z == 0.0 {
            return self.variance;
        }
        let k = bessel_k(nu, z);
        if k == 0.0 {
            return 0.0;
        }
        // σ² 2^{1-ν}/Γ(ν) z^ν K_ν(z), combined in log space so that neither
        // z^ν nor K_ν(z) overflows on its own for large ν.
        let log_val = (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) + nu * z.ln() + k.ln();
        let val = self.variance * log_val.exp();
        if val.is_finite() {
            val.min(self.variance)
        } else {
            self.variance
        }
    }

    /// Covariance ρ(x) at a displacement of length `dim`.
    pub fn rho(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "displacement",
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("displacement {x:?}")));
        }
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(self.rho_at_distance(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn value_at_origin_is_variance() {
        let m = CovarianceModel::matern(0.25, 0.2, 0.5, 2).unwrap();
        assert_eq!(m.rho(&[0.0, 0.0]).unwrap(), 0.25);
        let m = CovarianceModel::matern(0.25, 0.5, 4.0, 2).unwrap();
        assert_eq!(m.rho(&[0.0, 0.0]).unwrap(), 0.25);
    }

    #[test]
    fn exponential_kernel_at_unit_distance() {
        let m = CovarianceModel::matern(1.0, 1.0, 0.5, 3).unwrap();
        let got = m.rho(&[0.6, 0.8, 0.0]).unwrap();
        assert!((got - (-1.0f64).exp()).abs() < 1e-15);
        assert!((got - 0.367_879).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CovarianceModel::matern(0.0, 0.2, 1.0, 2).is_err());
        assert!(CovarianceModel::matern(1.0, -0.2, 1.0, 2).is_err());
        assert!(CovarianceModel::matern(1.0, 0.2, 0.4, 2).is_err());
        assert!(CovarianceModel::matern(1.0, 0.2, 1.0, 4).is_err());
        let m = CovarianceModel::matern(1.0, 0.2, 1.0, 2).unwrap();
        assert!(matches!(m.rho(&[f64::NAN, 0.0]), Err(Error::NonFinite(_))));
        assert!(m.rho(&[0.0]).is_err());
    }

    #[test]
    fn exponential_kernel_matches_closed_form_on_random_displacements() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = CovarianceModel::matern(0.7, 0.3, 0.5, 2).unwrap();
        for _ in 0..1000 {
            let x: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let exact = 0.7 * (-r / 0.3).exp();
            let got = m.rho(&x).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-10, "{x:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn large_smoothness_near_origin_stays_finite() {
        let m = CovarianceModel::matern(0.25, 0.5, 40.0, 1).unwrap();
        let v = m.rho(&[1e-6]).unwrap();
        assert!(v.is_finite() && v <= 0.25 && v > 0.2499);
    }

    proptest! {
        #[test]
        fn even_bounded_and_monotone(
            nu in 0.5f64..6.0,
            lam in 0.05f64..1.5,
            x in prop::array::uniform3(-2.0f64..2.0),
            t1 in 0.0f64..3.0,
            dt in 0.0f64..3.0,
        ) {
            let m = CovarianceModel::matern(0.25, lam, nu, 3).unwrap();
            let a = m.rho(&x).unwrap();
            let b = m.rho(&[-x[0], -x[1], -x[2]]).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.abs() <= m.variance());
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-12);
            let e = [x[0] / norm, x[1] / norm, x[2] / norm];
            let t2 = t1 + dt;
            let r1 = m.rho(&[t1 * e[0], t1 * e[1], t1 * e[2]]).unwrap();
            let r2 = m.rho(&[t2 * e[0], t2 * e[1], t2 * e[2]]).unwrap();
            prop_assert!(r1 >= r2 - 1e-15 * m.variance());
        }
    }
}
