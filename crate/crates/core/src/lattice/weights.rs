//! POD weights and weight-function parameters for the lattice construction.
//!
//! Given the nonincreasing sensitivities `b_j`, every dimension gets a
//! weight-function decay rate `α_j`, a modified sensitivity `b̃_j`, and the
//! constant `ϱ(α_j, κ)`. The weights then factor as
//! `γ_u = Γ_{|u|} · Π_{j∈u} β_j` with
//! `Γ_ℓ = (ℓ! / (ln 2)^ℓ)^{2/(1+κ)}` and
//! `β_j = (b̃_j² / ((α_j − b_j) ϱ_j))^{1/(1+κ)}`.

use libm::lgamma as ln_gamma;

use super::normal::normal_cdf;
use crate::error::{Error, Result};
use crate::special::riemann_zeta;

pub const DEFAULT_KAPPA: f64 = 0.6;

pub fn eta(kappa: f64) -> f64 {
    (2.0 * kappa - 1.0) / (4.0 * kappa)
}

/// Decay rate minimising the error bound for sensitivity `b`.
pub fn optimal_alpha(b: f64, kappa: f64) -> f64 {
    0.5 * (b + (b * b + 1.0 - 1.0 / (2.0 * kappa)).sqrt())
}

/// ϱ(α, κ).
pub fn varrho(alpha: f64, kappa: f64) -> f64 {
    let e = eta(kappa);
    let pi = std::f64::consts::PI;
    let inner = (2.0 * pi).sqrt() * (alpha * alpha / e).exp()
        / (pi.powf(2.0 - 2.0 * e) * (1.0 - e) * e);
    2.0 * inner.powf(kappa) * riemann_zeta(kappa + 0.5)
}

/// b̃ = b / (2 exp(b²/2) Φ(b)).
pub fn modified_b(b: f64) -> f64 {
    b / (2.0 * (0.5 * b * b).exp() * normal_cdf(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSetup {
    kappa: f64,
    b: Vec<f64>,
    alpha: Vec<f64>,
    b_tilde: Vec<f64>,
    varrho: Vec<f64>,
    beta: Vec<f64>,
    scale: f64,
}

impl WeightSetup {
    /// `b` must be nonnegative and nonincreasing; `kappa` in (1/2, 1).
    pub fn new(b: &[f64], kappa: f64) -> Result<Self> {
        if !(kappa > 0.5 && kappa < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (1/2, 1), got {kappa}"
            )));
        }
        if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter(
                "b must be finite and nonnegative".into(),
            ));
        }
        if b.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("b must be nonincreasing".into()));
        }
        let alpha: Vec<f64> = b.iter().map(|&bj| optimal_alpha(bj, kappa)).collect();
        let b_tilde: Vec<f64> = b.iter().map(|&bj| modified_b(bj)).collect();
        let varrho: Vec<f64> = alpha.iter().map(|&a| varrho(a, kappa)).collect();
        let expo = 1.0 / (1.0 + kappa);
        let beta = (0..b.len())
            .map(|j| {
                (b_tilde[j] * b_tilde[j] / ((alpha[j] - b[j]) * varrho[j])).powf(expo)
            })
            .collect();
        Ok(Self {
            kappa,
            b: b.to_vec(),
            alpha,
            b_tilde,
            varrho,
            beta,
            scale: 1.0,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Exponent `p = 2κ/(1+κ)` of the summability condition on `b`.
    pub fn p(&self) -> f64 {
        2.0 * self.kappa / (1.0 + self.kappa)
    }

    pub fn s(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn b_tilde(&self) -> &[f64] {
        &self.b_tilde
    }

    pub fn varrho(&self) -> &[f64] {
        &self.varrho
    }

    /// Product part `β_j` of the POD weights.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Order part `Γ_ℓ`; overflows to infinity for large ℓ.
    pub fn order_weight(&self, ell: usize) -> f64 {
        if ell == 0 {
            return 1.0;
        }
        let l = ell as f64;
        let log = ln_gamma(l + 1.0) - l * std::f64::consts::LN_2.ln();
        self.scale * (2.0 * log / (1.0 + self.kappa)).exp()
    }

    /// `Γ_ℓ / Γ_{ℓ−1}` for ℓ ≥ 1.
    pub fn order_ratio(&self, ell: usize) -> f64 {
        let c = if ell == 1 { self.scale } else { 1.0 };
        c * (ell as f64 / std::f64::consts::LN_2).powf(2.0 / (1.0 + self.kappa))
    }

    /// γ_u evaluated from its closed form; `u` holds 0-based dimensions.
    pub fn gamma(&self, u: &[usize]) -> f64 {
        let l = u.len();
        let mut fact = 1.0;
        for i in 1..=l {
            fact *= i as f64;
        }
        let order = fact / std::f64::consts::LN_2.powi(l as i32);
        let prod: f64 = u
            .iter()
            .map(|&j| {
                self.b_tilde[j] * self.b_tilde[j] / ((self.alpha[j] - self.b[j]) * self.varrho[j])
            })
            .product();
        if l == 0 {
            return 1.0;
        }
        self.scale * (order * order * prod).powf(1.0 / (1.0 + self.kappa))
    }

    /// Copy with every γ_u (u nonempty) multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            scale: self.scale * c,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_three_quarters() {
        assert!((eta(0.75) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn zero_sensitivity() {
        let w = WeightSetup::new(&[0.5, 0.0], 0.6).unwrap();
        assert!((w.alpha()[1] - 0.5 * (1.0f64 - 1.0 / 1.2).sqrt()).abs() < 1e-16);
        assert_eq!(w.b_tilde()[1], 0.0);
        assert_eq!(w.beta()[1], 0.0);
        assert_eq!(w.gamma(&[0, 1]), 0.0);
        assert!(w.gamma(&[0]) > 0.0);
    }

    #[test]
    fn extended_precision_reference() {
        // Frozen from a 40-digit evaluation of the same formulas.
        let w = WeightSetup::new(&[0.1], 0.6).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(w.alpha()[0], 0.260_158_670_215_308_192_19) < 1e-14);
        assert!(rel(w.varrho()[0], 79.452_414_488_357_040_346) < 1e-12);
        assert!(rel(w.b_tilde()[0], 0.092_160_167_601_922_088_922) < 1e-14);
        assert!(rel(w.beta()[0], 0.010_357_813_780_597_690_913) < 1e-12);
    }

    #[test]
    fn invariants_hold() {
        let b: Vec<f64> = (0..40).map(|j| 0.9 / (1.0 + j as f64).powi(2)).collect();
        let w = WeightSetup::new(&b, 0.8).unwrap();
        for j in 0..b.len() {
            assert!(w.alpha()[j] > b[j]);
            assert!(w.b_tilde()[j] <= b[j]);
        }
        assert!((w.p() - 1.6 / 1.8).abs() < 1e-15);
    }

    #[test]
    fn pod_factorisation_matches_closed_form() {
        let b = [0.8, 0.5, 0.3, 0.3, 0.05];
        let w = WeightSetup::new(&b, 0.6).unwrap();
        let subsets: [&[usize]; 5] = [&[0], &[1, 3], &[0, 2, 4], &[0, 1, 2, 3], &[0, 1, 2, 3, 4]];
        for u in subsets {
            let pod = w.order_weight(u.len()) * u.iter().map(|&j| w.beta()[j]).product::<f64>();
            let closed = w.gamma(u);
            assert!(closed > 0.0);
            assert!(((pod - closed) / closed).abs() < 1e-13, "{u:?}");
        }
        for l in 1..10 {
            let r = w.order_weight(l) / w.order_weight(l - 1);
            assert!(((r - w.order_ratio(l)) / r).abs() < 1e-13);
        }
        assert_eq!(w.order_weight(0), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightSetup::new(&[0.1], 0.5).is_err());
        assert!(WeightSetup::new(&[0.1], 1.0).is_err());
        assert!(WeightSetup::new(&[0.1, 0.2], 0.6).is_err());
        assert!(WeightSetup::new(&[-0.1], 0.6).is_err());
    }
}
