//! Shift-averaged kernel θ for the weight function ψ²(t) = exp(−2α|t|).

use super::normal::{inv_normal_cdf_unchecked, normal_cdf};
use crate::quadrature::integrate;

const TAIL_TOL: f64 = 1e-16;
const QUAD_TOL: f64 = 1e-13;

/// ∫_{−∞}^0 Φ(t)² / ψ(t)² dt = ∫_0^∞ Φ(−t)² e^{2αt} dt.
pub fn theta_integral(alpha: f64) -> f64 {
    let integrand = |t: f64| {
        let p = normal_cdf(-t);
        p * p * (2.0 * alpha * t).exp()
    };
    let cutoff = tail_cutoff(alpha);
    let body = integrate(integrand, 0.0, cutoff, QUAD_TOL);
    body + tail_estimate(alpha, cutoff)
}

/// Smallest T (on a 1/8 grid) beyond the peak with Φ(−T)² e^{2αT} < 1e-16.
pub(crate) fn tail_cutoff(alpha: f64) -> f64 {
    let mut t = alpha.max(1.0);
    loop {
        let p = normal_cdf(-t);
        if p * p * (2.0 * alpha * t).exp() < TAIL_TOL {
            return t;
        }
        t += 0.125;
    }
}

/// Leading-order tail ∫_T^∞ Φ(−t)² e^{2αt} dt using Φ(−t) ≈ φ(t)/t:
/// e^{α²} erfc(T − α) / (4 √π T²).
pub(crate) fn tail_estimate(alpha: f64, cutoff: f64) -> f64 {
    let erfc = libm::erfc(cutoff - alpha);
    (alpha * alpha).exp() * erfc / (4.0 * std::f64::consts::PI.sqrt() * cutoff * cutoff)
}

/// θ for a fixed α with its integral constant precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    alpha: f64,
    exp_term: f64,
    phi_2a: f64,
    constant: f64,
}

impl Theta {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0, "theta requires alpha > 0");
        Self {
            alpha,
            exp_term: (2.0 * alpha * alpha).exp(),
            phi_2a: normal_cdf(2.0 * alpha),
            constant: 2.0 * theta_integral(alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// θ(x) for x in [0, 1]; symmetric about 1/2.
    pub fn eval(&self, x: f64) -> f64 {
        let x = if x > 0.5 { 1.0 - x } else { x };
        let shifted = if x <= 0.0 {
            0.0
        } else {
            normal_cdf(2.0 * self.alpha + inv_normal_cdf_unchecked(x))
        };
        (x - 0.5 + self.exp_term * (self.phi_2a - shifted)) / self.alpha - self.constant
    }
}

/// θ(x) for a single α; recomputes the integral constant.
pub fn theta(x: f64, alpha: f64) -> f64 {
    Theta::new(alpha).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn integral_agrees_with_fixed_composite_rule() {
        for &alpha in &[0.2, 0.29, 0.5, 0.8, 1.3] {
            let adaptive = theta_integral(alpha);
            // fixed high-resolution rule over a generous interval
            let fixed = simpson(
                |t| {
                    let p = normal_cdf(-t);
                    p * p * (2.0 * alpha * t).exp()
                },
                0.0,
                20.0,
                400_000,
            );
            assert!((adaptive - fixed).abs() < 1e-10, "{alpha}: {adaptive} vs {fixed}");
        }
    }

    #[test]
    fn tail_is_negligible() {
        for &alpha in &[0.2, 0.8, 1.5] {
            let t = tail_cutoff(alpha);
            assert!(tail_estimate(alpha, t) < 1e-15);
        }
    }

    #[test]
    fn symmetric_about_one_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let th = Theta::new(0.4);
        for _ in 0..500 {
            // dyadic x keeps 1 - x exact
            let x = (rng.random::<u32>() >> 8) as f64 / (1u64 << 24) as f64;
            assert!((th.eval(x) - th.eval(1.0 - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_at_endpoints() {
        let th = Theta::new(0.7);
        let at_zero = th.eval(0.0);
        assert!(at_zero.is_finite());
        assert!((th.eval(1e-300) - at_zero).abs() < 1e-12);
        assert_eq!(th.eval(1.0), at_zero);
    }

    #[test]
    fn integrates_to_zero_over_unit_interval() {
        for &alpha in &[0.3, 0.7, 1.5] {
            let th = Theta::new(alpha);
            let total = 2.0 * integrate(|x| th.eval(x), 0.0, 0.5, 1e-12);
            assert!(total.abs() < 1e-9, "{alpha}: {total}");
        }
    }

    #[test]
    fn convenience_matches_precomputed() {
        let th = Theta::new(0.55);
        assert_eq!(theta(0.3, 0.55), th.eval(0.3));
    }
}
