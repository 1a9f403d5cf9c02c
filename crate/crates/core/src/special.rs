//! Special functions not covered by `statrs`: the modified Bessel function of
//! the second kind for real order, and the Riemann zeta function for real
//! arguments above one.

use std::f64::consts::PI;

const EPS: f64 = 1.0e-16;
const MAX_ITER: usize = 100_000;

// Taylor coefficients of 1/Γ(z) around z = 0 (coefficient of z^k at index k).
const RGAMMA_TAYLOR: [f64; 31] = [
    0.0,
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
];

/// Returns (Γ1(μ), Γ2(μ), 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2, where
/// Γ1 = (1/Γ(1−μ) − 1/Γ(1+μ)) / (2μ) and Γ2 = (1/Γ(1−μ) + 1/Γ(1+μ)) / 2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Γ(1+μ) = Σ_k c_k μ^{k-1}; split into even and odd powers of μ.
    let mu2 = mu * mu;
    let mut even = 0.0; // Σ c_{2j+1} μ^{2j}
    let mut odd = 0.0; // Σ c_{2j+2} μ^{2j}
    let mut k = RGAMMA_TAYLOR.len() - 1;
    // Horner in μ² over the two interleaved sub-series.
    while k >= 1 {
        if k % 2 == 1 {
            even = even * mu2 + RGAMMA_TAYLOR[k];
        } else {
            odd = odd * mu2 + RGAMMA_TAYLOR[k];
        }
        k -= 1;
    }
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

/// Modified Bessel function of the second kind K_ν(x) for real ν ≥ 0 and
/// x > 0. Temme's series below x = 2, Steed's continued fraction above,
/// then forward recurrence in the order. Returns 0 where the result
/// underflows.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x > 0.0, "bessel_k requires nu >= 0 and x > 0");
    if x > 745.0 {
        return 0.0;
    }
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let (mut k_mu, mut k_mu1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1usize;
        loop {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS || i > MAX_ITER {
                break;
            }
            i += 1;
        }
        k_mu = sum;
        k_mu1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 2usize;
        loop {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS || i > MAX_ITER {
                break;
            }
            i += 1;
        }
        h *= a1;
        k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    k_mu
}

/// Riemann zeta function ζ(s) for real s > 1 by Euler–Maclaurin summation.
pub fn riemann_zeta(s: f64) -> f64 {
    assert!(s > 1.0, "riemann_zeta requires s > 1");
    const N: usize = 20;
    // B_{2j} / (2j)!
    const BERNOULLI_OVER_FACT: [f64; 6] = [
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40_320.0,
        5.0 / 66.0 / 3_628_800.0,
        -691.0 / 2730.0 / 479_001_600.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) times N^{-s-2j+1}
    let mut rising = s;
    let mut npow = nf.powf(-s - 1.0);
    for (j, coef) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += coef * rising * npow;
        let a = s + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        npow /= nf * nf;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from an arbitrary-precision evaluation.
    #[test]
    fn bessel_k_reference_values() {
        let cases = [
            (0.0, 0.1, 2.427_069_024_702_016_6),
            (0.0, 1.0, 0.421_024_438_240_708_33),
            (0.5, 1.0, 0.461_068_504_447_894_56),
            (1.5, 0.3, 7.345_697_910_803_560_5),
            (2.0, 2.5, 0.121_460_206_278_563_84),
            (4.0, 0.05, 7_678_400.249_947_982_6),
            (4.0, 10.0, 3.786_143_716_089_198_4e-5),
            (2.3, 5.0, 5.961_350_317_441_102e-3),
        ];
        for (nu, x, expected) in cases {
            let got = bessel_k(nu, x);
            assert!(rel(got, expected) < 1e-12, "K_{nu}({x}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn half_integer_closed_form() {
        for &x in &[0.01, 0.5, 1.0, 1.999, 2.0, 3.7, 40.0] {
            let k12 = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x), k12) < 1e-13);
            let k32 = k12 * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x), k32) < 1e-13);
        }
    }

    #[test]
    fn far_field_underflows_to_zero() {
        assert_eq!(bessel_k(1.0, 800.0), 0.0);
    }

    #[test]
    fn zeta_reference_values() {
        assert!(rel(riemann_zeta(2.0), PI * PI / 6.0) < 1e-14);
        assert!(rel(riemann_zeta(1.1), 10.584_448_464_950_801) < 1e-13);
        assert!(rel(riemann_zeta(1.5), 2.612_375_348_685_488) < 1e-13);
    }
}
