//! Scalar special functions shared across the crate: standard normal density,
//! distribution, and quantile, plus small factorial helpers.

/// 1/sqrt(2*pi).
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate to full double precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Inverse of the standard normal distribution function.
///
/// Rational approximation of Wichura (algorithm AS 241, PPND16 variant),
/// relative accuracy about 1e-15 over (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly7(&A_CENTRAL, r) / poly7(&B_CENTRAL, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly7(&A_TAIL, r) / poly7(&B_TAIL, r)
    } else {
        let r = r - 5.0;
        poly7(&A_FAR, r) / poly7(&B_FAR, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn poly7(c: &[f64; 8], x: f64) -> f64 {
    // Horner evaluation, highest coefficient last in the tables below.
    let mut acc = c[7];
    for k in (0..7).rev() {
        acc = acc * x + c[k];
    }
    acc
}

const A_CENTRAL: [f64; 8] = [
    3.387_132_872_796_366_5e0,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_3e3,
    1.373_716_988_965_970_4e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const B_CENTRAL: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_545_6e3,
];
const A_TAIL: [f64; 8] = [
    1.423_437_110_749_683_5e0,
    4.630_337_846_156_546e0,
    5.769_497_221_460_691e0,
    3.647_848_324_763_204_5e0,
    1.270_458_252_452_368_4e0,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const B_TAIL: [f64; 8] = [
    1.0,
    2.053_191_626_637_759e0,
    1.676_384_830_183_803_8e0,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const A_FAR: [f64; 8] = [
    6.657_904_643_501_103e0,
    5.463_784_911_164_114e0,
    1.784_826_539_917_291_3e0,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const B_FAR: [f64; 8] = [
    1.0,
    5.998_322_065_558_88e-1,
    1.369_298_809_227_358e-1,
    1.489_796_764_282_181_4e-2,
    7.868_691_311_456_132e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// n! as a float; exact for n <= 170.
pub fn factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    for k in 2..=n {
        acc *= k as f64;
    }
    acc
}

/// Binomial coefficient C(n, k) as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_cdf_reference_values() {
        assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-16);
        // Phi(-3) used throughout the reliability fixtures.
        assert_abs_diff_eq!(normal_cdf(-3.0), 1.349_898_031_630_095e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(normal_cdf(1.96), 0.975_002_104_851_780_2, epsilon = 1e-14);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.025, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-6] {
            let x = inverse_normal_cdf(p);
            assert_abs_diff_eq!(normal_cdf(x), p, epsilon = 1e-13 * p.max(1e-3));
        }
    }

    #[test]
    fn factorial_and_binomial() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert_eq!(binomial(10, 2), 45.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(100, 2), 4950.0);
    }
}
