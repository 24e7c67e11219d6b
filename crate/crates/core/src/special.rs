//! Log-gamma and exact binomial coefficients.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0` (Lanczos, g = 7).
///
/// Returns NaN for non-positive or non-finite input.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if !(x > T::zero()) || !x.is_finite() {
        return T::nan();
    }
    let half = T::lit(0.5);
    if x < half {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (z + T::lit(i as f64));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (z + half) * t.ln() - t + acc.ln()
}

/// Γ(x) for `x > 0`.
pub fn gamma<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}

/// Binomial coefficient C(n, k) computed exactly; 0 when `k > n`.
///
/// Exact for every `n` this crate can enumerate (`n <= 62`).
pub fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * u128::from(n - j) / u128::from(j + 1);
    }
    acc as u64
}
