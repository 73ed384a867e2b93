use std::f64::consts::PI;

use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;

// g = 7, n = 9 coefficients (Godfrey).
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument for which Γ(x) is finite in f64.
pub const GAMMA_MAX_ARG: f64 = 171.0;

/// Euler's Gamma function on `(0, 171]`.
pub fn euler_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= GAMMA_MAX_ARG) {
        return Err(Error::domain(format!(
            "gamma argument {x} outside (0, {GAMMA_MAX_ARG}]"
        )));
    }
    Ok(gamma_unchecked(x))
}

/// Γ without the domain guard; callers guarantee `0 < x <= 171`.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 23.0 {
        // (x-1)! is exact in f64 up to 22!
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let w = z + LANCZOS_G + 0.5;
    // split the power so that w^(z+1/2) does not overflow before exp(-w) is applied
    let half = w.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (-w).exp() * half * series
}
