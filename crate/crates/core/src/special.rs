//! Special functions on the positive real axis.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

// Lanczos coefficients from statrs (Pugh 2004, g = 10.900511, n = 11).
const GAMMA_R: f64 = 10.900511;
const GAMMA_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
const TWO_SQRT_E_OVER_PI: f64 =
    1.860_382_734_205_265_717_336_249_247_266_663_112_059_421_841_408_575_5;

fn lanczos_sum(x: f64) -> f64 {
    GAMMA_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(GAMMA_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0))
}

/// Euler's gamma function for `z > 0`.
pub fn gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma requires z > 0, got {z}"
        )));
    }
    if z < 0.5 {
        // Γ(z) = Γ(z + 1) / z keeps us on the accurate branch of the approximation.
        return Ok(gamma_unchecked(z + 1.0) / z);
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(x: f64) -> f64 {
    lanczos_sum(x) * TWO_SQRT_E_OVER_PI * ((x - 0.5 + GAMMA_R) / E).powf(x - 0.5)
}

/// Natural log of Γ(z) for `z > 0`; does not overflow for large arguments.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ln_gamma requires z > 0, got {z}"
        )));
    }
    if z < 0.5 {
        return Ok(ln_gamma(z + 1.0)? - z.ln());
    }
    Ok(lanczos_sum(z).ln() + TWO_SQRT_E_OVER_PI.ln() + (z - 0.5) * ((z - 0.5 + GAMMA_R) / E).ln())
}

/// Exponentially scaled modified Bessel function `exp(-x) I₀(x)` for `x >= 0`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 30.0 {
        // Power series; every term is positive.
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k: f64 = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Hankel asymptotic expansion, truncated at the smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k: f64 = 1.0;
        loop {
            let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * x * k);
            if next < 1e-17 * sum || next > term {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}
