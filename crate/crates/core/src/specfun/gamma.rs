//! Lanczos gamma function (g = 7, nine coefficients), real and complex.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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
// ln sqrt(2 pi)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Gamma function for positive real arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("gamma_fn: argument must be positive and finite, got {x}")));
    }
    Ok(gamma_real(x))
}

fn gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_real(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        // exact factorials
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let y = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    // t^(y+0.5) e^-t split to delay overflow
    let pw = t.powf(0.5 * (y + 0.5));
    (2.0 * PI).sqrt() * pw * (pw * (-t).exp()) * acc
}

/// Principal branch of ln Gamma(w) for complex `w` away from the poles.
pub fn ln_gamma_complex(w: Complex64) -> Complex64 {
    if w.re < 0.5 {
        // reflection: ln Gamma(w) = ln pi - ln sin(pi w) - ln Gamma(1 - w)
        let s = (w * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_complex(1.0 - w);
    }
    let y = w - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    (y + 0.5) * t.ln() - t + LN_SQRT_2PI + acc.ln()
}
