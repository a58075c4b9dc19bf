//! `G^{2,1}_{1,2}(z | 1 ; c+2, c+1)` by Mellin-Barnes contour integration.
//!
//! With `b = c + 1` the function is
//!
//! ```text
//! G(z) = 1/(2 pi i) \int_L Gamma(b + 1 + s) Gamma(b + s) Gamma(-s) z^{-s} ds
//! ```
//!
//! where `L` is the vertical line `Re s = sigma`, `-b < sigma < 0`. The
//! integrand is conjugate-symmetric in `Im s`, so only the upper half line is
//! integrated. For `z <= 1` the contour is moved left past the simple pole at
//! `s = -b`, which removes the leading `Gamma(b) z^b` behaviour and leaves a
//! remainder that is small and free of cancellation.

use num_complex::Complex64;

use super::gamma::{gamma_fn, ln_gamma_complex};
use super::quadrature::{integrate_finite, QuadratureSpec, Transform};
use crate::error::{Error, Result};

fn check_args(z: f64, c2: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid(format!("meijer_g2112: argument must be positive and finite, got {z}")));
    }
    if !(c2 > -1.0) || !c2.is_finite() {
        return Err(Error::invalid(format!("meijer_g2112: parameter must exceed -1, got {c2}")));
    }
    Ok(())
}

/// `G^{2,1}_{1,2}(z | 1 ; c2 + 2, c2 + 1)` for `z > 0`, `c2 > -1`.
pub fn meijer_g2112(z: f64, c2: f64) -> Result<f64> {
    check_args(z, c2)?;
    let b = c2 + 1.0;
    if z > 1.0 {
        direct(z, b)
    } else {
        let lead = gamma_fn(b)?;
        let rem = remainder_left(z, b)?;
        Ok(z.powf(b) * (lead + rem))
    }
}

/// `z^{-(c2+1)} G(z) - Gamma(c2 + 1)`: the Meijer-G value with its leading
/// small-argument term removed and rescaled.
pub fn meijer_g2112_remainder(z: f64, c2: f64) -> Result<f64> {
    check_args(z, c2)?;
    let b = c2 + 1.0;
    if z > 1.0 {
        Ok(direct(z, b)? * z.powf(-b) - gamma_fn(b)?)
    } else {
        remainder_left(z, b)
    }
}

// Contour in (-b, 0), close to 0 when z is large.
fn direct(z: f64, b: f64) -> Result<f64> {
    let frac = (1.0 / z.ln()).clamp(0.1, 0.5);
    let sigma = -b * frac;
    contour_integral(z, b, sigma, 0.0)
}

// Contour in (-b - 1, -b), close to the left edge when z is small. The extra
// factor z^{-b} is folded into the integrand.
fn remainder_left(z: f64, b: f64) -> Result<f64> {
    let lnz = z.ln().abs();
    let delta = if lnz > 0.0 { (1.0 / lnz).clamp(0.1, 0.5) } else { 0.5 };
    let sigma = -b - 1.0 + delta;
    contour_integral(z, b, sigma, b)
}

fn integrand(s: Complex64, b: f64, lnz: f64, shift: f64) -> Complex64 {
    let lg_b = ln_gamma_complex(s + b);
    // Gamma(b + 1 + s) = (b + s) Gamma(b + s)
    let log_w = (s + b).ln() + lg_b + lg_b + ln_gamma_complex(-s) - (s + shift) * lnz;
    log_w.exp()
}

fn contour_integral(z: f64, b: f64, sigma: f64, shift: f64) -> Result<f64> {
    let lnz = z.ln();
    let f = |t: f64| integrand(Complex64::new(sigma, t), b, lnz, shift).re;
    let peak = integrand(Complex64::new(sigma, 0.0), b, lnz, shift).norm();
    // the integrand decays like exp(-3 pi t / 2); stop once it is negligible
    let mut upper = 2.0;
    while integrand(Complex64::new(sigma, upper), b, lnz, shift).norm() > 1e-18 * peak {
        upper += 1.0;
        if upper > 200.0 {
            return Err(Error::NonConvergence {
                context: "Meijer-G contour",
                detail: "integrand failed to decay".into(),
            });
        }
    }
    let spec = QuadratureSpec {
        rel_tol: 1e-14,
        abs_tol: 1e-13 * peak,
        max_subdivisions: 2000,
        transform: Transform::None,
        sqrt_singularity: false,
        scale: 1.0,
    };
    let r = integrate_finite(f, 0.0, upper, &spec)?;
    Ok(r.value / std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::super::bessel::xk1_scaled;
    use super::super::quadrature::integrate_semi_infinite;
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // theta^{-c2-1} G(theta/p) = int_0^inf x^{c2} e^{-p x} g(theta x) dx
    fn by_quadrature(theta: f64, p: f64, c2: f64) -> f64 {
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_subdivisions: 2000,
            sqrt_singularity: c2 < 0.0,
            scale: 1.0 / p,
            ..Default::default()
        };
        integrate_semi_infinite(|x: f64| x.powf(c2) * (-p * x).exp() * xk1_scaled(theta * x).unwrap(), &spec).unwrap()
    }

    // General G^{2,1}_{1,2}(z | a ; b1, b2) by the trapezoid rule on a
    // vertical line; exponentially convergent for this analytic integrand.
    fn trapezoid_g(z: f64, a: f64, b1: f64, b2: f64, sigma: f64) -> f64 {
        let h = 0.01;
        let mut sum = 0.0;
        for k in -4000..=4000 {
            let s = Complex64::new(sigma, k as f64 * h);
            let w = (ln_gamma_complex(s + b1) + ln_gamma_complex(s + b2) + ln_gamma_complex(1.0 - a - s) - s * z.ln())
                .exp();
            sum += w.re;
        }
        sum * h / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn reference_values() {
        let c0 = [
            (1e-6, 9.999_867_616_908_686e-7),
            (1e-4, 9.991_365_911_929_788e-5),
            (0.01, 0.009_592_148_855_654_358),
            (0.5, 0.269_272_341_879_067_4),
            (1.0, 0.403_652_637_676_805_9),
            (2.0, 0.554_685_532_447_109_7),
            (10.0, 0.843_666_606_021_191_8),
            (1e3, 0.998_005_976_119_285),
        ];
        for (z, want) in c0 {
            let got = meijer_g2112(z, 0.0).unwrap();
            assert!(rel(got, want) < 1e-10, "z={z}: {got} vs {want}");
        }
        let ch = [
            (1e-6, 0.001_772_441_776_418_061),
            (1e-4, 0.017_716_544_602_113_41),
            (0.01, 0.173_298_321_945_906_9),
            (0.5, 0.887_328_467_893_537),
            (1.0, 1.069_587_562_082_061_3),
            (2.0, 1.232_485_075_188_329),
            (10.0, 1.470_365_598_440_826_4),
            (1e3, 1.569_620_432_064_659),
        ];
        for (z, want) in ch {
            let got = meijer_g2112(z, -0.5).unwrap();
            assert!(rel(got, want) < 1e-10, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn matches_laplace_integral_of_bessel_kernel() {
        for c2 in [0.0, -0.5] {
            let (theta, p) = (0.5f64, 1.0);
            let closed = theta.powf(-c2 - 1.0) * meijer_g2112(theta / p, c2).unwrap();
            let quad = by_quadrature(theta, p, c2);
            assert!(rel(closed, quad) < 1e-8, "c2={c2}: {closed} vs {quad}");
        }
    }

    #[test]
    fn log_grid_against_quadrature() {
        for c2 in [0.0, -0.5] {
            for k in 0..=14 {
                let z = 10f64.powf(-4.0 + 0.5 * k as f64);
                let p = 1.0;
                let theta = z * p;
                let closed = theta.powf(-c2 - 1.0) * meijer_g2112(z, c2).unwrap();
                let quad = by_quadrature(theta, p, c2);
                assert!(rel(closed, quad) < 1e-8, "z={z} c2={c2}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn argument_shift_identity() {
        // G(z | 1; 2, 1) = z G(z | 0; 1, 0)
        for z in [0.05, 0.7, 3.0, 40.0] {
            let lhs = meijer_g2112(z, 0.0).unwrap();
            let rhs = z * trapezoid_g(z, 0.0, 1.0, 0.0, 0.5);
            assert!(rel(lhs, rhs) < 1e-10, "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn remainder_is_consistent() {
        for c2 in [0.0, -0.5, 0.7] {
            for z in [1e-3, 0.3, 0.999, 1.001, 5.0] {
                let g = meijer_g2112(z, c2).unwrap();
                let r = meijer_g2112_remainder(z, c2).unwrap();
                let rebuilt = z.powf(c2 + 1.0) * (gamma_fn(c2 + 1.0).unwrap() + r);
                assert!(rel(rebuilt, g) < 1e-11, "z={z} c2={c2}");
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(meijer_g2112(0.0, 0.0).is_err());
        assert!(meijer_g2112(-1.0, 0.0).is_err());
        assert!(meijer_g2112(1.0, -1.0).is_err());
        assert!(meijer_g2112(1.0, -2.0).is_err());
    }
}
