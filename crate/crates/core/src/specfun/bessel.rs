//! Bessel functions J0, I0, K1 and the scaled combination `x K1(x)`.
//!
//! Regimes and switch points:
//!
//! | function | small argument            | mid range                 | large argument          |
//! |----------|---------------------------|---------------------------|-------------------------|
//! | J0       | power series, `|x| <= 4`  | Miller recurrence, `< 25` | Hankel expansion        |
//! | I0       | power series, `x <= 20`   |                           | asymptotic, scaled      |
//! | K1       | log series, `x <= 2`      |                           | Steed continued fraction|

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const J0_SERIES_MAX: f64 = 4.0;
const J0_MILLER_MAX: f64 = 25.0;
const I0_SERIES_MAX: f64 = 20.0;
const K1_SERIES_MAX: f64 = 2.0;

/// Below this `z` the scaled K1 combination is taken from its series.
pub const XK1_SERIES_SWITCH: f64 = 1e-4;

fn reject_nan(name: &str, x: f64) -> Result<()> {
    if x.is_nan() {
        Err(Error::invalid(format!("{name}: argument is NaN")))
    } else {
        Ok(())
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    reject_nan("bessel_j0", x)?;
    let ax = x.abs();
    if ax.is_infinite() {
        return Ok(0.0);
    }
    Ok(if ax <= J0_SERIES_MAX {
        j0_series(ax)
    } else if ax < J0_MILLER_MAX {
        j0_miller(ax)
    } else {
        j0_hankel(ax)
    })
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

// Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised with
// J0 + 2 sum J_{2k} = 1.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x + 30.0 + 4.0 * x.sqrt()) as usize / 2 + 1);
    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1e-300_f64; // J_k
    let mut norm = 0.0_f64;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
        if k == 1 {
            j0 = cur;
        }
    }
    j0 / (norm + j0)
}

fn j0_hankel(x: f64) -> f64 {
    // t_k = t_{k-1} * (-(2k-1)^2) / (8 k x); P = t0 - t2 + t4 ..., Q = t1 - t3 + ...
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // alternating sign convention of the Hankel series
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) * std::f64::consts::FRAC_1_SQRT_2;
    let sin_chi = (s - c) * std::f64::consts::FRAC_1_SQRT_2;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> Result<f64> {
    reject_nan("bessel_i0", x)?;
    if x < 0.0 {
        return Err(Error::invalid(format!("bessel_i0: negative argument {x}")));
    }
    if x <= I0_SERIES_MAX {
        Ok(i0_series(x))
    } else {
        Ok(x.exp() * i0_asymptotic_scaled(x))
    }
}

/// `exp(-x) * I0(x)`, finite for every nonnegative `x`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    reject_nan("bessel_i0_scaled", x)?;
    if x < 0.0 {
        return Err(Error::invalid(format!("bessel_i0_scaled: negative argument {x}")));
    }
    if x <= I0_SERIES_MAX {
        Ok(i0_series(x) * (-x).exp())
    } else {
        Ok(i0_asymptotic_scaled(x))
    }
}

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn i0_asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..100 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * k as f64 * x);
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> Result<f64> {
    reject_nan("bessel_k1", x)?;
    if x <= 0.0 {
        return Err(Error::invalid(format!("bessel_k1: argument must be positive, got {x}")));
    }
    if x <= K1_SERIES_MAX {
        Ok(k1_series(x))
    } else {
        let (_, k1s) = k01_scaled_steed(x);
        Ok(k1s * (-x).exp())
    }
}

// K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k (psi(k+1) + psi(k+2)) (x^2/4)^k / (k! (k+1)!)
fn k1_series(x: f64) -> f64 {
    1.0 / x + x_k1_series_tail(x) / x
}

// x K1(x) - 1, summed directly so small arguments keep full relative accuracy.
fn x_k1_series_tail(x: f64) -> f64 {
    let z = 0.25 * x * x;
    -one_minus_g_series(z)
}

// 1 - 2 sqrt(z) K1(2 sqrt(z)) = z sum_k z^k / (k! (k+1)!) [psi(k+1) + psi(k+2) - ln z]
fn one_minus_g_series(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let lnz = z.ln();
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut coef = 1.0; // z^k / (k! (k+1)!)
    let mut sum = coef * (psi_k1 + psi_k2 - lnz);
    for k in 1..100 {
        let kf = k as f64;
        coef *= z / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        let term = coef * (psi_k1 + psi_k2 - lnz);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    z * sum
}

// Steed's continued-fraction evaluation of e^x K0(x) and e^x K1(x) for x >= 2.
fn k01_scaled_steed(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..100_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `g(z) = 2 sqrt(z) K1(2 sqrt(z))`.
///
/// `g(0) = 1`, `0 < g(z) < 1` for `z > 0` (it underflows to zero once
/// `2 sqrt(z)` exceeds about 745).
pub fn xk1_scaled(z: f64) -> Result<f64> {
    reject_nan("xk1_scaled", z)?;
    if z < 0.0 {
        return Err(Error::invalid(format!("xk1_scaled: negative argument {z}")));
    }
    if z < XK1_SERIES_SWITCH {
        return Ok(1.0 - one_minus_g_series(z));
    }
    let x = 2.0 * z.sqrt();
    if x <= K1_SERIES_MAX {
        Ok(1.0 + x_k1_series_tail(x))
    } else {
        let (_, k1s) = k01_scaled_steed(x);
        Ok(x * k1s * (-x).exp())
    }
}

/// `1 - g(z)` without cancellation for small `z`.
pub fn one_minus_xk1_scaled(z: f64) -> Result<f64> {
    reject_nan("one_minus_xk1_scaled", z)?;
    if z < 0.0 {
        return Err(Error::invalid(format!("one_minus_xk1_scaled: negative argument {z}")));
    }
    if z <= 1.0 {
        Ok(one_minus_g_series(z))
    } else {
        Ok(1.0 - xk1_scaled(z)?)
    }
}
