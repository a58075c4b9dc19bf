//! Globally adaptive Gauss-Kronrod (G10/K21) quadrature on finite intervals,
//! and two ways of extending it to `[0, inf)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae and weights (QUADPACK qk21); the odd-indexed
// abscissae are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// How the half line is handled by [`integrate_semi_infinite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Map `x = scale * t / (1 - t)` onto `t in [0, 1)`; suited to integrands
    /// with exponentially decaying tails.
    ExpTail,
    /// No change of variables: march over panels `[0, s], [s, 2s], [2s, 4s], ...`
    /// until further panels stop contributing.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub transform: Transform,
    /// Integrand behaves like `x^(-1/2)` at the origin; substitute `x = u^2` first.
    pub sqrt_singularity: bool,
    /// Characteristic length of the integrand (used by both transforms).
    pub scale: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 200,
            transform: Transform::ExpTail,
            sqrt_singularity: false,
            scale: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::invalid("quadrature scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("integrate_finite: bounds must be finite"));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }
    let (v, e) = kronrod21(&f, a, b);
    let mut evaluations = 21;
    check_finite(v)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut subdivisions = 1;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                context: "adaptive quadrature",
                detail: format!(
                    "error estimate {total_err:.3e} above target {target:.3e} after {subdivisions} subdivisions"
                ),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::NonConvergence {
                context: "adaptive quadrature",
                detail: format!("interval [{}, {}] cannot be split further", worst.a, worst.b),
            });
        }
        let (v1, e1) = kronrod21(&f, worst.a, mid);
        let (v2, e2) = kronrod21(&f, mid, worst.b);
        evaluations += 42;
        check_finite(v1 + v2)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        subdivisions += 1;
    }
    // re-sum to shed the drift of the running updates
    let mut value = 0.0;
    let mut abs_error = 0.0;
    for s in heap.iter() {
        value += s.value;
        abs_error += s.error;
    }
    Ok(QuadResult { value, abs_error, evaluations })
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            context: "adaptive quadrature",
            detail: "integrand produced a non-finite value".into(),
        })
    }
}

/// Integrates `f` over `[0, inf)`.
///
/// Returns an error rather than a value when the requested tolerance cannot
/// be met.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    semi_infinite(&f, spec)
}

fn semi_infinite(f: &dyn Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if spec.sqrt_singularity {
        // x = u^2, dx = 2u du; the natural length in u is sqrt(scale)
        let inner = QuadratureSpec { sqrt_singularity: false, scale: spec.scale.sqrt(), ..*spec };
        return semi_infinite(&|u: f64| 2.0 * u * f(u * u), &inner);
    }
    match spec.transform {
        Transform::ExpTail => {
            let s = spec.scale;
            let g = |t: f64| {
                let one_minus = 1.0 - t;
                let x = s * t / one_minus;
                if !x.is_finite() {
                    return 0.0;
                }
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx * s / (one_minus * one_minus)
                }
            };
            Ok(integrate_finite(g, 0.0, 1.0, spec)?.value)
        }
        Transform::None => march_panels(f, spec),
    }
}

fn march_panels(f: &dyn Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    const MAX_PANELS: usize = 80;
    let mut lo = 0.0;
    let mut width = spec.scale;
    let mut total = 0.0;
    let mut quiet = 0;
    for _ in 0..MAX_PANELS {
        let hi = lo + width;
        let panel = integrate_finite(f, lo, hi, spec)?.value;
        total += panel;
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if panel.abs() <= 0.1 * target {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::NonConvergence {
        context: "semi-infinite panel march",
        detail: format!("tail still contributing after {MAX_PANELS} panels"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn both() -> [QuadratureSpec; 2] {
        let a = QuadratureSpec::default();
        let b = QuadratureSpec { transform: Transform::None, ..a };
        [a, b]
    }

    #[test]
    fn exponential() {
        for spec in both() {
            let v = integrate_semi_infinite(|x: f64| (-x).exp(), &spec).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{spec:?}: {v}");
        }
    }

    #[test]
    fn inverse_sqrt_singularity() {
        for base in both() {
            let spec = QuadratureSpec { sqrt_singularity: true, ..base };
            let v = integrate_semi_infinite(|x: f64| x.powf(-0.5) * (-x).exp(), &spec).unwrap();
            assert!((v - PI.sqrt()).abs() < 1e-10, "{spec:?}: {v}");
        }
    }

    #[test]
    fn scaled_and_oscillatory() {
        let spec = QuadratureSpec { scale: 0.01, ..Default::default() };
        let v = integrate_semi_infinite(|x: f64| (-100.0 * x).exp(), &spec).unwrap();
        assert!((v - 0.01).abs() < 1e-14);
        // int_0^inf e^-x cos(5x) dx = 1/26
        for spec in both() {
            let v = integrate_semi_infinite(|x: f64| (-x).exp() * (5.0 * x).cos(), &spec).unwrap();
            assert!((v - 1.0 / 26.0).abs() < 1e-11);
        }
    }

    #[test]
    fn finite_polynomial_exact() {
        let r = integrate_finite(|x: f64| x.powi(7) - 3.0 * x, -1.0, 2.0, &QuadratureSpec::default()).unwrap();
        let want = (2f64.powi(8) - 1.0) / 8.0 - 1.5 * (4.0 - 1.0);
        assert!((r.value - want).abs() < 1e-12);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn non_convergence_is_reported() {
        let spec = QuadratureSpec { max_subdivisions: 3, ..Default::default() };
        let r = integrate_finite(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &spec);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
        let slow = QuadratureSpec { transform: Transform::None, ..Default::default() };
        let r = integrate_semi_infinite(|x: f64| 1.0 / (1.0 + x), &slow);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(integrate_semi_infinite(|x: f64| (-x).exp(), &spec).is_err());
        let spec = QuadratureSpec { max_subdivisions: 0, ..Default::default() };
        assert!(spec.validate().is_err());
    }
}
