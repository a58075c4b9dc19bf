//! End-to-end SNR statistics at source 2 (source 1 follows from
//! [`SystemConfig::swap_hops`]).
//!
//! The CDF of the fixed-gain end-to-end SNR is a weighted sum over the
//! [`TermSet`]:
//!
//! ```text
//! F(x) = sum_F X_F [1 - exp(-a x) g(theta x)],   a = T1/eta1,
//!        theta = T1 T2 C / (eta1 eta2),           g(z) = 2 sqrt(z) K1(2 sqrt(z))
//! ```
//!
//! and every performance metric is an instance of
//! `S(c1, c2, c3) = c1 int_0^inf x^c2 exp(-c3 x) F(x) dx`, which has a closed
//! form in terms of `G^{2,1}_{1,2}`.
//!
//! **Sign convention:** [`E2eModel::mgf`] returns `E[exp(-s Y)]`, the Laplace
//! transform of the SNR density, not `E[exp(+s Y)]`.

use serde::{Deserialize, Serialize};

use crate::config::{derive_with_table, DerivedParams, SystemConfig};
use crate::error::{ensure_finite, Error, Result};
use crate::order_stats::{CoefficientTable, TermSet};
use crate::specfun::{
    gamma_fn, integrate_semi_infinite, meijer_g2112, meijer_g2112_remainder, one_minus_xk1_scaled, xk1_scaled,
    QuadratureSpec,
};
use crate::sum::CompensatedSum;

/// Probabilities may overshoot `[0, 1]` by this much before it counts as an error.
pub const PROBABILITY_SLACK: f64 = 1e-9;

const CDF_ABS_ACCURACY: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationKind {
    /// Conditional error rate `a Q(sqrt(b snr))`.
    Coherent,
    /// Conditional error rate `a exp(-b snr)`.
    NonCoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    pub a: f64,
    pub b: f64,
    pub name: String,
}

impl ModulationSpec {
    pub fn new(kind: ModulationKind, a: f64, b: f64, name: impl Into<String>) -> Result<Self> {
        let m = ModulationSpec { kind, a, b, name: name.into() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite() && self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::invalid(format!(
                "modulation constants must be positive and finite, got a={} b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn bpsk() -> Self {
        Self::preset(ModulationKind::Coherent, 1.0, 2.0, "bpsk")
    }

    pub fn bfsk() -> Self {
        Self::preset(ModulationKind::Coherent, 1.0, 1.0, "bfsk")
    }

    pub fn dbpsk() -> Self {
        Self::preset(ModulationKind::NonCoherent, 0.5, 1.0, "dbpsk")
    }

    pub fn ncbfsk() -> Self {
        Self::preset(ModulationKind::NonCoherent, 0.5, 0.5, "ncbfsk")
    }

    /// M-ary PAM, `M >= 2`.
    pub fn mpam(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("M-PAM needs M >= 2, got {m}")));
        }
        let mf = m as f64;
        Ok(Self::preset(
            ModulationKind::Coherent,
            2.0 * (mf - 1.0) / mf,
            6.0 * mf.log2() / (mf * mf - 1.0),
            &format!("{m}pam"),
        ))
    }

    fn preset(kind: ModulationKind, a: f64, b: f64, name: &str) -> Self {
        ModulationSpec { kind, a, b, name: name.to_string() }
    }

    /// Looks up a preset: `bpsk`, `bfsk`, `dbpsk`, `ncbfsk` or `<M>pam`
    /// (case-insensitive).
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "bpsk" => Ok(Self::bpsk()),
            "bfsk" => Ok(Self::bfsk()),
            "dbpsk" => Ok(Self::dbpsk()),
            "ncbfsk" => Ok(Self::ncbfsk()),
            _ => {
                let m = lower
                    .strip_suffix("pam")
                    .and_then(|m| m.trim_end_matches('-').parse::<u32>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown modulation '{name}'")))?;
                Self::mpam(m)
            }
        }
    }

    /// Conditional symbol error rate at instantaneous SNR `snr`.
    pub fn conditional_ser(&self, snr: f64) -> f64 {
        match self.kind {
            ModulationKind::Coherent => self.a * crate::specfun::q_function((self.b * snr).sqrt()).unwrap_or(0.0),
            ModulationKind::NonCoherent => self.a * (-self.b * snr).exp(),
        }
    }

    /// SER as the SNR goes to zero.
    pub fn zero_snr_limit(&self) -> f64 {
        match self.kind {
            ModulationKind::Coherent => 0.5 * self.a,
            ModulationKind::NonCoherent => self.a,
        }
    }

    /// `(c1, c2, c3)` such that the average SER equals `S(c1, c2, c3)`.
    pub fn s_integral_args(&self) -> (f64, f64, f64) {
        match self.kind {
            ModulationKind::NonCoherent => (self.a * self.b, 0.0, self.b),
            ModulationKind::Coherent => {
                (0.5 * self.a * (self.b / (2.0 * std::f64::consts::PI)).sqrt(), -0.5, 0.5 * self.b)
            }
        }
    }
}

/// How `S(c1, c2, c3)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    /// Meijer-G closed form.
    #[default]
    Closed,
    /// Adaptive quadrature of the defining integral; the cross-check.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E2eModel {
    pub terms: TermSet,
    #[serde(rename = "C")]
    pub c: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl E2eModel {
    pub fn new(terms: TermSet, c: f64, eta1: f64, eta2: f64) -> Result<Self> {
        for (name, v) in [("C", c), ("eta1", eta1), ("eta2", eta2)] {
            ensure_finite(name, v)?;
            if !(v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if terms.terms.is_empty() {
            return Err(Error::invalid("empty term set"));
        }
        Ok(E2eModel { terms, c, eta1, eta2 })
    }

    pub fn from_parts(cfg: &SystemConfig, derived: &DerivedParams, table: &CoefficientTable) -> Result<Self> {
        let terms = table.build_term_set(cfg.rho1, cfg.rho2)?;
        Self::new(terms, derived.c, derived.eta1, derived.eta2)
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let (derived, table) = derive_with_table(cfg)?;
        Self::from_parts(cfg, &derived, &table)
    }

    fn term_params(&self, theta1: f64, theta2: f64) -> (f64, f64) {
        let a = theta1 / self.eta1;
        let theta = theta1 * theta2 * self.c / (self.eta1 * self.eta2);
        (a, theta)
    }

    /// CDF of the end-to-end SNR.
    pub fn cdf(&self, phi: f64) -> Result<f64> {
        if phi.is_nan() || phi < 0.0 {
            return Err(Error::invalid(format!("cdf: threshold must be nonnegative, got {phi}")));
        }
        if phi == 0.0 {
            return Ok(0.0);
        }
        if phi.is_infinite() {
            return Ok(1.0);
        }
        // Lower tail from the brackets 1 - e^{-ax} g = (1 - g) + g (1 - e^{-ax}),
        // both parts nonnegative; upper tail as one minus the survival sum so
        // the CDF reaches 1 exactly.
        let mut lower = CompensatedSum::default();
        let mut survival = CompensatedSum::default();
        for t in &self.terms.terms {
            if t.weight == 0.0 {
                continue;
            }
            let (a, theta) = self.term_params(t.theta1, t.theta2);
            let z = theta * phi;
            let g = xk1_scaled(z)?;
            lower.add(t.weight * (one_minus_xk1_scaled(z)? + g * -(-a * phi).exp_m1()));
            survival.add(t.weight * (-a * phi).exp() * g);
        }
        let f = lower.value();
        let v = if f < 0.5 { f } else { 1.0 - survival.value() };
        checked_probability("end-to-end CDF", v)
    }

    /// `P(Y < psi)`.
    pub fn outage(&self, psi: f64) -> Result<f64> {
        self.cdf(psi)
    }

    /// Derivative of the CDF by central differences, `O(h^2)`; for diagnostics.
    pub fn pdf_numeric(&self, phi: f64, h: f64) -> Result<f64> {
        if !(phi > 0.0) || !(h > 0.0) || !phi.is_finite() || !h.is_finite() {
            return Err(Error::invalid("pdf_numeric: phi and h must be positive"));
        }
        let lo = (phi - h).max(0.0);
        let hi = phi + h;
        Ok((self.cdf(hi)? - self.cdf(lo)?) / (hi - lo))
    }

    pub fn s_integral(&self, path: EvalPath, c1: f64, c2: f64, c3: f64) -> Result<f64> {
        match path {
            EvalPath::Closed => self.s_integral_closed(c1, c2, c3),
            EvalPath::Quadrature => self.s_integral_quadrature(c1, c2, c3),
        }
    }

    pub fn s_integral_closed(&self, c1: f64, c2: f64, c3: f64) -> Result<f64> {
        check_s_args(c1, c2, c3)?;
        let b = c2 + 1.0;
        let gamma_b = gamma_fn(b)?;
        let mut acc = CompensatedSum::default();
        for t in &self.terms.terms {
            if t.weight == 0.0 {
                continue;
            }
            let (a, theta) = self.term_params(t.theta1, t.theta2);
            let p = c3 + a;
            let z = theta / p;
            let term = if z <= 1.0 {
                // Gamma(b) (c3^-b - p^-b) - p^-b H(z), with the difference
                // formed without cancellation
                let diff = c3.powf(-b) * -(-b * (a / c3).ln_1p()).exp_m1();
                gamma_b * diff - p.powf(-b) * meijer_g2112_remainder(z, c2)?
            } else {
                gamma_b * c3.powf(-b) - theta.powf(-b) * meijer_g2112(z, c2)?
            };
            acc.add(t.weight * term);
        }
        Ok(c1 * acc.value())
    }

    pub fn s_integral_quadrature(&self, c1: f64, c2: f64, c3: f64) -> Result<f64> {
        check_s_args(c1, c2, c3)?;
        // The CDF is accurate to ~1e-16 absolute, so ask for no more than that
        // relative to the integral with F replaced by 1.
        let weight_mass = gamma_fn(c2 + 1.0)? * c3.powf(-(c2 + 1.0));
        let spec = QuadratureSpec {
            rel_tol: 1e-11,
            abs_tol: CDF_ABS_ACCURACY * weight_mass,
            max_subdivisions: 2000,
            sqrt_singularity: c2 < 0.0,
            scale: 1.0 / c3,
            ..Default::default()
        };
        let failure = std::cell::Cell::new(None);
        let v = integrate_semi_infinite(
            |x: f64| {
                if x == 0.0 {
                    return 0.0;
                }
                match self.cdf(x) {
                    Ok(f) => x.powf(c2) * (-c3 * x).exp() * f,
                    Err(e) => {
                        failure.set(Some(e));
                        0.0
                    }
                }
            },
            &spec,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(c1 * v)
    }

    /// `E[exp(-s Y)]` for `s > 0`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        self.mgf_with(EvalPath::Closed, s)
    }

    pub fn mgf_with(&self, path: EvalPath, s: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("mgf: s must be positive, got {s}")));
        }
        checked_probability("MGF", self.s_integral(path, s, 0.0, s)?)
    }

    /// Average symbol error rate.
    pub fn ser(&self, modulation: &ModulationSpec) -> Result<f64> {
        self.ser_with(EvalPath::Closed, modulation)
    }

    pub fn ser_with(&self, path: EvalPath, modulation: &ModulationSpec) -> Result<f64> {
        modulation.validate()?;
        let (c1, c2, c3) = modulation.s_integral_args();
        let v = self.s_integral(path, c1, c2, c3)?;
        let limit = modulation.zero_snr_limit();
        checked_probability("SER", v / limit).map(|p| p * limit)
    }
}

fn check_s_args(c1: f64, c2: f64, c3: f64) -> Result<()> {
    ensure_finite("c1", c1)?;
    ensure_finite("c2", c2)?;
    ensure_finite("c3", c3)?;
    if !(c2 > -1.0) {
        return Err(Error::invalid(format!("S-integral needs c2 > -1, got {c2}")));
    }
    if !(c3 > 0.0) {
        return Err(Error::invalid(format!("S-integral needs c3 > 0, got {c3}")));
    }
    Ok(())
}

fn checked_probability(what: &str, v: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&v) {
        return Err(Error::Numerical(format!("{what} evaluated to {v}, outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}
