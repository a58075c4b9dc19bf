//! Statistics of the selected relay's channel power gains.
//!
//! Relay `k` is chosen as `argmax_i min(g1_i, g2_i)` on the *outdated* gains.
//! The marginal law of either outdated gain of the winner is a finite
//! exponential mixture; the current gains follow by averaging the
//! noncentral-exponential transition of the correlated fading model over it.
//! Every distribution here is represented as `sum_n w_n * Exp(rate_n)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::specfun::{bessel_i0_scaled, integrate_semi_infinite, QuadratureSpec};
use crate::sum::CompensatedSum;

/// Largest relay count accepted (binomials stay exact in `u64`).
pub const MAX_RELAYS: u32 = 64;
/// Allowed residual of the per-hop normalization identities.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Allowed `|sum_F X_F - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// First (source 1 to relay) or second (relay to source 2) hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hop {
    One,
    Two,
}

impl Hop {
    fn index(self) -> usize {
        match self {
            Hop::One => 0,
            Hop::Two => 1,
        }
    }
}

/// Per-hop coefficients. `alpha[j]` and `beta[j]` are indexed by `j = 0, 1, 2`
/// for the constant, own-hop and `chi` exponentials respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopCoefficients {
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub alpha: [Vec<f64>; 3],
    pub beta: [Vec<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub num_relays: u32,
    pub sigma1: f64,
    pub sigma2: f64,
    pub chi: Vec<f64>,
    /// `C(R-1, i)`, exact.
    pub binom: Vec<u64>,
    pub hops: [HopCoefficients; 2],
}

fn binomial_row(n: u32) -> Vec<u64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c: u64 = 1;
    row.push(c);
    for k in 1..=n as u64 {
        // c * (n - k + 1) / k stays exact: C(63, k) * 63 < 2^64 is not
        // guaranteed, so go through u128
        c = ((c as u128 * (n as u128 - k as u128 + 1)) / k as u128) as u64;
        row.push(c);
    }
    row
}

impl CoefficientTable {
    pub fn build(sigma1: f64, sigma2: f64, num_relays: u32) -> Result<Self> {
        ensure_finite("sigma1", sigma1)?;
        ensure_finite("sigma2", sigma2)?;
        if !(sigma1 > 0.0 && sigma2 > 0.0) {
            return Err(Error::invalid("hop means must be positive"));
        }
        if num_relays < 1 {
            return Err(Error::invalid("num_relays must be at least 1"));
        }
        if num_relays > MAX_RELAYS {
            return Err(Error::invalid(format!(
                "num_relays = {num_relays} exceeds the supported maximum of {MAX_RELAYS}"
            )));
        }
        let r = num_relays as usize;
        let chi: Vec<f64> = (0..r).map(|i| (i + 1) as f64 / sigma1 + (i + 1) as f64 / sigma2).collect();

        let hop = |own: f64, other: f64| {
            let mut kappa1 = Vec::with_capacity(r);
            let mut kappa2 = Vec::with_capacity(r);
            for (i, &x) in chi.iter().enumerate() {
                // x - 1/own, written without cancellation
                let gap = i as f64 / own + (i + 1) as f64 / other;
                kappa1.push(1.0 / (other * gap));
                kappa2.push(1.0 / (own * other * gap * x) - 1.0 / (own * x));
            }
            let alpha = [
                kappa1.iter().zip(&kappa2).map(|(a, b)| a - b).collect(),
                kappa1.iter().map(|a| -a).collect(),
                kappa2.clone(),
            ];
            let beta = [vec![0.0; r], vec![1.0 / own; r], chi.clone()];
            HopCoefficients { kappa1, kappa2, alpha, beta }
        };
        let hops = [hop(sigma1, sigma2), hop(sigma2, sigma1)];

        let table = CoefficientTable { num_relays, sigma1, sigma2, chi, binom: binomial_row(num_relays - 1), hops };
        // The alternating sums lose roughly a digit per relay; refuse tables
        // whose identities no longer hold rather than return noise.
        for q in [Hop::One, Hop::Two] {
            let worst = table.normalization_residual(q).abs().max(table.cdf_origin_residual(q).abs());
            if !(worst <= NORMALIZATION_TOL) {
                return Err(Error::Numerical(format!(
                    "coefficient table for R = {num_relays}, means ({sigma1}, {sigma2}) \
                     violates its normalization by {worst:e}"
                )));
            }
        }
        Ok(table)
    }

    pub fn hop(&self, q: Hop) -> &HopCoefficients {
        &self.hops[q.index()]
    }

    pub fn sigma(&self, q: Hop) -> f64 {
        match q {
            Hop::One => self.sigma1,
            Hop::Two => self.sigma2,
        }
    }

    /// Exponential-mixture representation of the selected relay's outdated
    /// gain on hop `q`: `(weight, rate)` pairs, weights summing to one.
    /// Components are ordered by `i`, then `j`.
    pub fn mixture(&self, q: Hop) -> Vec<(f64, f64)> {
        let h = self.hop(q);
        let r = self.num_relays as f64;
        let mut out = Vec::with_capacity(2 * self.chi.len());
        for (i, &c) in self.binom.iter().enumerate() {
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            for j in 1..3 {
                out.push((r * c as f64 * sign * h.alpha[j][i], h.beta[j][i]));
            }
        }
        out
    }

    /// `R sum_i C(R-1,i) (-1)^{i+1} sum_{j=2,3} alpha_j - 1`; zero up to rounding.
    pub fn normalization_residual(&self, q: Hop) -> f64 {
        self.mixture(q).iter().map(|&(w, _)| w).collect::<CompensatedSum>().value() - 1.0
    }

    /// `R sum_i C(R-1,i) (-1)^i sum_j alpha_j`: the outdated CDF at the origin.
    pub fn cdf_origin_residual(&self, q: Hop) -> f64 {
        let h = self.hop(q);
        let r = self.num_relays as f64;
        let mut s = CompensatedSum::default();
        for (i, &c) in self.binom.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..3 {
                s.add(r * c as f64 * sign * h.alpha[j][i]);
            }
        }
        s.value()
    }

    pub fn cdf_outdated_eq(&self, q: Hop, phi: f64) -> Result<f64> {
        check_gain("phi", phi)?;
        let mixture = self.mixture(q);
        Ok(mixture_cdf(mixture.into_iter(), phi))
    }

    pub fn pdf_outdated_eq(&self, q: Hop, phi: f64) -> Result<f64> {
        check_gain("phi", phi)?;
        let mixture = self.mixture(q);
        Ok(mixture_pdf(mixture.into_iter(), phi))
    }

    pub fn mean_outdated_eq(&self, q: Hop) -> f64 {
        self.mixture(q).iter().map(|&(w, b)| w / b).collect::<CompensatedSum>().value()
    }

    /// Density of (outdated `y`, current `x`) gain of the selected relay.
    /// Requires `rho < 1`; at `rho = 1` the two coincide and there is no density.
    pub fn joint_pdf_eq(&self, q: Hop, y: f64, x: f64, rho: f64) -> Result<f64> {
        check_gain("y", y)?;
        check_gain("x", x)?;
        ensure_finite("rho", rho)?;
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::invalid(format!("joint_pdf_eq: rho must lie in [0, 1), got {rho}")));
        }
        let nu_bar = (1.0 - rho * rho) * self.sigma(q);
        let nu = 1.0 / nu_bar;
        let d = x.sqrt() - rho * y.sqrt();
        let transition = nu * (-nu * d * d).exp() * bessel_i0_scaled(2.0 * rho * nu * (x * y).sqrt())?;
        let marginal = mixture_pdf(self.mixture(q).into_iter(), y);
        Ok(marginal * transition)
    }

    /// Exponential mixture of the selected relay's current gain on hop `q`.
    pub fn current_mixture(&self, q: Hop, rho: f64) -> Result<Vec<(f64, f64)>> {
        check_rho(rho)?;
        let sigma = self.sigma(q);
        Ok(self.mixture(q).into_iter().map(|(w, b)| (w, current_rate(b, rho, sigma))).collect())
    }

    pub fn pdf_current_eq(&self, q: Hop, x: f64, rho: f64) -> Result<f64> {
        check_gain("x", x)?;
        Ok(mixture_pdf(self.current_mixture(q, rho)?.into_iter(), x))
    }

    pub fn cdf_current_eq(&self, q: Hop, x: f64, rho: f64) -> Result<f64> {
        check_gain("x", x)?;
        Ok(mixture_cdf(self.current_mixture(q, rho)?.into_iter(), x))
    }

    pub fn build_term_set(&self, rho1: f64, rho2: f64) -> Result<TermSet> {
        let ts = self.assemble_terms(rho1, rho2)?;
        let dev = (ts.weight_sum() - 1.0).abs();
        if !(dev <= WEIGHT_SUM_TOL) {
            return Err(Error::Numerical(format!(
                "term weights for R = {} sum to 1 only within {dev:e}",
                self.num_relays
            )));
        }
        Ok(ts)
    }

    pub(crate) fn assemble_terms(&self, rho1: f64, rho2: f64) -> Result<TermSet> {
        check_rho(rho1)?;
        check_rho(rho2)?;
        let m1 = self.mixture(Hop::One);
        let m2 = self.mixture(Hop::Two);
        let mut terms = Vec::with_capacity(m1.len() * m2.len());
        for (n1, &(w1, b1)) in m1.iter().enumerate() {
            for (n2, &(w2, b2)) in m2.iter().enumerate() {
                terms.push(Term {
                    i1: (n1 / 2) as u32,
                    j1: (n1 % 2 + 2) as u8,
                    i2: (n2 / 2) as u32,
                    j2: (n2 % 2 + 2) as u8,
                    weight: w1 * w2,
                    theta1: current_rate(b1, rho1, self.sigma1),
                    theta2: current_rate(b2, rho2, self.sigma2),
                });
            }
        }
        Ok(TermSet { num_relays: self.num_relays, rho1, rho2, terms })
    }
}

/// Rate `beta / (nu_bar beta + rho^2)` with `nu_bar = (1 - rho^2) sigma`;
/// regular at both `rho = 0` and `rho = 1`.
fn current_rate(beta: f64, rho: f64, sigma: f64) -> f64 {
    let rho2 = rho * rho;
    beta / ((1.0 - rho2) * sigma * beta + rho2)
}

fn check_gain(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("correlation must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

fn mixture_cdf(m: impl Iterator<Item = (f64, f64)>, x: f64) -> f64 {
    let v = m.map(|(w, b)| -w * (-b * x).exp_m1()).collect::<CompensatedSum>().value();
    v.clamp(0.0, 1.0)
}

fn mixture_pdf(m: impl Iterator<Item = (f64, f64)>, x: f64) -> f64 {
    let v = m.map(|(w, b)| w * b * (-b * x).exp()).collect::<CompensatedSum>().value();
    v.max(0.0)
}

/// One `(i1, j1, i2, j2)` product term of the end-to-end CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub i1: u32,
    pub j1: u8,
    pub i2: u32,
    pub j2: u8,
    pub weight: f64,
    pub theta1: f64,
    pub theta2: f64,
}

/// All `(2R)^2` product terms, zero weights included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSet {
    pub num_relays: u32,
    pub rho1: f64,
    pub rho2: f64,
    pub terms: Vec<Term>,
}

impl TermSet {
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).collect::<CompensatedSum>().value()
    }
}

/// `int_0^inf f` for a density, used by tests and the validation suite.
pub(crate) fn total_mass(f: impl Fn(f64) -> f64, scale: f64) -> Result<f64> {
    let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, scale, ..Default::default() };
    integrate_semi_infinite(f, &spec)
}
