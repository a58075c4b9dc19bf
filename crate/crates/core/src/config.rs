//! Scenario description and the constants derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::order_stats::{CoefficientTable, Hop};
use crate::specfun;

/// Which mean channel gains enter the fixed relay gain constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainConvention {
    /// Means of the selected relay's outdated gains (the constant the
    /// end-to-end SNR analysis is built on).
    #[default]
    SelectedRelayMeans,
    /// Per-relay hop means `sigma1`, `sigma2`.
    PerRelayMeans,
}

fn default_noise_power() -> f64 {
    1.0
}

/// A relay network scenario. Distances are normalised to the
/// source-to-source distance; the mean gain of a hop is `d^(-v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub num_relays: u32,
    pub rho1: f64,
    pub rho2: f64,
    /// S1-to-relay distance, in `(0, 1)`.
    pub d1: f64,
    pub pathloss_exp: f64,
    pub eta1_db: f64,
    pub eta2_db: f64,
    /// Target rate in bit/s/Hz.
    pub rate: f64,
    #[serde(default = "default_noise_power")]
    pub noise_power: f64,
    #[serde(default)]
    pub gain_convention: GainConvention,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            num_relays: 2,
            rho1: 0.9,
            rho2: 0.9,
            d1: 0.5,
            pathloss_exp: 3.0,
            eta1_db: 15.0,
            eta2_db: 15.0,
            rate: 1.0,
            noise_power: 1.0,
            gain_convention: GainConvention::SelectedRelayMeans,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("d1", self.d1),
            ("pathloss_exp", self.pathloss_exp),
            ("eta1_db", self.eta1_db),
            ("eta2_db", self.eta2_db),
            ("rate", self.rate),
            ("noise_power", self.noise_power),
        ] {
            ensure_finite(name, v)?;
        }
        if self.num_relays < 1 {
            return Err(Error::invalid("num_relays must be at least 1"));
        }
        for (name, rho) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {rho}")));
            }
        }
        if !(self.d1 > 0.0 && self.d1 < 1.0) {
            return Err(Error::invalid(format!("d1 must lie in (0, 1), got {}", self.d1)));
        }
        if !(self.pathloss_exp > 0.0) {
            return Err(Error::invalid("pathloss_exp must be positive"));
        }
        if !(self.rate > 0.0) {
            return Err(Error::invalid(format!("rate must be positive, got {}", self.rate)));
        }
        if !(self.noise_power > 0.0) {
            return Err(Error::invalid("noise_power must be positive"));
        }
        Ok(())
    }

    pub fn sigma1(&self) -> f64 {
        self.d1.powf(-self.pathloss_exp)
    }

    pub fn sigma2(&self) -> f64 {
        (1.0 - self.d1).powf(-self.pathloss_exp)
    }

    pub fn eta1(&self) -> f64 {
        db_to_linear(self.eta1_db)
    }

    pub fn eta2(&self) -> f64 {
        db_to_linear(self.eta2_db)
    }

    /// The same network seen from S1: hop indices exchanged.
    pub fn swap_hops(&self) -> SystemConfig {
        SystemConfig { rho1: self.rho2, rho2: self.rho1, d1: 1.0 - self.d1, ..*self }
    }

    /// Sets the SNRs from transmit powers and the noise variance.
    pub fn with_powers(mut self, source_power: f64, relay_power: f64, noise_power: f64) -> Self {
        self.eta1_db = 10.0 * (source_power / noise_power).log10();
        self.eta2_db = 10.0 * (relay_power / noise_power).log10();
        self.noise_power = noise_power;
        self
    }
}

/// Constants shared by the analytic engine and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Fixed-gain constant `eta1 (m1 + m2) + 1`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Outage threshold `2^rate - 1`.
    pub psi: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Derives the shared constants. `mean_eq_gain_1/2` are the means entering
/// `C`: the selected relay's outdated gain means or the per-relay means,
/// depending on the configured [`GainConvention`].
pub fn derive(cfg: &SystemConfig, mean_eq_gain_1: f64, mean_eq_gain_2: f64) -> Result<DerivedParams> {
    cfg.validate()?;
    for (name, m) in [("mean_eq_gain_1", mean_eq_gain_1), ("mean_eq_gain_2", mean_eq_gain_2)] {
        ensure_finite(name, m)?;
        if !(m > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive, got {m}")));
        }
    }
    let eta1 = cfg.eta1();
    let eta2 = cfg.eta2();
    Ok(DerivedParams {
        sigma1: cfg.sigma1(),
        sigma2: cfg.sigma2(),
        eta1,
        eta2,
        c: eta1 * (mean_eq_gain_1 + mean_eq_gain_2) + 1.0,
        psi: 2f64.powf(cfg.rate) - 1.0,
    })
}

/// Builds the coefficient table and derives the constants, picking the means
/// for `C` according to the configured gain convention.
pub fn derive_with_table(cfg: &SystemConfig) -> Result<(DerivedParams, CoefficientTable)> {
    cfg.validate()?;
    let table = CoefficientTable::build(cfg.sigma1(), cfg.sigma2(), cfg.num_relays)?;
    let (m1, m2) = match cfg.gain_convention {
        GainConvention::SelectedRelayMeans => (table.mean_outdated_eq(Hop::One), table.mean_outdated_eq(Hop::Two)),
        GainConvention::PerRelayMeans => (table.sigma1, table.sigma2),
    };
    Ok((derive(cfg, m1, m2)?, table))
}

/// Outdated-CSI correlation `J0(2 pi fD T)` for a normalised Doppler-delay product.
pub fn correlation_from_doppler(fd_times_t: f64) -> Result<f64> {
    if fd_times_t.is_nan() {
        return Err(Error::invalid("correlation_from_doppler: argument is NaN"));
    }
    specfun::bessel_j0(2.0 * std::f64::consts::PI * fd_times_t)
}
