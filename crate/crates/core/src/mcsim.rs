//! Monte-Carlo simulator of the relay network.
//!
//! Each trial draws `R` correlated (outdated, current) Rayleigh channel pairs
//! per hop, picks the relay maximising the smaller outdated gain, and forms the
//! fixed-gain end-to-end SNR from the current gains of the winner.
//!
//! Randomness is counter based: trial `n` of a run keyed by `(seed, stream_id)`
//! uses ChaCha8 keyed on `(seed, stream_id)` with its stream number set to `n`.
//! Trials are grouped into fixed-size chunks whose partial statistics are
//! merged in chunk order, so results do not depend on the number of threads.
//! Gaussian variates use the Marsaglia polar method.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{derive_with_table, SystemConfig};
use crate::e2e::ModulationSpec;
use crate::error::{Error, Result};

/// Smallest trial count accepted by the `estimate_*` functions.
pub const MIN_TRIALS: u64 = 10_000;
/// Trials per parallel work unit. Part of the reproducibility contract.
pub const CHUNK_TRIALS: u64 = 8192;
/// Recorded in output metadata.
pub const GAUSSIAN_METHOD: &str = "marsaglia-polar";
pub const RNG_NAME: &str = "chacha8-counter";

/// Source of per-trial random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRng {
    pub seed: u64,
    pub stream_id: u64,
}

impl TrialRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        TrialRng { seed, stream_id }
    }

    /// Generator for trial `index`; a pure function of `(seed, stream_id, index)`.
    pub fn for_trial(&self, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        key[16..24].copy_from_slice(b"afrelay\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}

/// Standard normal pair by the polar method.
fn normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// Circularly-symmetric complex Gaussian with `E|z|^2 = var`.
fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> (f64, f64) {
    let (a, b) = normal_pair(rng);
    let s = (0.5 * var).sqrt();
    (s * a, s * b)
}

/// One (outdated, current) channel power pair with mean `sigma` and
/// correlation coefficient `rho` between the complex gains.
pub fn generate_channel_pair<R: Rng>(rho: f64, sigma: f64, rng: &mut R) -> (f64, f64) {
    let (gr, gi) = complex_gaussian(rng, sigma);
    let (vr, vi) = complex_gaussian(rng, sigma);
    let w = (1.0 - rho * rho).sqrt();
    let (cr, ci) = (rho * gr + w * vr, rho * gi + w * vi);
    (gr * gr + gi * gi, cr * cr + ci * ci)
}

/// Max-min selection over `(hop 1, hop 2)` outdated gains; ties go to the
/// lowest index.
pub fn select_relay(outdated: &[(f64, f64)]) -> usize {
    let mut best = 0;
    let mut best_min = f64::NEG_INFINITY;
    for (i, &(a, b)) in outdated.iter().enumerate() {
        let m = a.min(b);
        if m > best_min {
            best = i;
            best_min = m;
        }
    }
    best
}

/// Fixed-gain end-to-end SNR at source 2.
pub fn e2e_snr(gamma1: f64, gamma2: f64, eta1: f64, eta2: f64, c: f64) -> f64 {
    eta1 * eta2 * gamma1 * gamma2 / (eta2 * gamma2 + c)
}

/// Everything a trial produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub snr: f64,
    pub selected: usize,
    pub outdated1: f64,
    pub current1: f64,
    pub outdated2: f64,
    pub current2: f64,
}

/// Per-scenario constants the trial loop needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialParams {
    pub num_relays: u32,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub c: f64,
}

impl TrialParams {
    /// Uses the fixed-gain constant of the configured gain convention.
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let (d, _) = derive_with_table(cfg)?;
        Ok(TrialParams {
            num_relays: cfg.num_relays,
            rho1: cfg.rho1,
            rho2: cfg.rho2,
            sigma1: d.sigma1,
            sigma2: d.sigma2,
            eta1: d.eta1,
            eta2: d.eta2,
            c: d.c,
        })
    }
}

pub fn run_trial<R: Rng>(p: &TrialParams, rng: &mut R) -> TrialOutcome {
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut gains = (0.0, 0.0, 0.0, 0.0);
    for i in 0..p.num_relays as usize {
        let (o1, c1) = generate_channel_pair(p.rho1, p.sigma1, rng);
        let (o2, c2) = generate_channel_pair(p.rho2, p.sigma2, rng);
        let m = o1.min(o2);
        if m > best.1 {
            best = (i, m);
            gains = (o1, c1, o2, c2);
        }
    }
    let (outdated1, current1, outdated2, current2) = gains;
    TrialOutcome {
        snr: e2e_snr(current1, current2, p.eta1, p.eta2, p.c),
        selected: best.0,
        outdated1,
        current1,
        outdated2,
        current2,
    }
}

/// Result of a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(num_trials)`.
    pub std_error: f64,
    pub num_trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|value - reference|` in units of the standard error (infinite when
    /// the standard error is zero and the two differ).
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

// Running mean / second central moment, merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate { value: self.mean, std_error: (var / self.n).sqrt(), num_trials: self.n as u64, seed }
    }
}

/// Runs `num_trials` trials and averages the `k` statistics `stat` writes
/// for each of them.
pub(crate) fn simulate<F>(p: &TrialParams, num_trials: u64, rng: TrialRng, k: usize, stat: F) -> Vec<McEstimate>
where
    F: Fn(&TrialOutcome, &mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = num_trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = vec![Moments::default(); k];
            let mut buf = vec![0.0; k];
            let lo = c * CHUNK_TRIALS;
            let hi = (lo + CHUNK_TRIALS).min(num_trials);
            for n in lo..hi {
                let mut r = rng.for_trial(n);
                let outcome = run_trial(p, &mut r);
                stat(&outcome, &mut r, &mut buf);
                for (acc, &x) in m.iter_mut().zip(&buf) {
                    acc.push(x);
                }
            }
            m
        })
        .collect();
    let mut total = vec![Moments::default(); k];
    for part in &partials {
        for (t, m) in total.iter_mut().zip(part) {
            t.merge(m);
        }
    }
    total.iter().map(|m| m.estimate(rng.seed)).collect()
}

fn check_trials(num_trials: u64) -> Result<()> {
    if num_trials < MIN_TRIALS {
        return Err(Error::invalid(format!("at least {MIN_TRIALS} Monte-Carlo trials are required, got {num_trials}")));
    }
    Ok(())
}

/// What [`estimate_metrics`] should measure in a single pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricRequest {
    /// Outage threshold.
    pub psi: Option<f64>,
    pub modulations: Vec<ModulationSpec>,
    /// MGF arguments `s` (estimating `E[exp(-s Y)]`).
    pub mgf_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McMetrics {
    pub outage: Option<McEstimate>,
    pub ser: Vec<McEstimate>,
    pub mgf: Vec<McEstimate>,
}

pub fn estimate_metrics(
    cfg: &SystemConfig,
    req: &MetricRequest,
    num_trials: u64,
    seed: u64,
    stream_id: u64,
) -> Result<McMetrics> {
    check_trials(num_trials)?;
    let p = TrialParams::from_config(cfg)?;
    if let Some(psi) = req.psi {
        if psi.is_nan() || psi < 0.0 {
            return Err(Error::invalid(format!("outage threshold must be nonnegative, got {psi}")));
        }
    }
    for m in &req.modulations {
        m.validate()?;
    }
    if req.mgf_s.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::invalid("MGF arguments must be positive"));
    }
    let n_out = req.psi.is_some() as usize;
    let k = n_out + req.modulations.len() + req.mgf_s.len();
    let est = simulate(&p, num_trials, TrialRng::new(seed, stream_id), k, |t, _, out| {
        let mut i = 0;
        if let Some(psi) = req.psi {
            out[0] = if t.snr < psi { 1.0 } else { 0.0 };
            i = 1;
        }
        for m in &req.modulations {
            out[i] = m.conditional_ser(t.snr);
            i += 1;
        }
        for &s in &req.mgf_s {
            out[i] = (-s * t.snr).exp();
            i += 1;
        }
    });
    let (out, rest) = est.split_at(n_out);
    let (ser, mgf) = rest.split_at(req.modulations.len());
    Ok(McMetrics { outage: out.first().copied(), ser: ser.to_vec(), mgf: mgf.to_vec() })
}

/// Fraction of trials with end-to-end SNR below `psi`.
pub fn estimate_outage(cfg: &SystemConfig, psi: f64, num_trials: u64, seed: u64) -> Result<McEstimate> {
    let req = MetricRequest { psi: Some(psi), ..Default::default() };
    Ok(estimate_metrics(cfg, &req, num_trials, seed, 0)?.outage.expect("requested"))
}

/// Semi-analytic SER: the conditional error rate averaged over trials.
pub fn estimate_ser(cfg: &SystemConfig, modulation: &ModulationSpec, num_trials: u64, seed: u64) -> Result<McEstimate> {
    let req = MetricRequest { modulations: vec![modulation.clone()], ..Default::default() };
    Ok(estimate_metrics(cfg, &req, num_trials, seed, 0)?.ser[0])
}

/// Average of `exp(-s Y)`.
pub fn estimate_mgf(cfg: &SystemConfig, s: f64, num_trials: u64, seed: u64) -> Result<McEstimate> {
    let req = MetricRequest { mgf_s: vec![s], ..Default::default() };
    Ok(estimate_metrics(cfg, &req, num_trials, seed, 0)?.mgf[0])
}

/// BPSK error rate by detecting simulated symbols: `y = sqrt(Y N0) x + n`,
/// `n ~ CN(0, N0)`, one symbol per trial.
pub fn estimate_ser_bpsk_symbol_level(cfg: &SystemConfig, num_trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(num_trials)?;
    let p = TrialParams::from_config(cfg)?;
    let n0 = cfg.noise_power;
    let est = simulate(&p, num_trials, TrialRng::new(seed, 0), 1, |t, rng, out| {
        let x = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (nr, _) = complex_gaussian(rng, n0);
        let y = (t.snr * n0).sqrt() * x + nr;
        out[0] = if (y >= 0.0) != (x > 0.0) { 1.0 } else { 0.0 };
    });
    Ok(est[0])
}

/// Empirical statistics of the selected relay's four channel gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqGainStats {
    /// Means of the outdated gains, hop 1 and hop 2.
    pub mean_outdated: [McEstimate; 2],
    pub mean_current: [McEstimate; 2],
    pub abscissae: Vec<f64>,
    /// `P(gain <= x)` at each abscissa, per hop.
    pub cdf_outdated: [Vec<McEstimate>; 2],
    pub cdf_current: [Vec<McEstimate>; 2],
}

pub fn estimate_eq_gain_stats(
    cfg: &SystemConfig,
    abscissae: &[f64],
    num_trials: u64,
    seed: u64,
) -> Result<EqGainStats> {
    check_trials(num_trials)?;
    let p = TrialParams::from_config(cfg)?;
    let na = abscissae.len();
    let est = simulate(&p, num_trials, TrialRng::new(seed, 0), 4 + 4 * na, |t, _, out| {
        let g = [t.outdated1, t.outdated2, t.current1, t.current2];
        out[..4].copy_from_slice(&g);
        for (j, &gj) in g.iter().enumerate() {
            for (i, &x) in abscissae.iter().enumerate() {
                out[4 + j * na + i] = if gj <= x { 1.0 } else { 0.0 };
            }
        }
    });
    let cdf = |j: usize| est[4 + j * na..4 + (j + 1) * na].to_vec();
    Ok(EqGainStats {
        mean_outdated: [est[0], est[1]],
        mean_current: [est[2], est[3]],
        abscissae: abscissae.to_vec(),
        cdf_outdated: [cdf(0), cdf(1)],
        cdf_current: [cdf(2), cdf(3)],
    })
}

/// Raw end-to-end SNR samples, in trial order.
pub fn sample_snr(cfg: &SystemConfig, num_trials: u64, seed: u64, stream_id: u64) -> Result<Vec<f64>> {
    let p = TrialParams::from_config(cfg)?;
    let rng = TrialRng::new(seed, stream_id);
    Ok((0..num_trials).into_par_iter().map(|n| run_trial(&p, &mut rng.for_trial(n)).snr).collect())
}
