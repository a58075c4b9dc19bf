//! Independent oracles for the simulator and the analytic engine.
//!
//! With rho = 1 the selected relay's gain pair has the exact joint density
//! `R f1(x) f2(y) G(min(x, y))^(R-1)`, `G(m) = 1 - exp(-m (1/s1 + 1/s2))`,
//! so the outage probability is a nested one-dimensional quadrature that
//! shares no code with either the order-statistics mixtures or the sampler.

use afrelay::config::derive_with_table;
use afrelay::mcsim::{estimate_eq_gain_stats, estimate_outage, run_trial, TrialParams, TrialRng};
use afrelay::specfun::{integrate_finite, integrate_semi_infinite, QuadratureSpec};
use afrelay::{E2eModel, Hop, SystemConfig};

fn spec(scale: f64) -> QuadratureSpec {
    QuadratureSpec { rel_tol: 1e-11, abs_tol: 1e-15, scale, ..Default::default() }
}

fn cfg(r: u32, d1: f64, eta_db: f64) -> SystemConfig {
    SystemConfig { num_relays: r, rho1: 1.0, rho2: 1.0, d1, eta1_db: eta_db, eta2_db: eta_db, ..Default::default() }
}

/// Exact outage under rho = 1 with the selection dependence kept.
fn exact_dependent_outage(c: &SystemConfig) -> f64 {
    let (d, _) = derive_with_table(c).unwrap();
    let (s1, s2, r) = (d.sigma1, d.sigma2, c.num_relays as i32);
    let lam = 1.0 / s1 + 1.0 / s2;
    let g = |m: f64| (-(-m * lam).exp_m1()).powi(r - 1);
    let f1 = |x: f64| (-x / s1).exp() / s1;
    let cdf1 = |x: f64| -(-x / s1).exp_m1();
    let head = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            integrate_finite(|x| f1(x) * g(x), 0.0, u, &spec(s1)).unwrap().value
        }
    };
    let outer = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let xstar = d.psi * (d.eta2 * y + d.c) / (d.eta1 * d.eta2 * y);
        let inner = if xstar <= y { head(xstar) } else { head(y) + g(y) * (cdf1(xstar) - cdf1(y)) };
        r as f64 * (-y / s2).exp() / s2 * inner
    };
    integrate_semi_infinite(outer, &spec(s2)).unwrap()
}

/// The same integral with the two selected gains treated as independent.
fn independent_marginals_outage(c: &SystemConfig) -> f64 {
    let (d, t) = derive_with_table(c).unwrap();
    let outer = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let xstar = d.psi * (d.eta2 * y + d.c) / (d.eta1 * d.eta2 * y);
        t.pdf_current_eq(Hop::Two, y, c.rho2).unwrap() * t.cdf_current_eq(Hop::One, xstar, c.rho1).unwrap()
    };
    integrate_semi_infinite(outer, &spec(d.sigma2)).unwrap()
}

#[test]
fn single_relay_closed_form_is_exact() {
    for c in [cfg(1, 0.5, 15.0), cfg(1, 0.2, 5.0), cfg(1, 0.8, 25.0)] {
        let (d, _) = derive_with_table(&c).unwrap();
        let an = E2eModel::from_config(&c).unwrap().outage(d.psi).unwrap();
        let ex = exact_dependent_outage(&c);
        assert!((an - ex).abs() < 1e-8, "{c:?}: {an} vs {ex}");
    }
}

#[test]
fn analytic_equals_independent_marginal_integral() {
    // identifies what the closed form computes for R > 1
    for c in [cfg(2, 0.5, 15.0), cfg(3, 0.3, 10.0), SystemConfig { rho1: 0.5, rho2: 0.9, ..cfg(2, 0.5, 15.0) }] {
        let (d, _) = derive_with_table(&c).unwrap();
        let an = E2eModel::from_config(&c).unwrap().outage(d.psi).unwrap();
        let ind = independent_marginals_outage(&c);
        assert!(((an - ind) / ind).abs() < 1e-7, "{c:?}: {an} vs {ind}");
    }
}

#[test]
fn simulator_matches_exact_dependent_outage() {
    for (k, c) in [cfg(1, 0.5, 15.0), cfg(2, 0.5, 15.0), cfg(3, 0.3, 10.0)].into_iter().enumerate() {
        let (d, _) = derive_with_table(&c).unwrap();
        let ex = exact_dependent_outage(&c);
        let mc = estimate_outage(&c, d.psi, 1_000_000, 100 + k as u64).unwrap();
        assert!(mc.z_score(ex).abs() < 4.0, "{c:?}: exact {ex}, mc {} ± {}", mc.value, mc.std_error);
    }
}

#[test]
fn selected_gain_laws_match_simulation() {
    let c = SystemConfig { num_relays: 3, rho1: 0.6, rho2: 0.9, d1: 0.3, ..Default::default() };
    let (_, t) = derive_with_table(&c).unwrap();
    let xs = [0.3, 1.0, 3.0, 10.0, 40.0, 120.0];
    let n = 400_000;
    let st = estimate_eq_gain_stats(&c, &xs, n, 9).unwrap();
    // binomial standard error of the reference, so empty bins are handled
    let z = |est: f64, p: f64| (est - p) / (p * (1.0 - p) / n as f64).sqrt().max(1e-300);
    for (h, q, rho) in [(0, Hop::One, c.rho1), (1, Hop::Two, c.rho2)] {
        assert!(st.mean_outdated[h].z_score(t.mean_outdated_eq(q)).abs() < 4.0);
        for (k, &x) in xs.iter().enumerate() {
            let z1 = z(st.cdf_outdated[h][k].value, t.cdf_outdated_eq(q, x).unwrap());
            let z2 = z(st.cdf_current[h][k].value, t.cdf_current_eq(q, x, rho).unwrap());
            assert!(z1.abs() < 4.5 && z2.abs() < 4.5, "hop {h} x={x}: z = {z1}, {z2}");
        }
    }
}

#[test]
fn joint_density_matches_histogram() {
    // P(outdated in A, current in B) over a few rectangles
    let c = SystemConfig { num_relays: 2, rho1: 0.8, d1: 0.5, ..Default::default() };
    let (d, t) = derive_with_table(&c).unwrap();
    let s = d.sigma1;
    let rects = [(0.0, s, 0.0, s), (s, 3.0 * s, 0.0, s), (0.5 * s, 2.0 * s, 0.5 * s, 2.0 * s)];
    let params = TrialParams::from_config(&c).unwrap();
    let rng = TrialRng::new(4, 0);
    let stats: Vec<(f64, f64)> = (0..300_000)
        .map(|n| {
            let t = run_trial(&params, &mut rng.for_trial(n));
            (t.outdated1, t.current1)
        })
        .collect();
    for (y0, y1, x0, x1) in rects {
        let p = integrate_finite(
            |y| integrate_finite(|x| t.joint_pdf_eq(Hop::One, y, x, c.rho1).unwrap(), x0, x1, &spec(s)).unwrap().value,
            y0,
            y1,
            &spec(s),
        )
        .unwrap()
        .value;
        let n = stats.len() as f64;
        let hits = stats.iter().filter(|&&(y, x)| y >= y0 && y < y1 && x >= x0 && x < x1).count() as f64;
        let ph = hits / n;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((ph - p).abs() < 4.0 * se, "rect {y0},{y1},{x0},{x1}: {ph} vs {p}");
    }
}
