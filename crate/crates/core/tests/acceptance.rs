//! Exit criteria. Each test prints one `PASS`/`FAIL` line and then asserts.
//!
//! The Monte Carlo criteria run 10⁶ trials per point; run with
//! `cargo test -p zfsic-core --test acceptance -- --nocapture` to see the
//! lines as they complete.

mod common;

use std::time::{Duration, Instant};

use common::{rel, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zfsic_core::channel::*;
use zfsic_core::metrics::*;
use zfsic_core::simulator::*;
use zfsic_core::specfun::*;
use zfsic_core::stage::*;

const TRIALS: u64 = 1_000_000;
const FULL_SIC: DetectionMode = DetectionMode::new(Detector::ZfSic, SnrModel::FullSystem);

fn verdict(id: &str, pass: bool, detail: impl AsRef<str>) {
    println!("{} {id}: {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
    assert!(pass, "{id}: {}", detail.as_ref());
}

fn stage(i: usize, m: usize) -> StageIndex {
    StageIndex::new(i, m).unwrap()
}

/// N = 8, M = 4, p/N₀ = 10 dB, equal unit-distance users.
fn link(k_db: f64) -> SystemConfig {
    SystemConfig::symmetric(8, 4).with_k_db(k_db).with_snr_db(10.0)
}

fn gamma_6db() -> f64 {
    db_to_linear(6.0)
}

#[test]
fn c01_series_term_counts() {
    const PUBLISHED: [(usize, usize, usize); 6] = [(4, 4, 3), (8, 4, 9), (8, 8, 4), (16, 8, 13), (64, 8, 42), (128, 8, 76)];
    let start = Instant::now();
    let mut worst = 0usize;
    let mut rows = Vec::new();
    for (n, m, published) in PUBLISHED {
        let c = SystemConfig::symmetric(n, m).with_k_db(6.0).with_snr_db(10.0);
        let row = convergence_row(&c).unwrap();
        worst = worst.max(row.terms_converged.abs_diff(published));
        rows.push(format!(
            "({n},{m}) T={} (T/T+5 rule {}) vs {published}, C={:.4}",
            row.terms_converged, row.terms_lookahead, row.capacity
        ));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 2 && elapsed < Duration::from_secs(60);
    verdict(
        "c01 term counts within ±2",
        pass,
        format!("max |ΔT| = {worst}, {:.1}s; {}", elapsed.as_secs_f64(), rows.join("; ")),
    );
}

#[test]
fn c02_first_stream_exact_without_estimation_error() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (j, k_db) in [0.0, 3.0, 7.0, 10.0].into_iter().enumerate() {
        let c = link(k_db).with_kappa(0.1);
        let a = outage(&c, StageIndex::FIRST, Detector::ZfSic, gamma_6db()).unwrap();
        let r = estimate_outage(&c, StageIndex::FIRST, gamma_6db(), FULL_SIC, TRIALS, 100 + j as u64)
            .unwrap()
            .with_reference(a);
        let z = r.sigmas().unwrap();
        pass &= z <= 3.0;
        lines.push(format!("K={k_db} dB analytic {a:.5} mc {:.5} ({z:.2}σ)", r.estimate));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    verdict("c02 σ=0 outage within 3σ", pass, format!("{}; {:.0}s", lines.join("; "), elapsed.as_secs_f64()));
}

#[test]
fn c03_first_stream_with_estimation_error() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut worst: f64 = 0.0;
    for (j, k_db) in [0.0, 3.0, 7.0, 10.0].into_iter().enumerate() {
        let c = link(k_db).with_kappa(0.1).with_sigma_est(0.05);
        let a = outage(&c, StageIndex::FIRST, Detector::ZfSic, gamma_6db()).unwrap();
        let r = estimate_outage(&c, StageIndex::FIRST, gamma_6db(), FULL_SIC, TRIALS, 200 + j as u64).unwrap();
        let gap = (a - r.estimate).abs() / r.estimate;
        worst = worst.max(gap);
        lines.push(format!("K={k_db} dB analytic {a:.5} mc {:.5} gap {:.1}%", r.estimate, 100.0 * gap));
    }
    let elapsed = start.elapsed();
    let pass = worst <= 0.10 && elapsed < Duration::from_secs(300);
    verdict("c03 σ=0.05 outage within 10%", pass, format!("{}; {:.0}s", lines.join("; "), elapsed.as_secs_f64()));
}

#[test]
fn c04_rayleigh_stages() {
    let c = link(7.0).with_kappa(0.1);
    let mut analytic = Vec::new();
    let mut empirical = Vec::new();
    let mut lines = Vec::new();
    let mut pass = true;
    for i in 2..=4 {
        let a = outage(&c, stage(i, 4), Detector::ZfSic, gamma_6db()).unwrap();
        let r = estimate_outage(&c, stage(i, 4), gamma_6db(), FULL_SIC, TRIALS, 300 + i as u64)
            .unwrap()
            .with_reference(a);
        let z = r.sigmas().unwrap();
        pass &= z <= 3.0;
        lines.push(format!("stage {i} analytic {a:.6} mc {:.6} ({z:.2}σ)", r.estimate));
        analytic.push(a);
        empirical.push(r.estimate);
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[0] > w[1]);
    pass &= decreasing(&analytic) && decreasing(&empirical);
    verdict(
        "c04 Rayleigh stages within 3σ and decreasing",
        pass,
        lines.join("; "),
    );
}

/// κ_T = 0 versions of the large-array sum-capacity grid and the small
/// ZF vs ZF-SIC grid.
fn capacity_grid() -> Vec<(&'static str, SystemConfig)> {
    let mut out = Vec::new();
    for n in [64, 128] {
        for k_db in [f64::NEG_INFINITY, 10.0] {
            out.push(("large", SystemConfig::symmetric(n, 8).with_k_db(k_db).with_sigma_est(0.15).with_kappas(0.0, 0.15)));
        }
    }
    for n in [4, 8] {
        out.push(("small", SystemConfig::symmetric(n, 4).with_k_db(10.0).with_sigma_est(0.1).with_kappas(0.0, 0.1)));
    }
    out
}

#[test]
fn c05_capacity_routes_agree() {
    let mut worst_rician: f64 = 0.0;
    let mut worst_rayleigh: f64 = 0.0;
    let mut points = 0;
    for (_, base) in capacity_grid() {
        for snr_db in (0..=30).step_by(5) {
            let c = base.clone().with_snr_db(snr_db as f64);
            for s in StageIndex::all(c.n_tx) {
                let closed = capacity(&c, s, Detector::ZfSic, &SeriesControl::default()).unwrap().value;
                let quad = capacity_numeric(&c, s).unwrap().value;
                if s.is_rician() {
                    worst_rician = worst_rician.max((closed - quad).abs());
                } else {
                    worst_rayleigh = worst_rayleigh.max(rel(closed, quad));
                }
                points += 1;
            }
        }
    }
    let pass = worst_rician <= 1e-3 && worst_rayleigh <= 1e-6;
    verdict(
        "c05a closed forms vs quadrature",
        pass,
        format!("{points} points, Rician max abs {worst_rician:.2e}, Rayleigh max rel {worst_rayleigh:.2e}"),
    );
}

/// Monte Carlo leg at p/N₀ = 10 dB: every stage of the small grid and the
/// first and last stages of the N = 64, K = 10 dB case.
#[test]
fn c05_capacity_matches_monte_carlo() {
    let grid = capacity_grid();
    let mut cases: Vec<(SystemConfig, StageIndex)> = Vec::new();
    for (kind, c) in &grid {
        let c = c.clone().with_snr_db(10.0);
        match *kind {
            "small" => cases.extend(StageIndex::all(4).map(|s| (c.clone(), s))),
            _ if c.n_rx == 64 && c.rician_k > 0.0 => {
                cases.push((c.clone(), StageIndex::FIRST));
                cases.push((c.clone(), stage(8, 8)));
            }
            _ => {}
        }
    }
    let mut lines = Vec::new();
    let mut pass = true;
    for (j, (c, s)) in cases.iter().enumerate() {
        let a = capacity(c, *s, Detector::ZfSic, &SeriesControl::default()).unwrap().bps_hz();
        let r = estimate_capacity(c, *s, FULL_SIC, TRIALS, 500 + j as u64).unwrap().with_reference(a);
        let z = r.sigmas().unwrap();
        pass &= z <= 3.0;
        lines.push(format!("N={} stage {}: {a:.4} vs {:.4} ({z:.1}σ)", c.n_rx, s.get(), r.estimate));
    }
    verdict("c05b capacity vs Monte Carlo within 3σ", pass, lines.join("; "));
}

#[test]
fn c06_wishart_trace() {
    let c = SystemConfig::symmetric(8, 4);
    let reference = wishart_trace_reference(&c, StageIndex::FIRST).unwrap();
    let (mean, var) = wishart_trace_stats(&c, StageIndex::FIRST, TRIALS, 600).unwrap();
    let mean_gap = rel(mean.estimate, reference.mean);
    let var_gap = rel(var.estimate, reference.variance);
    let pass = mean_gap <= 0.01 && var_gap <= 0.03;
    verdict(
        "c06 inverse-Wishart trace moments",
        pass,
        format!(
            "mean {:.5} vs {:.5} ({:.2}%; {:.1}% from 4/3), variance {:.5} vs {:.5} ({:.2}%)",
            mean.estimate,
            reference.mean,
            100.0 * mean_gap,
            100.0 * rel(mean.estimate, 4.0 / 3.0),
            var.estimate,
            reference.variance,
            100.0 * var_gap
        ),
    );
}

#[test]
fn c07_special_function_oracles() {
    let start = Instant::now();
    let mut worst: [(f64, &str); 4] = [(0.0, "marcum_q"), (0.0, "nuttall_q"), (0.0, "marcum_integral_j"), (0.0, "gamma_upper")];

    let mut g = Grid::new(3);
    for _ in 0..60 {
        let (m, a, b) = (g.int(1, 12), g.uniform(0.1, 10.0), g.uniform(0.1, 14.0));
        worst[0].0 = worst[0].0.max(rel(marcum_q(m, a, b).unwrap(), common::marcum_q(m, a, b)));
    }

    let args = [0.05, 0.5, 1.0, 2.0, 3.7, 6.0, 10.0, 14.5, 20.0];
    for (n, m) in [(4, 4), (8, 4), (16, 4), (8, 8), (16, 8)] {
        let nu = (n - m + 1) as u32;
        for j in 0..=(m - 2) {
            let mu = 2.0 * (n - m + j + 1) as f64;
            for &x in &args {
                for b in [0.0, 1.0] {
                    let want = common::nuttall_q(mu, nu, x, b);
                    let closed = nuttall_q_closed_form(mu, nu, x, b).unwrap().expect("closed form");
                    let fallback = nuttall_q_quadrature(mu, nu, x, b).unwrap();
                    worst[1].0 = worst[1].0.max(rel(closed, want)).max(rel(fallback, want));
                }
            }
        }
    }
    for (mu, nu, a, b) in [(6.0, 2u32, 1.5, 1.0), (4.5, 1, 2.0, 0.7), (9.0, 5, 3.0, 2.5)] {
        worst[1].0 = worst[1].0.max(rel(nuttall_q(mu, nu, a, b).unwrap(), common::nuttall_q(mu, nu, a, b)));
    }

    let mut g = Grid::new(17);
    for _ in 0..60 {
        let (a, m, b) = (g.uniform(0.0, 12.0), g.int(1, 12), g.uniform(0.0, 6.0));
        let want = marcum_integral_oracle(a, m, b);
        worst[2].0 = worst[2].0.max(rel(marcum_integral_j(a, m, b).unwrap(), want));
    }

    for j in 0..=12 {
        for x in [0.05, 0.3, 1.0, 2.5, 7.0, 15.0, 30.0] {
            let a = -(j as f64);
            worst[3].0 = worst[3].0.max(rel(gamma_upper(a, x).unwrap(), common::gamma_upper(a, x)));
        }
    }
    let mut g = Grid::new(11);
    for _ in 0..40 {
        let (a, x) = (g.uniform(-9.0, 3.0), g.uniform(0.05, 25.0));
        worst[3].0 = worst[3].0.max(rel(gamma_upper(a, x).unwrap(), common::gamma_upper(a, x)));
    }

    let elapsed = start.elapsed();
    let pass = worst.iter().all(|w| w.0 <= 1e-7) && elapsed < Duration::from_secs(120);
    let detail: Vec<String> = worst.iter().map(|(e, name)| format!("{name} {e:.1e}")).collect();
    verdict(
        "c07 special functions within 1e-7 of oracles",
        pass,
        format!("{}; {:.0}s", detail.join(", "), elapsed.as_secs_f64()),
    );
}

/// ∫₀¹ u^p Q_m(√u, b) du from Q_m(a, b) = Σ_k Pois(k; a²/2) Q(m+k, b²/2):
/// every term is positive and Q(n, y) = e^{−y} Σ_{j<n} y^j/j! for integer n.
fn marcum_integral_oracle(p: f64, m: u32, b: f64) -> f64 {
    let y = 0.5 * b * b;
    let upper = |n: u32| -> f64 {
        if y == 0.0 {
            return 1.0;
        }
        let (mut term, mut sum) = ((-y).exp(), 0.0);
        for j in 0..n {
            if j > 0 {
                term *= y / j as f64;
            }
            sum += term;
        }
        sum.min(1.0)
    };
    let mut total = 0.0;
    let mut ln_fact = 0.0;
    for k in 0..60u32 {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let moment = common::integrate(
            |u| (p * u.ln() - 0.5 * u + k as f64 * (0.5 * u).ln() - ln_fact).exp(),
            0.0,
            1.0,
            1,
        );
        let t = moment * upper(m + k);
        total += t;
        if k > 5 && t < 1e-18 * total {
            break;
        }
    }
    total
}

#[test]
fn c08_gain_distributions() {
    let c = link(7.0);
    let gains = sample_normalized_gain(&c, StageIndex::FIRST, Detector::ZfSic, TRIALS, 800).unwrap();
    let direct = sample_lemma_mixture(&c, TRIALS, 801).unwrap();
    let d = ks_two_sample(&gains, &direct);
    let crit = ks_critical_two_sample(0.01, gains.len(), direct.len());
    let mut pass = d < crit;
    let mut lines = vec![format!("stage 1 D={d:.5} (critical {crit:.5})")];
    for i in 2..=4 {
        let x = sample_normalized_gain(&c, stage(i, 4), Detector::ZfSic, TRIALS, 800 + i as u64).unwrap();
        let dof = Detector::ZfSic.dof(8, 4, stage(i, 4)) as f64;
        let d = ks_one_sample(&x, |v| gamma_p(dof, 0.5 * v).unwrap());
        let crit = ks_critical_one_sample(0.01, x.len());
        pass &= d < crit;
        lines.push(format!("stage {i} D={d:.5} (critical {crit:.5})"));
    }
    verdict("c08 KS below 1% critical value", pass, lines.join("; "));
}

#[test]
fn c09_outage_floor() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (sigma, kappa) in [(0.05, 0.1), (0.15, 0.3)] {
        for k_db in [0.0, 7.0] {
            let c = link(k_db).with_sigma_est(sigma).with_kappa(kappa);
            for s in StageIndex::all(4) {
                let floor = outage_floor(&c, s, gamma_6db()).unwrap();
                let high = outage(&c.clone().with_snr_db(60.0), s, Detector::ZfSic, gamma_6db()).unwrap();
                let gap = (floor - high).abs();
                pass &= gap <= 1e-4;
                if s == StageIndex::FIRST {
                    lines.push(format!("σ={sigma} κ={kappa} K={k_db}: floor {floor:.3e} gap {gap:.1e}"));
                }
            }
        }
    }
    for k_db in [0.0, 7.0] {
        let c = link(k_db);
        for s in StageIndex::all(4) {
            let floor = outage_floor(&c, s, gamma_6db()).unwrap();
            let high = outage(&c.clone().with_snr_db(60.0), s, Detector::ZfSic, gamma_6db()).unwrap();
            pass &= floor == 0.0 && high < 1e-6;
            if s == StageIndex::FIRST {
                lines.push(format!("ideal K={k_db}: floor {floor}, outage at 60 dB {high:.1e}"));
            }
        }
    }
    verdict("c09 outage floor", pass, lines.join("; "));
}

#[test]
fn c10_invariant_grids() {
    let mut failures = Vec::new();
    let dims = [(1, 1), (2, 1), (4, 2), (4, 4), (8, 4), (8, 8), (12, 6), (16, 8)];
    let us = [0.0, 0.02, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

    for &(n, m) in &dims {
        for k_db in [f64::NEG_INFINITY, -5.0, 0.0, 6.0, 10.0, 14.0] {
            let c = SystemConfig::symmetric(n, m).with_k_db(k_db);
            let law = RicianStreamLaw::from_config(&c).unwrap();
            let f: Vec<f64> = us.iter().map(|&u| law.cdf(u).unwrap()).collect();
            if f[0] != 0.0 || f.iter().any(|v| !(0.0..=1.0).contains(v)) || f.windows(2).any(|w| w[1] < w[0]) {
                failures.push(format!("cdf N={n} M={m} K={k_db}"));
            }
            for sigma in [0.0, 0.1] {
                let c = c.clone().with_sigma_est(sigma).with_kappa(0.1);
                for s in StageIndex::all(m) {
                    let p: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0]
                        .iter()
                        .map(|&g| outage(&c, s, Detector::ZfSic, g).unwrap())
                        .collect();
                    if p.iter().any(|v| !(0.0..=1.0).contains(v)) || p.windows(2).any(|w| w[1] < w[0]) {
                        failures.push(format!("outage N={n} M={m} K={k_db} σ={sigma} stage {}", s.get()));
                    }
                }
            }
            if k_db.is_finite() && k_db >= 0.0 {
                let row = convergence_row(&c).unwrap();
                if row.partial_sums.windows(2).any(|w| w[1] < w[0]) {
                    failures.push(format!("partial sums N={n} M={m} K={k_db}"));
                }
            }
        }
    }

    for mm in 1..=10u32 {
        for a in [0.0, 0.5, 2.0, 5.0, 10.0] {
            let mut prev = 1.0 + 1e-15;
            for b in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0] {
                let q = marcum_q(mm, a, b).unwrap();
                let up_a = marcum_q(mm, a + 0.5, b).unwrap();
                let up_m = marcum_q(mm + 1, a, b).unwrap();
                if !(0.0..=1.0).contains(&q) || q > prev || up_a < q - 1e-13 || up_m < q - 1e-13 {
                    failures.push(format!("marcum m={mm} a={a} b={b}"));
                }
                prev = q + 1e-15;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for &(n, m) in &dims {
        let c = SystemConfig::symmetric(n, m).with_k_db(6.0);
        for _ in 0..10 {
            let h = sample_channel(&c, &mut rng, false).h_true;
            for i in 1..=m {
                if projection_dof_check(&h, i).ok() != Some((m - i, n - m + i)) {
                    failures.push(format!("projection N={n} M={m} stage {i}"));
                }
            }
        }
    }

    let c = link(7.0).with_sigma_est(0.05).with_kappa(0.1);
    let a = estimate_outage(&c, StageIndex::FIRST, gamma_6db(), FULL_SIC, 50_000, 9).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let b = pool.install(|| estimate_outage(&c, StageIndex::FIRST, gamma_6db(), FULL_SIC, 50_000, 9)).unwrap();
    if a != b {
        failures.push("determinism".into());
    }

    verdict(
        "c10 invariant grids",
        failures.is_empty(),
        if failures.is_empty() { "all grids hold".to_string() } else { failures.join(", ") },
    );
}
