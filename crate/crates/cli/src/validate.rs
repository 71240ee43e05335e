//! Validation battery: special-function oracles, distributional KS tests,
//! analytic-vs-Monte-Carlo deltas, inverse-Wishart moments and the series
//! term counts.

use std::path::Path;

use serde::Serialize;
use zfsic_core::channel::SystemConfig;
use zfsic_core::metrics::{capacity, outage, ConvergenceRow};
use zfsic_core::quad::{integrate, QuadOptions};
use zfsic_core::simulator::{
    estimate_capacity, estimate_outage, ks_critical_one_sample, ks_critical_two_sample, ks_one_sample,
    ks_two_sample, sample_lemma_mixture, sample_normalized_gain, wishart_trace_stats,
};
use zfsic_core::specfun::{
    gamma_p, gamma_upper, ln_bessel_i, marcum_integral_j, marcum_q, nuttall_q_closed_form,
    nuttall_q_quadrature, SeriesControl,
};
use zfsic_core::stage::{DetectionMode, SnrModel, StageIndex};

use crate::config::{RunConfig, Scenario};
use crate::convergence::{run_convergence, PUBLISHED_TERMS, TERMS_SLACK};
use crate::{io, numeric, CliError};

/// Smallest accepted trial count.
pub const MIN_TRIALS: u64 = 10_000;

/// KS significance level.
const KS_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check_id: String,
    pub status: Status,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(check_id: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let ok = (measured - expected).abs() <= tolerance;
        Self {
            check_id: check_id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            expected,
            tolerance,
        }
    }

    /// Passes when `measured` ≤ `tolerance` (distances and relative errors).
    fn bound(check_id: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(check_id, measured, 0.0, tolerance)
    }
}

pub fn run_validate(cfg: &RunConfig, trials: u64, seed: u64) -> Result<Vec<Check>, CliError> {
    if trials < MIN_TRIALS {
        return Err(CliError::Config(format!("--trials must be at least {MIN_TRIALS}")));
    }
    let scenarios = cfg.scenarios(None)?;
    let mut checks = specfun_checks()?;
    for s in &scenarios {
        checks.extend(scenario_checks(s, trials, seed)?);
    }
    checks.extend(wishart_checks(&scenarios[0].config, trials, seed)?);
    checks.extend(table_checks(cfg)?);
    Ok(checks)
}

pub fn write_report(checks: &[Check], path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(checks).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io(path, e))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn quad(f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64, CliError> {
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    };
    integrate(f, a, b, &[], opts)
        .map(|q| q.value)
        .map_err(|e| numeric("oracle quadrature", e))
}

fn specfun_checks() -> Result<Vec<Check>, CliError> {
    let err = |e| numeric("specfun", e);
    let mut out = Vec::new();
    // Q_m(a,b) = ∫_b^∞ x (x/a)^{m−1} e^{−(x²+a²)/2} I_{m−1}(ax) dx
    for (m, a, b) in [(1u32, 1.0, 1.0), (3, 2.0, 3.5), (5, 4.0, 2.0)] {
        let got = marcum_q(m, a, b).map_err(err)?;
        let want = quad(
            |x: f64| {
                let ln = x.ln() + (m as f64 - 1.0) * (x / a).ln() - 0.5 * (x * x + a * a) + ln_bessel_i(m - 1, a * x).unwrap_or(f64::NAN);
                ln.exp()
            },
            b,
            b + a + 40.0,
        )?;
        out.push(Check::bound(format!("specfun/marcum_q/m{m}_a{a}_b{b}"), rel(got, want), 1e-7));
    }
    for (mu, nu, a, b) in [(6.0, 3u32, 2.5, 2.0), (9.0, 4, 3.0, 4.0)] {
        let closed = nuttall_q_closed_form(mu, nu, a, b).map_err(err)?.unwrap_or(f64::NAN);
        let quadrature = nuttall_q_quadrature(mu, nu, a, b).map_err(err)?;
        out.push(Check::bound(format!("specfun/nuttall_q/mu{mu}_nu{nu}_a{a}_b{b}"), rel(closed, quadrature), 1e-7));
    }
    for (p, m, b) in [(2.0, 3u32, 1.5), (4.0, 5, 2.5)] {
        let got = marcum_integral_j(p, m, b).map_err(err)?;
        let want = quad(|u: f64| u.powf(p) * marcum_q(m, u.sqrt(), b).unwrap_or(f64::NAN), 0.0, 1.0)?;
        out.push(Check::bound(format!("specfun/marcum_integral_j/p{p}_m{m}_b{b}"), rel(got, want), 1e-7));
    }
    for (a, x) in [(-3.0, 0.4), (-7.0, 2.5), (-2.5, 1.3)] {
        let got = gamma_upper(a, x).map_err(err)?;
        let want = quad(|t: f64| t.powf(a - 1.0) * (-t).exp(), x, x + 80.0)?;
        out.push(Check::bound(format!("specfun/gamma_upper/a{a}_x{x}"), rel(got, want), 1e-7));
    }
    Ok(out)
}

fn scenario_checks(s: &Scenario, trials: u64, seed: u64) -> Result<Vec<Check>, CliError> {
    let cfg = &s.config;
    let mode = DetectionMode::new(s.detector, SnrModel::FullSystem);
    let exact = cfg.sigma_est == 0.0;
    let mut out = Vec::new();
    for stage in StageIndex::all(cfg.n_tx) {
        let id = |what: &str| format!("{}/{what}/stage{stage}", s.name);
        let ctx = |what: &str| format!("{} {what} stage {stage}", s.name);
        if let Some(gamma) = s.gamma_th() {
            let a = outage(cfg, stage, s.detector, gamma).map_err(|e| numeric(ctx("outage"), e))?;
            let r = estimate_outage(cfg, stage, gamma, mode, trials, seed).map_err(|e| numeric(ctx("outage"), e))?;
            let tol = if exact {
                3.0 * r.std_error.max((a * (1.0 - a) / trials as f64).sqrt())
            } else {
                0.1 * a
            };
            out.push(Check::new(id("outage"), r.estimate, a, tol));
        }
        if cfg.kappa_t == 0.0 {
            let a = capacity(cfg, stage, s.detector, &SeriesControl::default())
                .map_err(|e| numeric(ctx("capacity"), e))?
                .bps_hz();
            let r = estimate_capacity(cfg, stage, mode, trials, seed).map_err(|e| numeric(ctx("capacity"), e))?;
            let tol = if exact { 3.0 * r.std_error } else { 0.1 * a };
            out.push(Check::new(id("capacity_bps_hz"), r.estimate, a, tol));
        }
        let gains = sample_normalized_gain(cfg, stage, s.detector, trials, seed).map_err(|e| numeric(ctx("ks"), e))?;
        let (d, crit) = if stage.is_rician() {
            let direct = sample_lemma_mixture(cfg, trials, seed ^ 0x5DEE_CE66_D1CE_4E5B).map_err(|e| numeric(ctx("ks"), e))?;
            (ks_two_sample(&gains, &direct), ks_critical_two_sample(KS_ALPHA, gains.len(), direct.len()))
        } else {
            let dof = s.detector.dof(cfg.n_rx, cfg.n_tx, stage) as f64;
            let d = ks_one_sample(&gains, |x| gamma_p(dof, 0.5 * x).unwrap_or(f64::NAN));
            (d, ks_critical_one_sample(KS_ALPHA, gains.len()))
        };
        out.push(Check::bound(id("ks"), d, crit));
    }
    Ok(out)
}

fn wishart_checks(base: &SystemConfig, trials: u64, seed: u64) -> Result<Vec<Check>, CliError> {
    let (n, m) = (base.n_rx, base.n_tx);
    if n < m + 2 {
        return Ok(Vec::new());
    }
    let central = SystemConfig::symmetric(n, m);
    let (mean, var) = wishart_trace_stats(&central, StageIndex::FIRST, trials, seed).map_err(|e| numeric("wishart", e))?;
    let (mref, vref) = (mean.analytic_ref.unwrap_or(f64::NAN), var.analytic_ref.unwrap_or(f64::NAN));
    Ok(vec![
        Check::new(format!("wishart/N{n}_M{m}/mean"), mean.estimate, mref, 0.01 * mref),
        Check::new(format!("wishart/N{n}_M{m}/variance"), var.estimate, vref, 0.03 * vref),
    ])
}

fn table_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut table = cfg.clone();
    table.convergence = None;
    let rows: Vec<ConvergenceRow> = run_convergence(&table)?;
    Ok(rows
        .iter()
        .zip(PUBLISHED_TERMS)
        .map(|(r, t)| {
            Check::new(
                format!("terms/N{}_M{}", r.n_rx, r.n_tx),
                r.terms_converged as f64,
                t as f64,
                TERMS_SLACK as f64,
            )
        })
        .collect())
}
