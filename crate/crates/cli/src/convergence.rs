//! Terms needed by the Rician capacity series, per (N, M).

use std::path::Path;

use rayon::prelude::*;
use zfsic_core::channel::{k_from_db, SystemConfig};
use zfsic_core::metrics::{convergence_row, ConvergenceRow, MetricsError};

use crate::config::{ConvergenceSpec, RunConfig, TABLE_DIMS};
use crate::output::{format_number, write_csv};
use crate::{numeric, CliError};

/// Published term counts for [`TABLE_DIMS`] at K = 6 dB, p/N₀ = 10 dB.
pub const PUBLISHED_TERMS: [usize; 6] = [3, 9, 4, 13, 42, 76];

/// Allowed deviation from [`PUBLISHED_TERMS`].
pub const TERMS_SLACK: usize = 2;

fn default_spec() -> ConvergenceSpec {
    ConvergenceSpec {
        rician_k_db: 6.0,
        snr_db: 10.0,
        dims: TABLE_DIMS.to_vec(),
    }
}

/// Symmetric (N, M) system taking impairments and N₀ from the base scenario.
pub fn table_config(cfg: &RunConfig, spec: &ConvergenceSpec, n_rx: usize, n_tx: usize) -> SystemConfig {
    let s = &cfg.scenario;
    let kappa = s.kappa.unwrap_or(0.0);
    let mut c = SystemConfig::symmetric(n_rx, n_tx).with_snr_db(spec.snr_db);
    c.rician_k = k_from_db(spec.rician_k_db);
    c.sigma_est = s.sigma_est.unwrap_or(0.0);
    c.kappa_t = s.kappa_t.unwrap_or(kappa);
    c.kappa_r = s.kappa_r.unwrap_or(kappa);
    if let Some(n0) = s.noise_power {
        c.noise_power = n0;
    }
    c
}

pub fn run_convergence(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>, CliError> {
    let spec = cfg.convergence.clone().unwrap_or_else(default_spec);
    if spec.dims.is_empty() {
        return Err(CliError::Config("convergence.dims must not be empty".into()));
    }
    spec.dims
        .par_iter()
        .map(|&[n, m]| {
            let c = table_config(cfg, &spec, n, m);
            c.validate().map_err(|e| CliError::Config(format!("convergence.dims [{n}, {m}]: {e}")))?;
            convergence_row(&c).map_err(|e| match e {
                MetricsError::TransmitImpairment { .. } => CliError::Config(format!("convergence: {e}")),
                e => numeric(format!("convergence N = {n}, M = {m}"), e),
            })
        })
        .collect()
}

pub fn write_table(rows: &[ConvergenceRow], path: &Path) -> Result<(), CliError> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_rx.to_string(),
                r.n_tx.to_string(),
                r.terms_converged.to_string(),
                r.terms_lookahead.to_string(),
                format_number(r.capacity),
                format_number(r.capacity / std::f64::consts::LN_2),
            ]
        })
        .collect();
    write_csv(
        path,
        &["n_rx", "n_tx", "terms", "terms_lookahead", "capacity", "capacity_bps_hz"],
        &body,
    )
}
