//! Parameter sweeps written as one CSV per (metric, variant).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use zfsic_core::metrics::{capacity, capacity_numeric_for, outage, outage_floor_for, sum_capacity};
use zfsic_core::simulator::{estimate_capacity, estimate_outage};
use zfsic_core::specfun::SeriesControl;
use zfsic_core::stage::{DetectionMode, StageIndex};

use crate::config::{grid, Axis, MonteCarloSpec, Output, RunConfig, Scenario, SweepSpec};
use crate::output::{format_number, format_optional, write_csv};
use crate::{io, numeric, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Analytic,
    MonteCarlo,
    Floor,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "monte_carlo",
            Provenance::Floor => "floor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub axis: f64,
    /// Stage number, or "sum".
    pub stage: String,
    pub provenance: Provenance,
    /// Probability, or normalized capacity.
    pub value: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve {
    pub variant: String,
    pub output: Output,
    pub axis: Axis,
    pub rows: Vec<MetricRow>,
}

impl MetricCurve {
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.output.file_stem(), self.variant)
    }

    fn is_capacity(&self) -> bool {
        matches!(self.output, Output::Capacity | Output::SumCapacity)
    }
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<MetricCurve>, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("[sweep] section is required".into()))?;
    if spec.outputs.is_empty() {
        return Err(CliError::Config("sweep.outputs must list at least one metric".into()));
    }
    if let Some(mc) = &spec.monte_carlo {
        if mc.trials == 0 {
            return Err(CliError::Config("sweep.monte_carlo.trials must be positive".into()));
        }
    }
    let points = grid(spec)?;
    let mut outputs = spec.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let mut curves = Vec::new();
    for scenario in cfg.scenarios(Some(spec.axis))? {
        let stages = scenario.stages(&spec.stages)?;
        let needs_threshold = outputs.iter().any(|o| matches!(o, Output::Outage | Output::Floor));
        if needs_threshold && spec.axis != Axis::GammaThDb && scenario.gamma_th_db.is_none() {
            return Err(CliError::Config(format!(
                "gamma_th_db is required for outage/floor outputs (scenario \"{}\")",
                scenario.name
            )));
        }
        for &v in &points {
            let at = scenario.at(spec.axis, v);
            at.config
                .validate()
                .map_err(|e| CliError::Config(format!("sweep.{} = {v}: {e}", spec.axis.key())))?;
        }
        for &output in &outputs {
            let per_point: Vec<Vec<MetricRow>> = points
                .par_iter()
                .map(|&v| evaluate(&scenario.at(spec.axis, v), v, output, &stages, spec))
                .collect::<Result<_, _>>()?;
            let mut rows: Vec<MetricRow> = per_point.into_iter().flatten().collect();
            rows.sort_by(|a, b| {
                a.axis
                    .total_cmp(&b.axis)
                    .then_with(|| stage_key(&a.stage).cmp(&stage_key(&b.stage)))
                    .then(a.provenance.cmp(&b.provenance))
            });
            curves.push(MetricCurve {
                variant: scenario.name.clone(),
                output,
                axis: spec.axis,
                rows,
            });
        }
    }
    Ok(curves)
}

fn stage_key(s: &str) -> usize {
    s.parse().unwrap_or(usize::MAX)
}

fn mode(s: &Scenario, mc: &MonteCarloSpec) -> DetectionMode {
    DetectionMode::new(s.detector, mc.snr_model.into())
}

fn evaluate(s: &Scenario, axis: f64, output: Output, stages: &[StageIndex], spec: &SweepSpec) -> Result<Vec<MetricRow>, CliError> {
    let ctx = |stage: &dyn std::fmt::Display| format!("{} {} at {} = {axis}, stage {stage}", s.name, output.file_stem(), spec.axis.key());
    let row = |stage: String, provenance, value, std_error| MetricRow {
        axis,
        stage,
        provenance,
        value,
        std_error,
    };
    let ctrl = SeriesControl::default();
    let cfg = &s.config;
    let mut rows = Vec::new();
    match output {
        Output::Outage | Output::Floor => {
            let gamma = s.gamma_th().expect("threshold checked before evaluation");
            for &stage in stages {
                if output == Output::Floor {
                    let v = outage_floor_for(cfg, stage, s.detector, gamma).map_err(|e| numeric(ctx(&stage), e))?;
                    rows.push(row(stage.to_string(), Provenance::Floor, v, None));
                    continue;
                }
                let v = outage(cfg, stage, s.detector, gamma).map_err(|e| numeric(ctx(&stage), e))?;
                rows.push(row(stage.to_string(), Provenance::Analytic, v, None));
                if let Some(mc) = &spec.monte_carlo {
                    let r = estimate_outage(cfg, stage, gamma, mode(s, mc), mc.trials, mc.seed).map_err(|e| numeric(ctx(&stage), e))?;
                    rows.push(row(stage.to_string(), Provenance::MonteCarlo, r.estimate, Some(r.std_error)));
                }
            }
        }
        Output::Capacity => {
            for &stage in stages {
                let c = if cfg.kappa_t == 0.0 {
                    capacity(cfg, stage, s.detector, &ctrl)
                } else {
                    capacity_numeric_for(cfg, stage, s.detector)
                }
                .map_err(|e| numeric(ctx(&stage), e))?;
                rows.push(row(stage.to_string(), Provenance::Analytic, c.value, None));
                if let Some(mc) = &spec.monte_carlo {
                    let r = estimate_capacity(cfg, stage, mode(s, mc), mc.trials, mc.seed).map_err(|e| numeric(ctx(&stage), e))?;
                    let ln2 = std::f64::consts::LN_2;
                    rows.push(row(stage.to_string(), Provenance::MonteCarlo, r.estimate * ln2, Some(r.std_error * ln2)));
                }
            }
        }
        Output::SumCapacity => {
            let value = if cfg.kappa_t == 0.0 {
                sum_capacity(cfg, s.detector, &ctrl).map(|c| c.value)
            } else {
                StageIndex::all(cfg.n_tx)
                    .map(|stage| capacity_numeric_for(cfg, stage, s.detector).map(|c| c.value))
                    .sum()
            }
            .map_err(|e| numeric(ctx(&"sum"), e))?;
            rows.push(row("sum".into(), Provenance::Analytic, value, None));
        }
    }
    Ok(rows)
}

/// Writes every curve plus `manifest.json` into `dir`.
pub fn write_curves(cfg: &RunConfig, curves: &[MetricCurve], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    for c in curves {
        let path = dir.join(c.file_name());
        let mut header = vec!["axis", "stage", "provenance", "value", "std_error"];
        if c.is_capacity() {
            header.push("value_bps_hz");
        }
        let rows: Vec<Vec<String>> = c
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    format_number(r.axis),
                    r.stage.clone(),
                    r.provenance.as_str().to_string(),
                    format_number(r.value),
                    format_optional(r.std_error),
                ];
                if c.is_capacity() {
                    cells.push(format_number(r.value / std::f64::consts::LN_2));
                }
                cells
            })
            .collect();
        write_csv(&path, &header, &rows)?;
        written.push(path);
    }
    if let Some(path) = write_sum_comparison(curves, dir)? {
        written.push(path);
    }
    let manifest = manifest(cfg, curves)?;
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest).map_err(|e| io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Side-by-side analytic sum capacities of every variant, one row per axis
/// value, plus the index of the largest. Written when two or more variants
/// request `sum_capacity`.
fn write_sum_comparison(curves: &[MetricCurve], dir: &Path) -> Result<Option<PathBuf>, CliError> {
    let sums: Vec<&MetricCurve> = curves.iter().filter(|c| c.output == Output::SumCapacity).collect();
    if sums.len() < 2 {
        return Ok(None);
    }
    let series: Vec<Vec<(f64, f64)>> = sums
        .iter()
        .map(|c| {
            c.rows
                .iter()
                .filter(|r| r.provenance == Provenance::Analytic)
                .map(|r| (r.axis, r.value))
                .collect()
        })
        .collect();
    let mut header = vec!["axis".to_string()];
    header.extend(sums.iter().map(|c| c.variant.clone()));
    header.push("largest".into());
    let rows: Vec<Vec<String>> = series[0]
        .iter()
        .enumerate()
        .map(|(k, &(axis, _))| {
            let values: Vec<f64> = series.iter().map(|s| s.get(k).map_or(f64::NAN, |p| p.1)).collect();
            let best = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| sums[i].variant.clone())
                .unwrap_or_default();
            let mut cells = vec![format_number(axis)];
            cells.extend(values.iter().map(|&v| format_number(v)));
            cells.push(best);
            cells
        })
        .collect();
    let path = dir.join("sum_capacity_comparison.csv");
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&path, &header, &rows)?;
    Ok(Some(path))
}

fn manifest(cfg: &RunConfig, curves: &[MetricCurve]) -> Result<String, CliError> {
    let axis = cfg.sweep.as_ref().map(|s| s.axis);
    let scenarios: Vec<serde_json::Value> = cfg
        .scenarios(axis)?
        .iter()
        .map(|s| {
            let c = &s.config;
            serde_json::json!({
                "name": s.name,
                "n_rx": c.n_rx,
                "n_tx": c.n_tx,
                "rician_k_db": if s.rician_k_db.is_finite() { serde_json::json!(s.rician_k_db) } else { serde_json::json!("-inf") },
                "snr_db": c.snr_db,
                "gamma_th_db": s.gamma_th_db,
                "sigma_est": c.sigma_est,
                "kappa_t": c.kappa_t,
                "kappa_r": c.kappa_r,
                "distances": c.distances,
                "pathloss_exps": c.pathloss_exps,
                "noise_power": c.noise_power,
                "arrival_angle_deg": c.arrival_angle_deg,
                "antenna_spacing_wavelengths": c.antenna_spacing_wavelengths,
                "detector": format!("{:?}", s.detector),
            })
        })
        .collect();
    let files: Vec<String> = curves.iter().map(MetricCurve::file_name).collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "axis": axis.map(Axis::key),
        "scenarios": scenarios,
        "files": files,
    }))
    .map(|s| s + "\n")
    .map_err(|e| CliError::Io(e.to_string()))
}
