use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;

use super::output::{ensure_dir, format_float, write_json, write_manifest, Table};
use super::{laser_pipeline, realize, Format, HarnessError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub seed_index: u64,
    pub gamma_min: f64,
    pub omega_bar: f64,
    pub intensity: f64,
    #[serde(rename = "K")]
    pub petermann: f64,
    pub linewidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub seed_index: u64,
    pub kind: String,
    pub message: String,
}

/// Linear-interpolation quantiles (type 7).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub mean: f64,
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(v.len() - 1);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q05: q(0.05),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q95: q(0.95),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_realizations: usize,
    pub records: Vec<EnsembleRecord>,
    pub errors: Vec<ErrorRecord>,
    pub errors_by_kind: BTreeMap<String, usize>,
    pub petermann: Option<Quantiles>,
    pub linewidth: Option<Quantiles>,
}

impl EnsembleSummary {
    /// Aggregates from per-realization outcomes, sorted by index.
    pub fn aggregate(mut records: Vec<EnsembleRecord>, mut errors: Vec<ErrorRecord>) -> Self {
        records.sort_by_key(|r| r.seed_index);
        errors.sort_by_key(|e| e.seed_index);
        let mut errors_by_kind = BTreeMap::new();
        for e in &errors {
            *errors_by_kind.entry(e.kind.clone()).or_insert(0) += 1;
        }
        let k: Vec<f64> = records.iter().map(|r| r.petermann).collect();
        let lw: Vec<f64> = records.iter().map(|r| r.linewidth).collect();
        Self {
            n_realizations: records.len() + errors.len(),
            petermann: Quantiles::from_values(&k),
            linewidth: Quantiles::from_values(&lw),
            records,
            errors,
            errors_by_kind,
        }
    }

    /// Recomputes the aggregates from the stored records.
    pub fn reaggregate(&self) -> Self {
        Self::aggregate(self.records.clone(), self.errors.clone())
    }
}

fn realization(config: &RunConfig, index: u64) -> Result<EnsembleRecord, Error> {
    let real = realize(config, index)?;
    let out = laser_pipeline(config, &real)?;
    Ok(EnsembleRecord {
        seed_index: index,
        gamma_min: out.solution.gain_star,
        omega_bar: out.solution.omega_bar,
        intensity: out.solution.intensity,
        petermann: out.solution.petermann,
        linewidth: out.report.linewidth,
    })
}

fn evaluate(config: &RunConfig) -> Vec<Result<EnsembleRecord, Error>> {
    let n = config.ensemble.n_realizations as u64;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..n).into_par_iter().map(|i| realization(config, i)).collect();
        match rayon::ThreadPoolBuilder::new()
            .num_threads(config.ensemble.workers)
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(|i| realization(config, i)).collect()
    }
}

/// Runs every realization and writes `ensemble.csv`, `errors.csv`,
/// `summary.json` and the manifest. Per-realization failures are data.
pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleSummary, HarnessError> {
    config.validate()?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, outcome) in evaluate(config).into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => errors.push(ErrorRecord {
                seed_index: i as u64,
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
    let summary = EnsembleSummary::aggregate(records, errors);

    let dir = &config.outputs.directory;
    ensure_dir(dir)?;
    if config.outputs.wants(Format::Csv) {
        let mut t = Table::new(&["seed_index", "gamma_min", "omega_bar", "intensity", "K", "linewidth"]);
        for r in &summary.records {
            t.push(vec![
                r.seed_index.to_string(),
                format_float(r.gamma_min),
                format_float(r.omega_bar),
                format_float(r.intensity),
                format_float(r.petermann),
                format_float(r.linewidth),
            ]);
        }
        t.write(&dir.join("ensemble.csv"))?;
        let mut t = Table::new(&["seed_index", "kind", "message"]);
        for e in &summary.errors {
            t.push(vec![e.seed_index.to_string(), e.kind.clone(), e.message.clone()]);
        }
        t.write(&dir.join("errors.csv"))?;
    }
    if config.outputs.wants(Format::Json) {
        let aggregates = serde_json::json!({
            "n_realizations": summary.n_realizations,
            "n_records": summary.records.len(),
            "n_errored": summary.errors.len(),
            "errors_by_kind": summary.errors_by_kind,
            "petermann": summary.petermann,
            "linewidth": summary.linewidth,
        });
        write_json(&dir.join("summary.json"), &aggregates)?;
    }
    let mut echo = config.clone();
    echo.ensemble.workers = 0;
    write_manifest(dir, "ensemble", &echo, config.ensemble.master_seed)?;
    Ok(summary)
}
