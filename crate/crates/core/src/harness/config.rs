use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fluctuations::Baseline;
use crate::langevin::NoiseOrdering;
use crate::laser::GainMedium;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_modes: usize,
    pub n_channels: usize,
    /// One dimensionless coupling strength per channel; a single value is
    /// used for every channel.
    pub coupling_x: Vec<f64>,
    pub mean_spacing: f64,
    pub carrier: f64,
    pub medium: GainMedium,
    /// When set, the pump of every realization is this multiple of its own
    /// threshold and `medium.pump_strength` is ignored.
    #[serde(default)]
    pub pump_over_threshold: Option<f64>,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub fluctuations: FluctuationConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub n_batches: usize,
    pub ordering: NoiseOrdering,
    pub thermal_occupation: f64,
    /// Write every `stride`-th state to `trajectory.csv`; 0 disables it.
    pub trajectory_stride: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            n_steps: 100_000,
            burn_in: 1_000,
            n_batches: 20,
            ordering: NoiseOrdering::Symmetric,
            thermal_occupation: 0.0,
            trajectory_stride: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctuationConfig {
    /// Field-noise ordering for the linearized laser fluctuations.
    pub ordering: NoiseOrdering,
    pub baseline: Baseline,
    /// Spectrum grid covers `±half_span` linewidths around `ω̄`.
    pub half_span: f64,
    pub grid_points: usize,
}

impl Default for FluctuationConfig {
    fn default() -> Self {
        Self {
            ordering: NoiseOrdering::Antinormal,
            baseline: Baseline::HalfWidthOverIntensity,
            half_span: 20.0,
            grid_points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_realizations: 1,
            master_seed: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

impl RunConfig {
    /// Small defaults for quick runs and tests.
    pub fn example() -> Self {
        Self {
            n_modes: 20,
            n_channels: 2,
            coupling_x: vec![1.0],
            mean_spacing: 1.0,
            carrier: 1000.0,
            medium: GainMedium {
                pump_strength: 1.0,
                atom_number: 1e3,
                coupling: 1.0,
                gamma_perp: 200.0,
                gamma_par: 300.0,
            },
            pump_over_threshold: Some(2.0),
            dynamics: DynamicsConfig::default(),
            fluctuations: FluctuationConfig::default(),
            ensemble: EnsembleConfig::default(),
            outputs: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Per-channel couplings with a single value broadcast.
    pub fn channel_couplings(&self) -> Vec<f64> {
        if self.coupling_x.len() == 1 {
            vec![self.coupling_x[0]; self.n_channels]
        } else {
            self.coupling_x.clone()
        }
    }

    /// Approximate half-width of the GOE spectrum, `2NΔω/π`.
    pub fn spectral_half_width(&self) -> f64 {
        2.0 * self.n_modes as f64 * self.mean_spacing / std::f64::consts::PI
    }

    /// Every violated precondition.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n_modes < 1 {
            v.push("n_modes must be >= 1".to_string());
        }
        if self.n_channels < 1 {
            v.push("n_channels must be >= 1".to_string());
        }
        if self.coupling_x.len() != 1 && self.coupling_x.len() != self.n_channels {
            v.push(format!(
                "coupling_x has {} entries for {} channels",
                self.coupling_x.len(),
                self.n_channels
            ));
        }
        for x in &self.coupling_x {
            if !(*x > 0.0 && x.is_finite()) {
                v.push(format!("coupling_x entries must be > 0, got {x}"));
            }
        }
        let spacing_ok = self.mean_spacing > 0.0 && self.mean_spacing.is_finite();
        if !spacing_ok {
            v.push(format!("mean_spacing must be > 0, got {}", self.mean_spacing));
        }
        if !(self.carrier > 0.0 && self.carrier.is_finite()) {
            v.push(format!("carrier must be > 0, got {}", self.carrier));
        } else if spacing_ok && self.carrier <= 1.2 * self.spectral_half_width() {
            v.push(format!(
                "carrier {} too small for spectral half-width {:.6e}",
                self.carrier,
                self.spectral_half_width()
            ));
        }
        v.extend(self.medium.violations().into_iter().map(|s| format!("medium: {s}")));
        if let Some(r) = self.pump_over_threshold {
            if !(r > 1.0 && r.is_finite()) {
                v.push(format!("pump_over_threshold must be > 1, got {r}"));
            }
        }
        let d = &self.dynamics;
        if !(d.dt > 0.0 && d.dt.is_finite()) {
            v.push(format!("dynamics.dt must be > 0, got {}", d.dt));
        }
        if d.n_batches < 2 {
            v.push(format!("dynamics.n_batches must be >= 2, got {}", d.n_batches));
        }
        if d.n_steps < d.n_batches.max(2) {
            v.push(format!(
                "dynamics.n_steps must be >= n_batches, got {}",
                d.n_steps
            ));
        }
        if !(d.thermal_occupation >= 0.0 && d.thermal_occupation.is_finite()) {
            v.push(format!(
                "dynamics.thermal_occupation must be >= 0, got {}",
                d.thermal_occupation
            ));
        }
        let f = &self.fluctuations;
        if !(f.half_span > 0.0 && f.half_span.is_finite()) {
            v.push(format!("fluctuations.half_span must be > 0, got {}", f.half_span));
        }
        if f.grid_points < 3 {
            v.push(format!("fluctuations.grid_points must be >= 3, got {}", f.grid_points));
        }
        if let Baseline::UserValue(x) = f.baseline {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("fluctuations.baseline must be > 0, got {x}"));
            }
        }
        if self.ensemble.n_realizations < 1 {
            v.push("ensemble.n_realizations must be >= 1".to_string());
        }
        if self.outputs.formats.is_empty() {
            v.push("outputs.formats must not be empty".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Core(Error::InvalidParameter(v.join("; "))))
        }
    }
}
