//! Configuration, runners and file output.
//!
//! Every runner validates the whole [`RunConfig`] first, then computes, then
//! writes. Realization `i` draws its random inputs from the substreams
//! `(master_seed, i, purpose)`, so results do not depend on scheduling.

mod config;
mod ensemble;
mod output;
mod runs;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::effective::{build_damping, build_dynamical, resonances, DampingMatrix, DynamicalMatrix, ResonanceOptions, ResonanceSet};
use crate::ensembles::{sample_coupling, sample_goe_spectrum, CouplingMatrix, ModeSpectrum};
use crate::error::Error;
use crate::fluctuations::{
    build_fluctuation_matrix, correlator_spectrum, fit_lorentzian, linewidth, symmetric_grid, zero_mode,
    CorrelatorSpectrum, FluctuationMatrix, FluctuationNoise, LinewidthReport, LorentzianFit, ZeroMode,
};
use crate::langevin::noise_from_coupling;
use crate::laser::{lasing_threshold, steady_state, GainMedium, LasingSolution};
use crate::seed::{Purpose, Seed};

pub use config::{DynamicsConfig, EnsembleConfig, FluctuationConfig, Format, OutputConfig, RunConfig};
pub use ensemble::{run_ensemble, EnsembleRecord, EnsembleSummary, ErrorRecord, Quantiles};
pub use output::{format_float, matrix_json};
pub use runs::{run_dynamics, run_laser, run_spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BELOW_THRESHOLD: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.kind(),
            HarnessError::Config(_) => "InvalidConfig",
            HarnessError::Io { .. } => "Io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_VALIDATION,
            HarnessError::Io { .. } => EXIT_IO,
            HarnessError::Core(e) => match e {
                Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::TooFewModes { .. }
                | Error::NonPositiveFrequency { .. } => EXIT_VALIDATION,
                Error::BelowThreshold { .. } => EXIT_BELOW_THRESHOLD,
                _ => EXIT_NUMERICAL,
            },
        }
    }

    /// Machine-readable description for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
    }
}

/// Random inputs and derived linear dynamics of one realization.
#[derive(Debug, Clone)]
pub struct Realization {
    pub index: u64,
    pub spectrum: ModeSpectrum,
    pub coupling: CouplingMatrix,
    pub damping: DampingMatrix,
    pub dynamics: DynamicalMatrix,
}

impl Realization {
    pub fn resonances(&self) -> Result<ResonanceSet, Error> {
        resonances(&self.dynamics, &ResonanceOptions::default())
    }
}

pub fn realize(config: &RunConfig, index: u64) -> Result<Realization, Error> {
    let master = config.ensemble.master_seed;
    let spectrum = sample_goe_spectrum(
        config.n_modes,
        config.mean_spacing,
        config.carrier,
        Seed::substream(master, index, Purpose::Spectrum),
    )?;
    let coupling = sample_coupling(
        config.n_modes,
        config.n_channels,
        &config.channel_couplings(),
        config.mean_spacing,
        Seed::substream(master, index, Purpose::Coupling),
    )?;
    from_inputs(index, spectrum, coupling)
}

/// Builds a realization from explicit inputs, e.g. a channel-rotated `W`.
pub fn from_inputs(index: u64, spectrum: ModeSpectrum, coupling: CouplingMatrix) -> Result<Realization, Error> {
    let damping = build_damping(&coupling);
    let dynamics = build_dynamical(&spectrum, &damping)?;
    Ok(Realization {
        index,
        spectrum,
        coupling,
        damping,
        dynamics,
    })
}

/// Full laser pipeline for one realization.
#[derive(Debug, Clone)]
pub struct LaserOutcome {
    pub medium: GainMedium,
    pub threshold: f64,
    pub solution: LasingSolution,
    pub fluctuation: FluctuationMatrix,
    pub zero_mode: ZeroMode,
    pub report: LinewidthReport,
    pub spectrum: CorrelatorSpectrum,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<LorentzianFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LasingJson {
    pub mode_index: usize,
    pub omega_bar: f64,
    pub gain_star: f64,
    pub intensity: f64,
    pub petermann: f64,
    pub amplitude: Vec<(f64, f64)>,
    pub threshold_pump: f64,
    pub pump_strength: f64,
    pub warnings: Vec<crate::laser::LaserWarning>,
}

impl LaserOutcome {
    pub fn lasing_json(&self) -> LasingJson {
        LasingJson {
            mode_index: self.solution.mode_index,
            omega_bar: self.solution.omega_bar,
            gain_star: self.solution.gain_star,
            intensity: self.solution.intensity,
            petermann: self.solution.petermann,
            amplitude: self.solution.amplitude.iter().map(|z| (z.re, z.im)).collect(),
            threshold_pump: self.threshold,
            pump_strength: self.medium.pump_strength,
            warnings: self.solution.warnings.clone(),
        }
    }
}

pub fn laser_pipeline(config: &RunConfig, realization: &Realization) -> Result<LaserOutcome, Error> {
    let res = realization.resonances()?;
    let threshold = lasing_threshold(&res, &config.medium);
    let medium = match config.pump_over_threshold {
        Some(r) => config.medium.with_pump(r * threshold),
        None => config.medium,
    };
    let solution = steady_state(&res, &medium)?;
    let fluctuation = build_fluctuation_matrix(&solution, &realization.dynamics, &medium)?;
    let zero_mode = zero_mode(&fluctuation, &solution)?;
    let mut report = linewidth(&solution, config.fluctuations.baseline)?;
    let noise = FluctuationNoise::field_only(noise_from_coupling(&realization.damping, config.fluctuations.ordering));
    let spectrum = correlator_spectrum(&fluctuation, &solution, &noise)?;
    report.zero_mode_weight = Some(spectrum.zero_mode_weight);

    let width = if spectrum.zero_mode_width > 0.0 {
        spectrum.zero_mode_width
    } else {
        report.linewidth
    };
    let grid = symmetric_grid(config.fluctuations.half_span * width, config.fluctuations.grid_points);
    let values = spectrum.on_grid(&grid);
    let fit = fit_lorentzian(&grid, &values).ok();
    Ok(LaserOutcome {
        medium,
        threshold,
        solution,
        fluctuation,
        zero_mode,
        report,
        spectrum,
        grid,
        values,
        fit,
    })
}
