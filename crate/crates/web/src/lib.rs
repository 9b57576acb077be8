//! Browser bindings: three JSON-returning entry points driven by
//! `www/index.html`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use chaotic_cavity::ensembles::{poisson_cdf, sample_goe_spectrum, spacing_statistics, wigner_cdf, SpacingStatistics, CENTRAL_FRACTION};
use chaotic_cavity::harness::{laser_pipeline, realize, RunConfig};
use chaotic_cavity::seed::{Purpose, Seed};

pub const MAX_MODES: usize = 400;

fn config(n_modes: usize, n_channels: usize, x: f64, seed: u64) -> Result<RunConfig, String> {
    let mut c = RunConfig::example();
    c.n_modes = n_modes;
    c.n_channels = n_channels;
    c.coupling_x = vec![x];
    c.carrier = 10.0 * n_modes as f64 + 100.0;
    c.ensemble.master_seed = seed;
    if n_modes > MAX_MODES {
        return Err(format!("at most {MAX_MODES} modes in the browser"));
    }
    let v = c.violations();
    if v.is_empty() {
        Ok(c)
    } else {
        Err(v.join("; "))
    }
}

#[derive(Serialize)]
pub struct ResonancesView {
    /// `ω_k - ω₀`
    pub detuning: Vec<f64>,
    pub width: Vec<f64>,
    pub petermann: Vec<f64>,
    pub overlap_ratio: f64,
    pub narrowest: usize,
}

pub fn resonances(n_modes: usize, n_channels: usize, x: f64, seed: u64) -> Result<ResonancesView, String> {
    let c = config(n_modes, n_channels, x, seed)?;
    let real = realize(&c, 0).map_err(|e| e.to_string())?;
    let res = real.resonances().map_err(|e| e.to_string())?;
    Ok(ResonancesView {
        detuning: res.frequencies().iter().map(|w| w - c.carrier).collect(),
        width: res.widths(),
        petermann: res.petermann().to_vec(),
        overlap_ratio: res.overlap_ratio(),
        narrowest: res.narrowest(),
    })
}

#[derive(Serialize)]
pub struct LaserView {
    pub mode_index: usize,
    pub detuning: f64,
    pub gain_star: f64,
    pub intensity: f64,
    pub petermann: f64,
    pub schawlow_townes: f64,
    pub linewidth: f64,
    pub zero_mode_weight: f64,
    /// Offsets from `ω̄` in units of the linewidth.
    pub grid: Vec<f64>,
    /// Spectrum normalized to its peak.
    pub spectrum: Vec<f64>,
    pub fitted_half_width: Option<f64>,
}

pub fn laser(n_modes: usize, n_channels: usize, x: f64, seed: u64, pump_ratio: f64) -> Result<LaserView, String> {
    let mut c = config(n_modes, n_channels, x, seed)?;
    if !(pump_ratio > 1.0 && pump_ratio.is_finite()) {
        return Err(format!("pump ratio must be > 1, got {pump_ratio}"));
    }
    c.pump_over_threshold = Some(pump_ratio);
    c.fluctuations.grid_points = 301;
    let real = realize(&c, 0).map_err(|e| e.to_string())?;
    let out = laser_pipeline(&c, &real).map_err(|e| e.to_string())?;
    let lw = out.report.linewidth;
    let peak = out.values.iter().copied().fold(0.0, f64::max);
    Ok(LaserView {
        mode_index: out.solution.mode_index,
        detuning: out.solution.omega_bar - c.carrier,
        gain_star: out.solution.gain_star,
        intensity: out.solution.intensity,
        petermann: out.solution.petermann,
        schawlow_townes: out.report.schawlow_townes,
        linewidth: lw,
        zero_mode_weight: out.spectrum.zero_mode_weight,
        grid: out.grid.iter().map(|w| w / lw).collect(),
        spectrum: out.values.iter().map(|s| if peak > 0.0 { s / peak } else { 0.0 }).collect(),
        fitted_half_width: out.fit.map(|f| f.half_width),
    })
}

#[derive(Serialize)]
pub struct SpacingView {
    pub bin_edges: Vec<f64>,
    /// Empirical density per bin.
    pub density: Vec<f64>,
    /// Bin-averaged reference densities.
    pub wigner: Vec<f64>,
    pub poisson: Vec<f64>,
    pub n_spacings: usize,
    pub wigner_p: f64,
    pub poisson_p: f64,
}

pub fn spacings(n_modes: usize, realizations: usize, seed: u64, bins: usize) -> Result<SpacingView, String> {
    if !(4..=MAX_MODES).contains(&n_modes) {
        return Err(format!("need 4..={MAX_MODES} modes"));
    }
    if !(1..=500).contains(&realizations) || !(2..=200).contains(&bins) {
        return Err("realizations must be 1..=500 and bins 2..=200".into());
    }
    let mut pooled = Vec::new();
    for r in 0..realizations as u64 {
        let s = sample_goe_spectrum(n_modes, 1.0, 10.0 * n_modes as f64 + 100.0, Seed::substream(seed, r, Purpose::Spectrum))
            .map_err(|e| e.to_string())?;
        pooled.extend(spacing_statistics(&s, CENTRAL_FRACTION).map_err(|e| e.to_string())?.spacings);
    }
    let stats = SpacingStatistics::from_spacings(pooled).map_err(|e| e.to_string())?;
    let max = 4.0;
    let width = max / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for s in &stats.spacings {
        let b = (s / width) as usize;
        if b < bins {
            counts[b] += 1;
        }
    }
    let total = stats.spacings.len() as f64;
    let per_bin = |cdf: fn(f64) -> f64| -> Vec<f64> {
        bin_edges.windows(2).map(|e| (cdf(e[1]) - cdf(e[0])) / width).collect()
    };
    Ok(SpacingView {
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        wigner: per_bin(wigner_cdf),
        poisson: per_bin(poisson_cdf),
        bin_edges,
        n_spacings: stats.spacings.len(),
        wigner_p: stats.wigner.p_value,
        poisson_p: stats.poisson.p_value,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())))
}

#[wasm_bindgen(js_name = resonances)]
pub fn resonances_js(n_modes: usize, n_channels: usize, x: f64, seed: u64) -> Result<String, JsError> {
    to_json(resonances(n_modes, n_channels, x, seed))
}

#[wasm_bindgen(js_name = laser)]
pub fn laser_js(n_modes: usize, n_channels: usize, x: f64, seed: u64, pump_ratio: f64) -> Result<String, JsError> {
    to_json(laser(n_modes, n_channels, x, seed, pump_ratio))
}

#[wasm_bindgen(js_name = spacings)]
pub fn spacings_js(n_modes: usize, realizations: usize, seed: u64, bins: usize) -> Result<String, JsError> {
    to_json(spacings(n_modes, realizations, seed, bins))
}
