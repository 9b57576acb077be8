use std::path::PathBuf;

use serde::Serialize;

use crate::ensembles::{spacing_statistics, KsTest, CENTRAL_FRACTION};
use crate::error::Error;
use crate::langevin::{lyapunov_residual, sample_covariance, propagate, steady_covariance, thermal_noise, Propagator, SamplingPlan};
use crate::linalg::{to_complex, CVector};
use crate::seed::{Purpose, Seed};

use super::output::{ensure_dir, format_float, matrix_json, write_json, write_manifest, Table};
use super::{laser_pipeline, realize, Format, HarnessError, RunConfig};

#[derive(Debug, Clone, Serialize)]
struct SpectrumSummary {
    n_modes: usize,
    n_channels: usize,
    overlap_ratio: f64,
    width_sum: f64,
    coupling_trace: f64,
    condition: f64,
    rotating_wave_bandwidth: f64,
    wigner: Option<KsTest>,
    poisson: Option<KsTest>,
}

/// Resonances and level spacings of realization 0.
pub fn run_spectrum(config: &RunConfig) -> Result<Vec<PathBuf>, HarnessError> {
    config.validate()?;
    let real = realize(config, 0)?;
    let res = real.resonances()?;
    let spacings = match spacing_statistics(&real.spectrum, CENTRAL_FRACTION) {
        Ok(s) => Some(s),
        Err(Error::TooFewModes { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let dir = &config.outputs.directory;
    ensure_dir(dir)?;
    let mut files = Vec::new();
    if config.outputs.wants(Format::Csv) {
        let mut t = Table::new(&["mode_index", "omega_k", "gamma_k", "K_k"]);
        for k in 0..res.len() {
            t.push(vec![
                k.to_string(),
                format_float(res.omega(k)),
                format_float(res.gamma(k)),
                format_float(res.petermann()[k]),
            ]);
        }
        files.push(dir.join("resonances.csv"));
        t.write(files.last().unwrap())?;

        let mut t = Table::new(&["index", "spacing"]);
        for (i, s) in spacings.iter().flat_map(|s| s.spacings.iter()).enumerate() {
            t.push(vec![i.to_string(), format_float(*s)]);
        }
        files.push(dir.join("spacings.csv"));
        t.write(files.last().unwrap())?;
    }
    if config.outputs.wants(Format::Json) {
        let summary = SpectrumSummary {
            n_modes: config.n_modes,
            n_channels: config.n_channels,
            overlap_ratio: res.overlap_ratio(),
            width_sum: res.widths().iter().sum(),
            coupling_trace: real.damping.trace(),
            condition: res.condition(),
            rotating_wave_bandwidth: real.spectrum.relative_bandwidth(),
            wigner: spacings.as_ref().map(|s| s.wigner),
            poisson: spacings.as_ref().map(|s| s.poisson),
        };
        files.push(dir.join("spectrum.json"));
        write_json(files.last().unwrap(), &summary)?;
    }
    write_manifest(dir, "spectrum", config, config.ensemble.master_seed)?;
    Ok(files)
}

/// Monte-Carlo and Lyapunov stationary covariance of realization 0.
pub fn run_dynamics(config: &RunConfig) -> Result<Vec<PathBuf>, HarnessError> {
    config.validate()?;
    let d = &config.dynamics;
    let real = realize(config, 0)?;
    let noise = thermal_noise(&real.damping, d.ordering, d.thermal_occupation)?;
    let propagator = Propagator::new(&real.dynamics, &noise, d.dt)?;
    let n = config.n_modes;
    let a0 = CVector::zeros(n);
    let master = config.ensemble.master_seed;
    let plan = SamplingPlan {
        burn_in: d.burn_in,
        n_samples: d.n_steps,
        n_batches: d.n_batches,
    };
    let estimate = sample_covariance(&propagator, &a0, &plan, Seed::substream(master, 0, Purpose::Dynamics))?;
    let lyapunov = steady_covariance(&real.dynamics, &noise)?;
    let residual = lyapunov_residual(real.dynamics.matrix(), &lyapunov, &to_complex(noise.covariance()));
    let trajectory = if d.trajectory_stride > 0 {
        Some(propagate(
            &real.dynamics,
            &noise,
            &a0,
            d.dt,
            d.n_steps,
            Seed::substream(master, 0, Purpose::Spare),
        )?)
    } else {
        None
    };

    let dir = &config.outputs.directory;
    ensure_dir(dir)?;
    let mut files = Vec::new();
    let covariance = serde_json::json!({
        "dt": d.dt,
        "n_samples": estimate.n_samples,
        "ordering": d.ordering,
        "thermal_occupation": d.thermal_occupation,
        "monte_carlo": matrix_json(&estimate.matrix),
        "standard_error": estimate.standard_error,
        "entry_errors": (0..n)
            .map(|i| (0..n).map(|j| estimate.entry_errors[(i, j)]).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "lyapunov": matrix_json(&lyapunov),
        "lyapunov_residual": residual,
    });
    files.push(dir.join("covariance.json"));
    write_json(files.last().unwrap(), &covariance)?;

    if let (Some(traj), true) = (&trajectory, config.outputs.wants(Format::Csv)) {
        let mut header = vec!["t".to_string()];
        for i in 0..n {
            header.push(format!("re_{i}"));
            header.push(format!("im_{i}"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = Table::new(&header);
        for (time, a) in traj.times.iter().zip(&traj.amplitudes).step_by(d.trajectory_stride) {
            let mut row = vec![format_float(*time)];
            for z in a.iter() {
                row.push(format_float(z.re));
                row.push(format_float(z.im));
            }
            t.push(row);
        }
        files.push(dir.join("trajectory.csv"));
        t.write(files.last().unwrap())?;
    }
    write_manifest(dir, "dynamics", config, master)?;
    Ok(files)
}

/// Steady state, linewidth and correlator spectrum of realization 0.
pub fn run_laser(config: &RunConfig) -> Result<Vec<PathBuf>, HarnessError> {
    config.validate()?;
    let real = realize(config, 0)?;
    let out = laser_pipeline(config, &real)?;

    let dir = &config.outputs.directory;
    ensure_dir(dir)?;
    let mut files = Vec::new();
    if config.outputs.wants(Format::Json) {
        files.push(dir.join("lasing.json"));
        write_json(files.last().unwrap(), &out.lasing_json())?;
        files.push(dir.join("linewidth.json"));
        write_json(files.last().unwrap(), &out.report)?;
        let diagnostics = serde_json::json!({
            "zero_mode_right_residual": out.zero_mode.right_residual,
            "zero_mode_left_residual": out.zero_mode.left_residual,
            "zero_mode_eigenvalue": (out.zero_mode.eigenvalue.re, out.zero_mode.eigenvalue.im),
            "max_nonzero_real": out.zero_mode.max_nonzero_real,
            "stable": out.zero_mode.stable,
            "dgdi": out.fluctuation.dgdi(),
            "zero_mode_width": out.spectrum.zero_mode_width,
            "lorentzian_fit": out.fit,
        });
        files.push(dir.join("fluctuations.json"));
        write_json(files.last().unwrap(), &diagnostics)?;
    }
    if config.outputs.wants(Format::Csv) {
        let mut t = Table::new(&["omega", "S_real"]);
        for (w, s) in out.grid.iter().zip(&out.values) {
            t.push(vec![format_float(*w), format_float(*s)]);
        }
        files.push(dir.join("spectrum.csv"));
        t.write(files.last().unwrap())?;
    }
    write_manifest(dir, "laser", config, config.ensemble.master_seed)?;
    Ok(files)
}
