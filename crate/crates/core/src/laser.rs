//! Single-line laser above threshold.
//!
//! With spatially uniform saturable gain `G(I) = G₀ / (1 + I/I_sat)` the
//! steady state in the frame rotating at `ω̄` solves `M(ω̄, G) ā = 0`, where
//! `M = -i(Ω - ω̄) - Γ + G = A + iω̄ + G`. The narrowest resonance `k*`
//! lases: `G* = γ_{k*}`, `ω̄ = ω_{k*}`, `ā ∝ r_{k*}`.

use serde::{Deserialize, Serialize};

use crate::effective::{petermann_factor, DynamicalMatrix, ResonanceSet};
use crate::error::{Error, Result};
use crate::linalg::{self, inner, vector_norm, CMatrix, CVector, C64};

/// Required ratio between atomic and field decay rates before a warning.
pub const DEFAULT_ADIABATIC_FACTOR: f64 = 10.0;

/// Relative (to `Δω`) width gap below which the lasing mode is ambiguous.
pub const DEGENERACY_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMedium {
    /// Dimensionless pump `S`.
    pub pump_strength: f64,
    /// Number of two-level atoms `𝒩`.
    pub atom_number: f64,
    /// Atom-field coupling `g`.
    pub coupling: f64,
    /// Polarization decay `γ⊥`.
    pub gamma_perp: f64,
    /// Inversion decay `γ∥`.
    pub gamma_par: f64,
}

impl GainMedium {
    pub fn new(
        pump_strength: f64,
        atom_number: f64,
        coupling: f64,
        gamma_perp: f64,
        gamma_par: f64,
    ) -> Result<Self> {
        let m = Self {
            pump_strength,
            atom_number,
            coupling,
            gamma_perp,
            gamma_par,
        };
        let problems = m.violations();
        if problems.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }

    /// Every violated precondition, for batch validation.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.pump_strength >= 0.0 && self.pump_strength.is_finite()) {
            v.push(format!("pump_strength must be >= 0, got {}", self.pump_strength));
        }
        if !(self.atom_number >= 1.0 && self.atom_number.is_finite()) {
            v.push(format!("atom_number must be >= 1, got {}", self.atom_number));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            v.push(format!("coupling must be > 0, got {}", self.coupling));
        }
        if !(self.gamma_perp > 0.0 && self.gamma_perp.is_finite()) {
            v.push(format!("gamma_perp must be > 0, got {}", self.gamma_perp));
        }
        if !(self.gamma_par > 0.0 && self.gamma_par.is_finite()) {
            v.push(format!("gamma_par must be > 0, got {}", self.gamma_par));
        }
        v
    }

    pub fn with_pump(&self, pump_strength: f64) -> Self {
        Self {
            pump_strength,
            ..*self
        }
    }

    /// `G₀ = 2 S 𝒩 g² / γ⊥`
    pub fn unsaturated_gain(&self) -> f64 {
        2.0 * self.pump_strength * self.atom_number * self.coupling * self.coupling / self.gamma_perp
    }

    /// `I_sat = γ∥ γ⊥ / (4 g²)`
    pub fn saturation_intensity(&self) -> f64 {
        self.gamma_par * self.gamma_perp / (4.0 * self.coupling * self.coupling)
    }
}

/// `G(I) = G₀ / (1 + I / I_sat)`
pub fn gain(medium: &GainMedium, intensity: f64) -> Result<f64> {
    if intensity < 0.0 || intensity.is_nan() {
        return Err(Error::NegativeIntensity(intensity));
    }
    Ok(medium.unsaturated_gain() / (1.0 + intensity / medium.saturation_intensity()))
}

/// `∂G/∂I = -G² / (G₀ I_sat)`
pub fn gain_derivative(medium: &GainMedium, intensity: f64) -> Result<f64> {
    let g = gain(medium, intensity)?;
    Ok(-g * g / (medium.unsaturated_gain() * medium.saturation_intensity()))
}

/// Pump at which the unsaturated gain equals the narrowest width:
/// `S_th = γ_min γ⊥ / (2 𝒩 g²)`. Only `S` of `medium` is ignored.
pub fn lasing_threshold(resonances: &ResonanceSet, medium: &GainMedium) -> f64 {
    let gamma_min = resonances.gamma(resonances.narrowest());
    gamma_min * medium.gamma_perp / (2.0 * medium.atom_number * medium.coupling * medium.coupling)
}

/// `M(ω̄, G) = A + iω̄ + G`
pub fn steady_matrix(dynamics: &DynamicalMatrix, omega_bar: f64, gain: f64) -> CMatrix {
    let mut m = dynamics.matrix().clone();
    for i in 0..m.nrows() {
        m[(i, i)] += C64::new(gain, omega_bar);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LaserWarning {
    /// Atomic rates do not exceed the field decay rates by the required
    /// factor, so adiabatic elimination of the atoms is questionable.
    NonAdiabatic {
        slowest_atomic_rate: f64,
        fastest_field_rate: f64,
    },
}

#[derive(Debug, Clone)]
pub struct LasingSolution {
    pub mode_index: usize,
    pub omega_bar: f64,
    pub gain_star: f64,
    pub intensity: f64,
    /// `ā = √I r̂`
    pub amplitude: CVector,
    /// Unit-norm `r̂`; its largest-modulus component is real positive.
    pub right_vector: CVector,
    /// `l` with `l† r̂ = 1`.
    pub left_vector: CVector,
    pub petermann: f64,
    pub unsaturated_gain: f64,
    pub saturation_intensity: f64,
    pub warnings: Vec<LaserWarning>,
}

impl LasingSolution {
    /// `‖M ā‖ / (‖M‖ ‖ā‖)`
    pub fn residual(&self, dynamics: &DynamicalMatrix) -> f64 {
        let m = steady_matrix(dynamics, self.omega_bar, self.gain_star);
        let norm = linalg::norm1(&m) * vector_norm(&self.amplitude);
        if norm == 0.0 {
            return 0.0;
        }
        vector_norm(&(&m * &self.amplitude)) / norm
    }
}

/// Applies the phase convention: first component of largest modulus real
/// positive.
pub fn fix_phase(v: &CVector) -> CVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max <= 0.0 {
        return v.clone();
    }
    // ties within roundoff go to the lower index
    let best = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-10)).unwrap_or(0);
    let best_mod = v[best].norm();
    let phase = v[best].conj() / best_mod;
    let mut out = v * phase;
    out[best] = C64::new(best_mod, 0.0);
    out
}

/// Steady state of the narrowest resonance.
pub fn steady_state(resonances: &ResonanceSet, medium: &GainMedium) -> Result<LasingSolution> {
    let k = resonances.narrowest();
    let gamma_min = resonances.gamma(k);
    let g0 = medium.unsaturated_gain();
    if g0 <= gamma_min {
        return Err(Error::BelowThreshold {
            unsaturated_gain: g0,
            gamma_min,
        });
    }
    if resonances.len() > 1 {
        let mut widths = resonances.widths();
        widths.sort_by(f64::total_cmp);
        let gap = widths[1] - widths[0];
        if gap < DEGENERACY_GAP * resonances.mean_spacing() {
            return Err(Error::NearDegenerateLasingMode { gap });
        }
    }

    let i_sat = medium.saturation_intensity();
    let intensity = i_sat * (g0 / gamma_min - 1.0);
    let r = resonances.right(k);
    let r_hat = fix_phase(&(&r / C64::new(vector_norm(&r), 0.0)));
    let l = resonances.left(k);
    let overlap = inner(&l, &r_hat);
    let left_vector = &l / overlap.conj();
    let petermann = petermann_factor(&left_vector, &r_hat)?.value;
    let amplitude = &r_hat * C64::new(intensity.sqrt(), 0.0);

    let mut warnings = Vec::new();
    let slowest_atomic_rate = medium.gamma_perp.min(medium.gamma_par);
    let fastest_field_rate = resonances.widths().into_iter().fold(0.0, f64::max);
    if slowest_atomic_rate < DEFAULT_ADIABATIC_FACTOR * fastest_field_rate {
        warnings.push(LaserWarning::NonAdiabatic {
            slowest_atomic_rate,
            fastest_field_rate,
        });
    }

    Ok(LasingSolution {
        mode_index: k,
        omega_bar: resonances.omega(k),
        gain_star: gamma_min,
        intensity,
        amplitude,
        right_vector: r_hat,
        left_vector,
        petermann,
        unsaturated_gain: g0,
        saturation_intensity: i_sat,
        warnings,
    })
}
