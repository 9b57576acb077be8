//! Linearized fluctuations about the lasing steady state.
//!
//! For `x = (δa, δa*)` the linearized equation is `ẋ = ℒ x + noise` with
//!
//! ```text
//! ℒ = [[M, 0], [0, M*]] + G' [[ā ā†, ā āᵀ], [ā* ā†, ā* āᵀ]]
//! ```
//!
//! where `M = M(ω̄, G*)` and `G' = ∂G/∂I` at the steady state. `ℒ` has the
//! exact zero mode `(ā, -ā*)` generated by the global phase.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::effective::DynamicalMatrix;
use crate::error::{Error, Result};
use crate::langevin::NoiseModel;
use crate::laser::{gain_derivative, steady_matrix, GainMedium, LasingSolution};
use crate::linalg::{self, inner, to_complex, vector_norm, CMatrix, CVector, C64};
use crate::seed::Seed;

/// Relative size above which the smallest eigenvalue of `ℒ` does not count
/// as zero.
pub const ZERO_MODE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FluctuationMatrix {
    matrix: CMatrix,
    dgdi: f64,
}

impl FluctuationMatrix {
    /// The `2N × 2N` matrix `ℒ`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `∂G/∂I = -G*² / (G₀ I_sat)`
    pub fn dgdi(&self) -> f64 {
        self.dgdi
    }

    /// Number of field modes `N`.
    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn norm(&self) -> f64 {
        linalg::norm1(&self.matrix)
    }

    /// `max |ℒ - Σ ℒ* Σ|`, zero by construction.
    pub fn block_asymmetry(&self) -> f64 {
        let n = self.n_modes();
        let swap = |i: usize| if i < n { i + n } else { i - n };
        let mut worst: f64 = 0.0;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let d = self.matrix[(i, j)] - self.matrix[(swap(i), swap(j))].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Assembles `ℒ` at the steady state `solution`.
pub fn build_fluctuation_matrix(
    solution: &LasingSolution,
    dynamics: &DynamicalMatrix,
    medium: &GainMedium,
) -> Result<FluctuationMatrix> {
    let n = dynamics.n();
    if solution.amplitude.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: solution.amplitude.len(),
        });
    }
    if solution.intensity <= 0.0 {
        return Err(Error::ZeroIntensity);
    }
    let dgdi = gain_derivative(medium, solution.intensity)?;
    let m = steady_matrix(dynamics, solution.omega_bar, solution.gain_star);
    let a = &solution.amplitude;
    let g = C64::new(dgdi, 0.0);

    let mut l = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = m[(i, j)] + g * a[i] * a[j].conj();
            l[(i, j + n)] = g * a[i] * a[j];
            l[(i + n, j)] = g * a[i].conj() * a[j].conj();
            l[(i + n, j + n)] = m[(i, j)].conj() + g * a[i].conj() * a[j];
        }
    }
    Ok(FluctuationMatrix { matrix: l, dgdi })
}

/// `(ā, -ā*) / √(2I)`
pub fn zero_mode_vector(solution: &LasingSolution) -> CVector {
    let n = solution.amplitude.len();
    let scale = (2.0 * solution.intensity).sqrt();
    CVector::from_fn(2 * n, |i, _| {
        if i < n {
            solution.amplitude[i] / scale
        } else {
            -solution.amplitude[i - n].conj() / scale
        }
    })
}

#[derive(Debug, Clone)]
pub struct ZeroMode {
    /// `v₀ = (ā, -ā*) / ‖·‖`
    pub right: CVector,
    /// Left null vector with `u₀† v₀ = 1`.
    pub left: CVector,
    /// `‖ℒ v₀‖ / ‖ℒ‖`
    pub right_residual: f64,
    /// `‖u₀† ℒ‖ / (‖ℒ‖ ‖u₀‖)`
    pub left_residual: f64,
    /// Eigenvalue of `ℒ` closest to zero.
    pub eigenvalue: C64,
    /// Largest real part among the remaining eigenvalues.
    pub max_nonzero_real: f64,
    /// `max_nonzero_real <= 1e-8 ‖ℒ‖`
    pub stable: bool,
}

/// Full eigensystem of `ℒ` with bi-orthonormal left vectors; the zero mode
/// is moved to index 0.
#[derive(Debug, Clone)]
struct Eigensystem {
    values: Vec<C64>,
    right: CMatrix,
    left: CMatrix,
}

fn eigensystem(fluct: &FluctuationMatrix) -> Result<Eigensystem> {
    let l = fluct.matrix();
    let eig = linalg::eigen(l, true)?;
    let mut right = eig.vectors.expect("vectors requested");
    let mut values = eig.values;

    let zero = (0..values.len())
        .min_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()))
        .unwrap_or(0);
    let scale = fluct.norm().max(f64::MIN_POSITIVE);
    if values[zero].norm() > ZERO_MODE_TOL * scale {
        return Err(Error::ZeroModeMissing {
            smallest: values[zero].norm(),
        });
    }
    values.swap(0, zero);
    right.swap_columns(0, zero);

    let inverse = right.clone().try_inverse().ok_or(Error::NearDefective {
        condition: f64::INFINITY,
        first: values[0],
        second: values[0],
    })?;
    let condition = linalg::frobenius(&right) * linalg::frobenius(&inverse);
    if !condition.is_finite() || condition > 1e10 {
        return Err(Error::NearDefective {
            condition,
            first: values[0],
            second: values.get(1).copied().unwrap_or(values[0]),
        });
    }
    Ok(Eigensystem {
        values,
        right,
        left: inverse.adjoint(),
    })
}

/// Locates and checks the phase zero mode of `ℒ`.
pub fn zero_mode(fluct: &FluctuationMatrix, solution: &LasingSolution) -> Result<ZeroMode> {
    let sys = eigensystem(fluct)?;
    let l = fluct.matrix();
    let scale = fluct.norm().max(f64::MIN_POSITIVE);

    let right = zero_mode_vector(solution);
    let right_residual = vector_norm(&(l * &right)) / scale;

    let mut left = sys.left.column(0).into_owned();
    let overlap = inner(&left, &right);
    if overlap.norm() == 0.0 {
        return Err(Error::DegenerateVectors { overlap: 0.0 });
    }
    left /= overlap.conj();
    let left_residual = vector_norm(&(l.adjoint() * &left)) / (scale * vector_norm(&left));

    let max_nonzero_real = sys.values[1..]
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ZeroMode {
        right,
        left,
        right_residual,
        left_residual,
        eigenvalue: sys.values[0],
        max_nonzero_real,
        stable: sys.values.len() < 2 || max_nonzero_real <= 1e-8 * scale,
    })
}

/// Reference linewidth `δω_ST`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Baseline {
    /// `δω_ST = γ_{k*} / (2I)`
    HalfWidthOverIntensity,
    UserValue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinewidthReport {
    pub schawlow_townes: f64,
    pub petermann: f64,
    /// `δω = K δω_ST`
    pub linewidth: f64,
    /// Filled in from [`correlator_spectrum`] when available.
    pub zero_mode_weight: Option<f64>,
}

pub fn linewidth(solution: &LasingSolution, baseline: Baseline) -> Result<LinewidthReport> {
    if !(solution.intensity > 0.0) {
        return Err(Error::ZeroIntensity);
    }
    let schawlow_townes = match baseline {
        Baseline::HalfWidthOverIntensity => solution.gain_star / (2.0 * solution.intensity),
        Baseline::UserValue(v) => {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "Schawlow-Townes baseline must be > 0, got {v}"
                )));
            }
            v
        }
    };
    Ok(LinewidthReport {
        schawlow_townes,
        petermann: solution.petermann,
        linewidth: solution.petermann * schawlow_townes,
        zero_mode_weight: None,
    })
}

/// Noise driving `x = (δa, δa*)`.
#[derive(Debug, Clone)]
pub struct FluctuationNoise {
    /// Field noise `D` for `δa`; enters as `diag(D, D)`.
    pub field: NoiseModel,
    /// Optional additive `2N × 2N` atomic-reservoir covariance.
    pub atomic: Option<CMatrix>,
}

impl FluctuationNoise {
    pub fn field_only(field: NoiseModel) -> Self {
        Self { field, atomic: None }
    }

    pub fn doubled(&self) -> Result<CMatrix> {
        let n = self.field.n();
        let d = to_complex(self.field.covariance());
        let mut out = CMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&d);
        out.view_mut((n, n), (n, n)).copy_from(&d);
        if let Some(atomic) = &self.atomic {
            if atomic.nrows() != 2 * n || atomic.ncols() != 2 * n {
                return Err(Error::DimensionMismatch {
                    expected: 2 * n,
                    found: atomic.nrows(),
                });
            }
            let herm = linalg::hermitian_part(atomic);
            if linalg::frobenius(&(atomic - &herm)) > 1e-12 * linalg::frobenius(atomic).max(1.0) {
                return Err(Error::InvalidParameter("atomic noise covariance must be Hermitian".into()));
            }
            let min_eig = linalg::eigen(&herm, false)?
                .values
                .iter()
                .map(|v| v.re)
                .fold(f64::INFINITY, f64::min);
            if min_eig < -1e-12 * linalg::frobenius(&herm).max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "atomic noise covariance must be positive semidefinite (min eigenvalue {min_eig:.3e})"
                )));
            }
            out += herm;
        }
        Ok(out)
    }
}

/// `S(ω) = 2 Re Σ_k w_k / (-μ_k - iω)` for `ω` measured from `ω̄`.
///
/// The zero eigenvalue is replaced by `-D_φ`, the phase-diffusion rate
/// obtained from projecting the noise onto the zero mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelatorSpectrum {
    /// Regularized eigenvalues of `ℒ`; index 0 is the zero mode.
    pub poles: Vec<(f64, f64)>,
    pub weights: Vec<(f64, f64)>,
    /// Half-width `D_φ` of the zero-mode Lorentzian.
    pub zero_mode_width: f64,
    /// `|w₀| / Σ|w_k|`
    pub zero_mode_weight: f64,
}

impl CorrelatorSpectrum {
    fn term(pole: (f64, f64), weight: (f64, f64), omega: f64) -> f64 {
        let denom = C64::new(-pole.0, -pole.1 - omega);
        if denom.norm() == 0.0 {
            return 0.0;
        }
        2.0 * (C64::new(weight.0, weight.1) / denom).re
    }

    pub fn evaluate(&self, omega: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| Self::term(p, w, omega))
            .sum()
    }

    /// Zero-eigenvalue term alone: a Lorentzian of half-width `D_φ`.
    pub fn evaluate_zero_mode(&self, omega: f64) -> f64 {
        match (self.poles.first(), self.weights.first()) {
            (Some(&p), Some(&w)) => Self::term(p, w, omega),
            _ => 0.0,
        }
    }

    pub fn on_grid(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&w| self.evaluate(w)).collect()
    }
}

/// Spectrum of the stationary correlator `Σ_λ ⟨δa_λ†(t) δa_λ(0)⟩`.
pub fn correlator_spectrum(
    fluct: &FluctuationMatrix,
    solution: &LasingSolution,
    noise: &FluctuationNoise,
) -> Result<CorrelatorSpectrum> {
    let n = fluct.n_modes();
    if noise.field.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: noise.field.n(),
        });
    }
    let d2 = noise.doubled()?;
    let sys = eigensystem(fluct)?;
    let dim = 2 * n;

    // pin the zero pair to v₀ = (ā, -ā*)/√(2I), u₀† v₀ = 1
    let mut right = sys.right.clone();
    let mut left = sys.left.clone();
    let v0 = zero_mode_vector(solution);
    let u0 = left.column(0).into_owned();
    let overlap = inner(&u0, &v0);
    if overlap.norm() == 0.0 {
        return Err(Error::DegenerateVectors { overlap: 0.0 });
    }
    right.set_column(0, &v0);
    left.set_column(0, &(u0 / overlap.conj()));

    let projected = left.adjoint() * &d2 * &left;
    // D_φ = u₀† D u₀ / (4I)
    let diffusion = projected[(0, 0)].re / (4.0 * solution.intensity);
    let zero_mode_width = diffusion.max(0.0);

    let mut mu = sys.values.clone();
    mu[0] = C64::new(-zero_mode_width, 0.0);

    let mut weights = vec![C64::new(0.0, 0.0); dim];
    if zero_mode_width > 0.0 {
        // equal-time covariance C₀ = Σ_jk v_j X_jk v_k†
        let x = CMatrix::from_fn(dim, dim, |j, k| projected[(j, k)] / (-mu[j] - mu[k].conj()));
        let c0 = &right * x * right.adjoint();
        let projected_c0 = left.adjoint() * c0;
        // w_k = tr_B(v_k u_k† C₀)
        for (k, w) in weights.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for i in n..dim {
                s += right[(i, k)] * projected_c0[(k, i)];
            }
            *w = s;
        }
    }
    let total: f64 = weights.iter().map(|w| w.norm()).sum();
    let zero_mode_weight = if total > 0.0 { weights[0].norm() / total } else { 0.0 };

    Ok(CorrelatorSpectrum {
        poles: mu.iter().map(|z| (z.re, z.im)).collect(),
        weights: weights.iter().map(|z| (z.re, z.im)).collect(),
        zero_mode_width,
        zero_mode_weight,
    })
}

/// `n` equally spaced points on `[-half_span, half_span]`.
pub fn symmetric_grid(half_span: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| -half_span + 2.0 * half_span * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub center: f64,
    pub half_width: f64,
    pub peak: f64,
}

/// Least-squares fit of `peak / (1 + ((ω - center)/half_width)²)`.
///
/// `1/S` is quadratic in `ω`; the quadratic is fitted with weights `S⁴`
/// (so that residuals are measured in `S`), reweighting with the current
/// model until the parameters settle.
pub fn fit_lorentzian(omega: &[f64], values: &[f64]) -> Result<LorentzianFit> {
    if omega.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: omega.len(),
            found: values.len(),
        });
    }
    let pts: Vec<(f64, f64)> = omega
        .iter()
        .zip(values)
        .filter(|(_, s)| **s > 0.0 && s.is_finite())
        .map(|(&w, &s)| (w, s))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 positive samples to fit a Lorentzian".into()));
    }
    let shift = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let span = pts.iter().map(|p| (p.0 - shift).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut model: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut fit = LorentzianFit {
        center: 0.0,
        half_width: 0.0,
        peak: 0.0,
    };
    for _ in 0..20 {
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut atb = nalgebra::Vector3::<f64>::zeros();
        for ((w, s), m) in pts.iter().zip(&model) {
            let u = (w - shift) / span;
            let row = nalgebra::Vector3::new(1.0, u, u * u);
            let weight = m.powi(4);
            ata += row * row.transpose() * weight;
            atb += row * (weight / s);
        }
        let coef = ata
            .lu()
            .solve(&atb)
            .ok_or_else(|| Error::InvalidParameter("singular Lorentzian fit".into()))?;
        let (a, b, c) = (coef[0], coef[1], coef[2]);
        if !(c > 0.0) {
            return Err(Error::InvalidParameter("data are not peaked; Lorentzian fit failed".into()));
        }
        let u0 = -b / (2.0 * c);
        let min = a - b * b / (4.0 * c);
        if !(min > 0.0) {
            return Err(Error::InvalidParameter("Lorentzian fit has no positive peak".into()));
        }
        let next = LorentzianFit {
            center: shift + u0 * span,
            half_width: (min / c).sqrt() * span,
            peak: 1.0 / min,
        };
        let settled = (next.half_width - fit.half_width).abs() <= 1e-13 * next.half_width;
        fit = next;
        model = pts.iter().map(|p| lorentzian(&fit, p.0)).collect();
        if settled {
            break;
        }
    }
    Ok(fit)
}

pub fn lorentzian(fit: &LorentzianFit, omega: f64) -> f64 {
    let u = (omega - fit.center) / fit.half_width;
    fit.peak / (1.0 + u * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiffusionEstimate {
    /// Estimated half-width `D_φ` from `⟨Δφ²⟩ = 2 D_φ t`.
    pub rate: f64,
    pub standard_error: f64,
}

/// Monte-Carlo cross-check of the phase-diffusion rate.
///
/// Integrates the linearized field equation with Euler-Maruyama steps and
/// reads the phase as `φ = Im(l† δa) / √I`.
pub fn phase_diffusion_monte_carlo(
    fluct: &FluctuationMatrix,
    solution: &LasingSolution,
    noise: &NoiseModel,
    dt: f64,
    n_steps: usize,
    seed: Seed,
) -> Result<PhaseDiffusionEstimate> {
    let n = fluct.n_modes();
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    if noise.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: noise.n(),
        });
    }
    if n_steps < 2 {
        return Err(Error::InvalidParameter("need at least 2 steps".into()));
    }
    let chol = psd_factor(noise.covariance());
    let l = fluct.matrix();
    let top = l.view((0, 0), (n, n)).into_owned();
    let conj_block = l.view((0, n), (n, n)).into_owned();
    let sqrt_i = solution.intensity.sqrt();
    let sqrt_dt = dt.sqrt();
    let mut rng = seed.rng();

    let mut state = CVector::zeros(n);
    let mut phase = 0.0;
    let mut sum_sq = 0.0;
    let mut sum_quartic = 0.0;
    for _ in 0..n_steps {
        // circular increment with ⟨ξ ξ†⟩ = D dt
        let z = CVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let xi = &chol * z * C64::new(sqrt_dt, 0.0);
        let drift = &top * &state + &conj_block * state.map(|z| z.conj());
        state += drift * C64::new(dt, 0.0) + xi;
        let next = inner(&solution.left_vector, &state).im / sqrt_i;
        let step = next - phase;
        phase = next;
        sum_sq += step * step;
        sum_quartic += step.powi(4);
    }
    let m = n_steps as f64;
    let mean_sq = sum_sq / m;
    let var_sq = (sum_quartic / m - mean_sq * mean_sq).max(0.0);
    Ok(PhaseDiffusionEstimate {
        rate: mean_sq / (2.0 * dt),
        standard_error: (var_sq / m).sqrt() / (2.0 * dt),
    })
}

/// `B` with `B Bᵀ = D` for symmetric PSD `D` (eigenvalue square roots).
fn psd_factor(d: &DMatrix<f64>) -> CMatrix {
    let eig = d.clone().symmetric_eigen();
    let n = d.nrows();
    let root = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, j)] * eig.eigenvalues[j].max(0.0).sqrt());
    to_complex(&root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{build_damping, build_dynamical, resonances, ResonanceOptions};
    use crate::ensembles::{sample_coupling, sample_goe_spectrum, CouplingMatrix, ModeSpectrum};
    use crate::langevin::{noise_from_coupling, NoiseOrdering};
    use crate::laser::{lasing_threshold, steady_state};
    use crate::seed::Purpose;

    struct Case {
        dynamics: DynamicalMatrix,
        damping: crate::effective::DampingMatrix,
        medium: GainMedium,
        solution: LasingSolution,
    }

    fn medium() -> GainMedium {
        GainMedium::new(0.0, 1e4, 0.01, 200.0, 300.0).unwrap()
    }

    fn single_mode() -> Case {
        let s = ModeSpectrum::new(vec![50.0], 50.0, Some(1.0)).unwrap();
        let damping = build_damping(&CouplingMatrix::new(DMatrix::from_element(1, 1, 0.3)).unwrap());
        let dynamics = build_dynamical(&s, &damping).unwrap();
        let res = resonances(&dynamics, &ResonanceOptions::default()).unwrap();
        let m0 = medium();
        let medium = m0.with_pump(2.0 * lasing_threshold(&res, &m0));
        let solution = steady_state(&res, &medium).unwrap();
        Case {
            dynamics,
            damping,
            medium,
            solution,
        }
    }

    fn goe_case(n: usize, m: usize, seed: u64) -> Case {
        let s = sample_goe_spectrum(n, 1.0, 200.0, Seed::substream(seed, 0, Purpose::Spectrum)).unwrap();
        let w = sample_coupling(n, m, &vec![1.0; m], 1.0, Seed::substream(seed, 0, Purpose::Coupling)).unwrap();
        let damping = build_damping(&w);
        let dynamics = build_dynamical(&s, &damping).unwrap();
        let res = resonances(&dynamics, &ResonanceOptions::default()).unwrap();
        let m0 = medium();
        let medium = m0.with_pump(3.0 * lasing_threshold(&res, &m0));
        let solution = steady_state(&res, &medium).unwrap();
        Case {
            dynamics,
            damping,
            medium,
            solution,
        }
    }

    #[test]
    fn single_mode_matrix_and_spectrum() {
        let c = single_mode();
        let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
        let gi = f.dgdi() * c.solution.intensity;
        // ā is real, so ℒ = G'I [[1, 1], [1, 1]]
        for z in f.matrix().iter() {
            assert!((z - C64::new(gi, 0.0)).norm() < 1e-12 * gi.abs());
        }
        let eig = linalg::eigen(f.matrix(), false).unwrap();
        let mut re: Vec<f64> = eig.values.iter().map(|v| v.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 2.0 * gi).abs() < 1e-12 * gi.abs());
        assert!(re[1].abs() < 1e-12 * gi.abs());

        let z = zero_mode(&f, &c.solution).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.right[0] - C64::new(s, 0.0)).norm() < 1e-14);
        assert!((z.right[1] + C64::new(s, 0.0)).norm() < 1e-14);
        assert!(z.right_residual < 1e-15);
        assert!(z.stable);
    }

    #[test]
    fn dgdi_consistent_with_saturation() {
        let c = single_mode();
        let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
        let expected =
            -c.solution.gain_star.powi(2) / (c.solution.unsaturated_gain * c.solution.saturation_intensity);
        assert!((f.dgdi() - expected).abs() < 1e-14 * expected.abs());
    }

    #[test]
    fn goe_zero_mode_and_left_vector() {
        for seed in 0..5 {
            let c = goe_case(12, 2, seed);
            let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
            assert!(f.block_asymmetry() < 1e-12 * f.norm());
            let z = zero_mode(&f, &c.solution).unwrap();
            assert!(z.right_residual < 1e-8, "residual {}", z.right_residual);
            assert!(z.left_residual < 1e-8);
            assert!(z.stable);
            // u₀ = (l, -l*) / √2
            let n = c.solution.amplitude.len();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..n {
                let l = c.solution.left_vector[i];
                assert!((z.left[i] - l * s).norm() < 1e-7 * vector_norm(&c.solution.left_vector));
                assert!((z.left[i + n] + l.conj() * s).norm() < 1e-7 * vector_norm(&c.solution.left_vector));
            }
        }
    }

    #[test]
    fn zero_mode_width_is_petermann_linewidth() {
        for seed in 0..5 {
            let c = goe_case(10, 2, 100 + seed);
            let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
            let noise = FluctuationNoise::field_only(noise_from_coupling(&c.damping, NoiseOrdering::Antinormal));
            let corr = correlator_spectrum(&f, &c.solution, &noise).unwrap();
            let lw = linewidth(&c.solution, Baseline::HalfWidthOverIntensity).unwrap();
            let rel = (corr.zero_mode_width - lw.linewidth).abs() / lw.linewidth;
            assert!(rel < 1e-6, "relative mismatch {rel}");

            let grid = symmetric_grid(20.0 * lw.linewidth, 801);
            let only: Vec<f64> = grid.iter().map(|&w| corr.evaluate_zero_mode(w)).collect();
            let fit = fit_lorentzian(&grid, &only).unwrap();
            assert!((fit.half_width - corr.zero_mode_width).abs() < 1e-9 * corr.zero_mode_width);
            assert!(fit.center.abs() < 1e-9 * corr.zero_mode_width);

            let full = corr.on_grid(&grid);
            let fit = fit_lorentzian(&grid, &full).unwrap();
            assert!((fit.half_width - lw.linewidth).abs() < 1e-2 * lw.linewidth);
        }
    }

    #[test]
    fn zero_mode_weight_is_about_the_intensity() {
        let c = goe_case(8, 2, 7);
        let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
        let noise = FluctuationNoise::field_only(noise_from_coupling(&c.damping, NoiseOrdering::Antinormal));
        let corr = correlator_spectrum(&f, &c.solution, &noise).unwrap();
        let w0 = C64::new(corr.weights[0].0, corr.weights[0].1);
        assert!((w0.re - c.solution.intensity).abs() < 1e-3 * c.solution.intensity);
        assert!(corr.zero_mode_weight > 0.99);
    }

    #[test]
    fn zero_noise_gives_zero_spectrum() {
        let c = goe_case(6, 1, 3);
        let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
        let noise = FluctuationNoise::field_only(NoiseModel::from_matrix(DMatrix::zeros(6, 6)).unwrap());
        let corr = correlator_spectrum(&f, &c.solution, &noise).unwrap();
        for w in symmetric_grid(5.0, 11) {
            assert_eq!(corr.evaluate(w), 0.0);
        }
    }

    #[test]
    fn single_mode_linewidth() {
        let c = single_mode();
        let lw = linewidth(&c.solution, Baseline::HalfWidthOverIntensity).unwrap();
        let gamma = std::f64::consts::PI * 0.09;
        assert!((lw.linewidth - gamma / (2.0 * c.solution.intensity)).abs() < 1e-12 * lw.linewidth);
        assert!((lw.petermann - 1.0).abs() < 1e-14);
        let user = linewidth(&c.solution, Baseline::UserValue(3.0)).unwrap();
        assert_eq!(user.linewidth, 3.0 * user.petermann);
        assert!(linewidth(&c.solution, Baseline::UserValue(-1.0)).is_err());
    }

    #[test]
    fn lorentzian_fit_recovers_parameters() {
        let truth = LorentzianFit {
            center: 0.3,
            half_width: 0.07,
            peak: 12.0,
        };
        let grid = symmetric_grid(2.0, 301);
        let data: Vec<f64> = grid.iter().map(|&w| lorentzian(&truth, w)).collect();
        let fit = fit_lorentzian(&grid, &data).unwrap();
        assert!((fit.center - truth.center).abs() < 1e-12);
        assert!((fit.half_width - truth.half_width).abs() < 1e-12);
        assert!((fit.peak - truth.peak).abs() < 1e-9);
    }

    #[test]
    fn phase_diffusion_cross_check() {
        let c = goe_case(6, 2, 11);
        let f = build_fluctuation_matrix(&c.solution, &c.dynamics, &c.medium).unwrap();
        let d = noise_from_coupling(&c.damping, NoiseOrdering::Antinormal);
        let lw = linewidth(&c.solution, Baseline::HalfWidthOverIntensity).unwrap();
        let est = phase_diffusion_monte_carlo(&f, &c.solution, &d, 1e-3, 100_000, Seed::new(5)).unwrap();
        assert!(
            (est.rate - lw.linewidth).abs() < 4.0 * est.standard_error,
            "{} vs {} ± {}",
            est.rate,
            lw.linewidth,
            est.standard_error
        );
    }
}
