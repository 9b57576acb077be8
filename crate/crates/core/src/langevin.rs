//! Linear Langevin dynamics `ȧ = A a + F(t)` with white, mode-correlated
//! noise `⟨F(t) F†(t')⟩ = D δ(t - t')`.
//!
//! Trajectories are c-number samples of the ordered moments selected by
//! [`NoiseOrdering`]. Integration is exact for the linear system: one step
//! applies `e^{A dt}` and adds a circular complex Gaussian increment with
//! covariance `Q(dt) = ∫₀^dt e^{As} D e^{A†s} ds`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::effective::{resonance_eigenvalues, resonances, DampingMatrix, DynamicalMatrix, ResonanceOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, to_complex, CMatrix, CVector, C64};
use crate::seed::Seed;

/// Operator ordering represented by the c-number noise, fixing
/// `D = c · 2Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseOrdering {
    /// `c = n̄ + 1/2`
    Symmetric,
    /// `c = n̄`; vanishes for vacuum input.
    Normal,
    /// `c = n̄ + 1`, the raw input-field correlation `⟨F F†⟩ = 2πWWᵀ`.
    Antinormal,
}

impl NoiseOrdering {
    pub fn constant(self, thermal_occupation: f64) -> f64 {
        match self {
            NoiseOrdering::Symmetric => thermal_occupation + 0.5,
            NoiseOrdering::Normal => thermal_occupation,
            NoiseOrdering::Antinormal => thermal_occupation + 1.0,
        }
    }
}

/// Noise covariance `D` (real symmetric PSD).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    covariance: DMatrix<f64>,
    ordering: Option<NoiseOrdering>,
}

impl NoiseModel {
    /// User-supplied covariance.
    pub fn from_matrix(covariance: DMatrix<f64>) -> Result<Self> {
        // reuse the symmetric/PSD validation
        let checked = DampingMatrix::new(covariance)?;
        Ok(Self {
            covariance: checked.matrix().clone(),
            ordering: None,
        })
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn ordering(&self) -> Option<NoiseOrdering> {
        self.ordering
    }

    pub fn n(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.covariance.iter().all(|x| *x == 0.0)
    }

    /// `D -> c D`, `c >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise scale must be >= 0, got {factor}")));
        }
        Ok(Self {
            covariance: &self.covariance * factor,
            ordering: None,
        })
    }
}

/// Vacuum input noise: `D = c · 2Γ` with `c` from `ordering`.
pub fn noise_from_coupling(damping: &DampingMatrix, ordering: NoiseOrdering) -> NoiseModel {
    thermal_noise(damping, ordering, 0.0).expect("zero occupation is valid")
}

/// Input field with uniform thermal occupation `n̄`.
pub fn thermal_noise(
    damping: &DampingMatrix,
    ordering: NoiseOrdering,
    thermal_occupation: f64,
) -> Result<NoiseModel> {
    if !(thermal_occupation >= 0.0 && thermal_occupation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "thermal occupation must be >= 0, got {thermal_occupation}"
        )));
    }
    let c = ordering.constant(thermal_occupation);
    Ok(NoiseModel {
        covariance: damping.matrix() * (2.0 * c),
        ordering: Some(ordering),
    })
}

/// `(e^{A dt}, Q(dt))` by the block-matrix exponential
/// `exp([[A, D], [0, -A†]] dt) = [[Φ, X], [0, Φ^{-†}]]`, `Q = X Φ†`.
///
/// The mean diagonal frequency is factored out as a scalar phase first; it
/// commutes with everything and cancels in `Q`.
pub fn discretize(a: &CMatrix, d: &CMatrix, dt: f64) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let centre = -(0..n).map(|i| a[(i, i)].im).sum::<f64>() / n as f64;
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += C64::new(0.0, centre);
    }
    let scale = C64::new(dt, 0.0);
    let mut block = CMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(&shifted * scale));
    block.view_mut((0, n), (n, n)).copy_from(&(d * scale));
    block
        .view_mut((n, n), (n, n))
        .copy_from(&(-shifted.adjoint() * scale));
    let e = block.exp();
    let phi_shifted = e.view((0, 0), (n, n)).into_owned();
    let x = e.view((0, n), (n, n)).into_owned();
    let q = linalg::hermitian_part(&(&x * phi_shifted.adjoint()));
    let phase = C64::new(0.0, -centre * dt).exp();
    (phi_shifted * phase, q)
}

/// Precomputed one-step map for a fixed `(A, D, dt)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    dt: f64,
    transition: CMatrix,
    covariance: CMatrix,
    factor: CMatrix,
}

impl Propagator {
    pub fn new(dynamics: &DynamicalMatrix, noise: &NoiseModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::NonPositiveStep(dt));
        }
        if noise.n() != dynamics.n() {
            return Err(Error::DimensionMismatch {
                expected: dynamics.n(),
                found: noise.n(),
            });
        }
        let max_real = resonance_eigenvalues(dynamics)?
            .iter()
            .map(|v| v.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_real > 1e-10 * dynamics.norm() {
            return Err(Error::UnstableDynamics { max_real });
        }
        let (transition, covariance) = discretize(dynamics.matrix(), &to_complex(noise.covariance()), dt);
        let factor = psd_factor(&covariance);
        Ok(Self {
            dt,
            transition,
            covariance,
            factor,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `e^{A dt}`
    pub fn transition(&self) -> &CMatrix {
        &self.transition
    }

    /// `Q(dt)`
    pub fn increment_covariance(&self) -> &CMatrix {
        &self.covariance
    }

    /// Circular complex Gaussian with covariance `Q(dt)`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let n = self.transition.nrows();
        let z = CVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        &self.factor * z
    }

    pub fn step<R: Rng + ?Sized>(&self, state: &CVector, rng: &mut R) -> CVector {
        &self.transition * state + self.sample_increment(rng)
    }
}

/// `L` with `L L† = Q` for a Hermitian PSD `Q` (eigenvalues clipped at 0).
fn psd_factor(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    let eig = q.clone().symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            l[(i, j)] *= s;
        }
    }
    l
}

/// Sampled path on a uniform grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<CVector>,
    pub seed: Seed,
}

/// `n_steps` exact steps from `a0`; the result holds `n_steps + 1` points.
pub fn propagate(
    dynamics: &DynamicalMatrix,
    noise: &NoiseModel,
    a0: &CVector,
    dt: f64,
    n_steps: usize,
    seed: Seed,
) -> Result<Trajectory> {
    if a0.len() != dynamics.n() {
        return Err(Error::DimensionMismatch {
            expected: dynamics.n(),
            found: a0.len(),
        });
    }
    let prop = Propagator::new(dynamics, noise, dt)?;
    let mut rng = seed.rng();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut amplitudes = Vec::with_capacity(n_steps + 1);
    let mut state = a0.clone();
    for k in 0..=n_steps {
        if k > 0 {
            state = prop.step(&state, &mut rng);
        }
        times.push(k as f64 * dt);
        amplitudes.push(state.clone());
    }
    Ok(Trajectory {
        times,
        amplitudes,
        seed,
    })
}

/// Monte-Carlo estimate of `⟨a a†⟩` with batch-means standard errors.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: CMatrix,
    pub n_samples: usize,
    /// Largest per-entry standard error.
    pub standard_error: f64,
    /// Per-entry standard error of the complex entry.
    pub entry_errors: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub burn_in: usize,
    pub n_samples: usize,
    pub n_batches: usize,
}

/// Time average of `a a†` along one long chain started at `a0`.
pub fn sample_covariance(
    propagator: &Propagator,
    a0: &CVector,
    plan: &SamplingPlan,
    seed: Seed,
) -> Result<CovarianceEstimate> {
    let n = a0.len();
    if n != propagator.transition.nrows() {
        return Err(Error::DimensionMismatch {
            expected: propagator.transition.nrows(),
            found: n,
        });
    }
    let batches = plan.n_batches.max(2);
    let per_batch = plan.n_samples / batches;
    if per_batch == 0 {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot fill {} batches",
            plan.n_samples, batches
        )));
    }
    let mut rng = seed.rng();
    let mut state = a0.clone();
    for _ in 0..plan.burn_in {
        state = propagator.step(&state, &mut rng);
    }
    let mut batch_means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut acc = CMatrix::zeros(n, n);
        for _ in 0..per_batch {
            state = propagator.step(&state, &mut rng);
            acc += &state * state.adjoint();
        }
        batch_means.push(acc / C64::new(per_batch as f64, 0.0));
    }
    let b = batches as f64;
    let mean = batch_means.iter().fold(CMatrix::zeros(n, n), |s, m| s + m) / C64::new(b, 0.0);
    let mut entry_errors = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let var: f64 = batch_means
                .iter()
                .map(|m| (m[(i, j)] - mean[(i, j)]).norm_sqr())
                .sum::<f64>()
                / (b - 1.0);
            entry_errors[(i, j)] = (var / b).sqrt();
        }
    }
    let standard_error = entry_errors.iter().fold(0.0f64, |m, x| m.max(*x));
    Ok(CovarianceEstimate {
        matrix: linalg::hermitian_part(&mean),
        n_samples: per_batch * batches,
        standard_error,
        entry_errors,
    })
}

/// Stationary solution of `A C + C A† + D = 0` from the bi-orthogonal
/// eigensystem: `C = Σ_jk r_j (l_j† D l_k) / (-ν_j - ν_k*) r_k†`.
pub fn steady_covariance(dynamics: &DynamicalMatrix, noise: &NoiseModel) -> Result<CMatrix> {
    let n = dynamics.n();
    if noise.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: noise.n(),
        });
    }
    if noise.is_zero() {
        return Ok(CMatrix::zeros(n, n));
    }
    let res = resonances(dynamics, &ResonanceOptions::default())?;
    let max_real = res
        .eigenvalues()
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_real >= -1e-12 * dynamics.norm() {
        return Err(Error::MarginallyStable { max_real });
    }
    let l = res.left_matrix();
    let r = res.right_matrix();
    let projected = l.adjoint() * to_complex(noise.covariance()) * l;
    let nu = res.eigenvalues();
    let x = CMatrix::from_fn(n, n, |j, k| projected[(j, k)] / (-nu[j] - nu[k].conj()));
    Ok(linalg::hermitian_part(&(r * x * r.adjoint())))
}

/// `‖A C + C A† + D‖_F`
pub fn lyapunov_residual(a: &CMatrix, c: &CMatrix, d: &CMatrix) -> f64 {
    linalg::frobenius(&(a * c + c * a.adjoint() + d))
}

/// Diagonal (non-overlapping-mode) approximation of the dynamics.
#[derive(Debug, Clone)]
pub struct WeakDamping {
    pub dynamics: DynamicalMatrix,
    /// `max_{λ≠λ'} |Γ_λλ'| / Δω`
    pub epsilon: f64,
}

/// Keeps only `-iω_λ - Γ_λλ`.
pub fn weak_damping_reduce(dynamics: &DynamicalMatrix, spacing: f64) -> WeakDamping {
    let a = dynamics.matrix();
    let n = dynamics.n();
    let mut max_off: f64 = 0.0;
    let mut reduced = CMatrix::zeros(n, n);
    for i in 0..n {
        reduced[(i, i)] = a[(i, i)];
        for j in 0..n {
            if i != j {
                max_off = max_off.max(a[(i, j)].norm());
            }
        }
    }
    WeakDamping {
        dynamics: DynamicalMatrix::from_matrix(reduced, dynamics.mean_spacing())
            .expect("square by construction"),
        epsilon: max_off / spacing,
    }
}
