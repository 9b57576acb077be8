//! Non-Hermitian mode dynamics `ȧ = A a` with `A = -iΩ - πWWᵀ`, its
//! bi-orthogonal eigendecomposition and the per-mode Petermann factors.
//!
//! Sign convention: an eigenvalue `ν_k = -iω_k - γ_k` has resonance
//! frequency `ω_k` and amplitude decay rate `γ_k`; the energy decay rate is
//! `2γ_k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ensembles::{CouplingMatrix, ModeSpectrum};
use crate::error::{Error, Result};
use crate::linalg::{self, inner, vector_norm, CMatrix, CVector, C64};

/// `Γ = π W Wᵀ`
#[derive(Debug, Clone, PartialEq)]
pub struct DampingMatrix {
    gamma: DMatrix<f64>,
}

impl DampingMatrix {
    /// Wraps a symmetric positive-semidefinite matrix.
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        let n = gamma.nrows();
        if gamma.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gamma.ncols(),
            });
        }
        let scale = gamma.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if (&gamma - gamma.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidParameter("damping matrix is not symmetric".into()));
        }
        let min_ev = gamma.symmetric_eigenvalues().min();
        if min_ev < -1e-10 * scale {
            return Err(Error::InvalidParameter(format!(
                "damping matrix not positive semidefinite (min eigenvalue {min_ev:.3e})"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.gamma.trace()
    }
}

/// `Γ = π W Wᵀ`
pub fn build_damping(coupling: &CouplingMatrix) -> DampingMatrix {
    let w = coupling.entries();
    let mut gamma = w * w.transpose() * PI;
    // exact symmetry regardless of summation order
    for i in 0..gamma.nrows() {
        for j in i + 1..gamma.ncols() {
            let v = gamma[(i, j)];
            gamma[(j, i)] = v;
        }
    }
    DampingMatrix { gamma }
}

/// Generator `A` of the damped mode dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    matrix: CMatrix,
    mean_spacing: f64,
}

impl DynamicalMatrix {
    /// Arbitrary complex generator; no structure is imposed.
    pub fn from_matrix(matrix: CMatrix, mean_spacing: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            mean_spacing,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    /// Induced 1-norm, the scale for all relative tolerances.
    pub fn norm(&self) -> f64 {
        linalg::norm1(&self.matrix)
    }

    /// `ω_λ = -Im A_λλ`
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n()).map(|i| -self.matrix[(i, i)].im).collect()
    }

    /// `Γ = -(A + A†)/2`
    pub fn damping(&self) -> DMatrix<f64> {
        let h = linalg::hermitian_part(&self.matrix);
        h.map(|z| -z.re)
    }
}

/// `A = -i diag(ω) - Γ`
pub fn build_dynamical(spectrum: &ModeSpectrum, damping: &DampingMatrix) -> Result<DynamicalMatrix> {
    let n = spectrum.len();
    if damping.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: damping.n(),
        });
    }
    let g = damping.matrix();
    let omega = spectrum.frequencies();
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        let re = -g[(i, j)];
        if i == j {
            C64::new(re, -omega[i])
        } else {
            C64::new(re, 0.0)
        }
    });
    Ok(DynamicalMatrix {
        matrix,
        mean_spacing: spectrum.mean_spacing(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    /// Minimum eigenvalue gap, relative to `‖A‖`.
    pub degeneracy_tol: f64,
    /// Upper bound on the Frobenius condition number of the right-vector
    /// matrix.
    pub max_condition: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: 1e-12,
            max_condition: 1e8,
        }
    }
}

/// Bi-orthonormal eigensystem of `A`, sorted by `ω_k` then `γ_k`.
#[derive(Debug, Clone)]
pub struct ResonanceSet {
    eigenvalues: Vec<C64>,
    right: CMatrix,
    left: CMatrix,
    petermann: Vec<f64>,
    overlap_ratio: f64,
    condition: f64,
    mean_spacing: f64,
}

impl ResonanceSet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn omega(&self, k: usize) -> f64 {
        -self.eigenvalues[k].im
    }

    pub fn gamma(&self, k: usize) -> f64 {
        -self.eigenvalues[k].re
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.omega(k)).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.gamma(k)).collect()
    }

    /// Unit-norm right eigenvector `r_k`.
    pub fn right(&self, k: usize) -> CVector {
        self.right.column(k).into_owned()
    }

    /// Left eigenvector `l_k` with `l_k† r_j = δ_kj`.
    pub fn left(&self, k: usize) -> CVector {
        self.left.column(k).into_owned()
    }

    pub fn right_matrix(&self) -> &CMatrix {
        &self.right
    }

    pub fn left_matrix(&self) -> &CMatrix {
        &self.left
    }

    pub fn petermann(&self) -> &[f64] {
        &self.petermann
    }

    /// `mean(2γ_k) / Δω`
    pub fn overlap_ratio(&self) -> f64 {
        self.overlap_ratio
    }

    /// Frobenius condition number of the right-vector matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Mean level spacing `Δω` of the underlying closed-cavity spectrum.
    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    /// Index of the narrowest resonance (ties: lower frequency).
    pub fn narrowest(&self) -> usize {
        (0..self.len())
            .min_by(|&a, &b| {
                self.gamma(a)
                    .total_cmp(&self.gamma(b))
                    .then(self.omega(a).total_cmp(&self.omega(b)))
            })
            .unwrap_or(0)
    }

    /// `Σ_k r_k l_k†`, the identity for a complete eigenbasis.
    pub fn completeness(&self) -> CMatrix {
        &self.right * self.left.adjoint()
    }
}

fn resonance_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    // ω = -Im ν ascending, then γ = -Re ν ascending
    (-a.im).total_cmp(&-b.im).then((-a.re).total_cmp(&-b.re))
}

fn closest_pair(values: &[C64]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

/// Eigenvalues only, sorted like [`resonances`].
pub fn resonance_eigenvalues(dynamics: &DynamicalMatrix) -> Result<Vec<C64>> {
    let mut values = linalg::eigen(dynamics.matrix(), false)?.values;
    values.sort_by(resonance_order);
    Ok(values)
}

/// Full bi-orthogonal decomposition of `A`. Left vectors come from the
/// inverse of the right-vector matrix.
pub fn resonances(dynamics: &DynamicalMatrix, options: &ResonanceOptions) -> Result<ResonanceSet> {
    let n = dynamics.n();
    let eig = linalg::eigen(dynamics.matrix(), true)?;
    let vectors = eig.vectors.expect("vectors requested");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| resonance_order(&eig.values[a], &eig.values[b]));
    let eigenvalues: Vec<C64> = order.iter().map(|&k| eig.values[k]).collect();
    let right = CMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);

    let scale = dynamics.norm().max(f64::MIN_POSITIVE);
    let near_defective = |condition: f64| {
        let (i, j, _) = closest_pair(&eigenvalues).unwrap_or((0, 0, 0.0));
        Error::NearDefective {
            condition,
            first: eigenvalues[i],
            second: eigenvalues[j],
        }
    };
    if let Some((_, _, gap)) = closest_pair(&eigenvalues) {
        if gap <= options.degeneracy_tol * scale {
            return Err(near_defective(f64::INFINITY));
        }
    }

    let inverse = right
        .clone()
        .try_inverse()
        .ok_or_else(|| near_defective(f64::INFINITY))?;
    let condition = linalg::frobenius(&right) * linalg::frobenius(&inverse);
    if !condition.is_finite() || condition > options.max_condition {
        return Err(near_defective(condition));
    }
    let left = inverse.adjoint();

    let petermann = (0..n)
        .map(|k| {
            let l = left.column(k).into_owned();
            let r = right.column(k).into_owned();
            petermann_factor(&l, &r).map(|p| p.value)
        })
        .collect::<Result<Vec<_>>>()?;

    let mean_width = eigenvalues.iter().map(|v| -v.re).sum::<f64>() / n as f64;
    let overlap_ratio = 2.0 * mean_width / dynamics.mean_spacing();

    Ok(ResonanceSet {
        eigenvalues,
        right,
        left,
        petermann,
        overlap_ratio,
        condition,
        mean_spacing: dynamics.mean_spacing(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Petermann {
    pub value: f64,
    /// `true` when `l†r` deviated from 1 by more than `1e-8` and the value
    /// was renormalized by `|l†r|²`.
    pub renormalized: bool,
}

/// `K = (l†l)(r†r) / |l†r|²`
pub fn petermann_factor(left: &CVector, right: &CVector) -> Result<Petermann> {
    if left.len() != right.len() {
        return Err(Error::DimensionMismatch {
            expected: left.len(),
            found: right.len(),
        });
    }
    let nl = vector_norm(left);
    let nr = vector_norm(right);
    let overlap = inner(left, right);
    if overlap.norm() < 1e-12 * nl * nr || overlap.norm() == 0.0 {
        return Err(Error::DegenerateVectors {
            overlap: overlap.norm(),
        });
    }
    Ok(Petermann {
        value: nl * nl * nr * nr / overlap.norm_sqr(),
        renormalized: (overlap - C64::new(1.0, 0.0)).norm() > 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_damping() {
        let w = CouplingMatrix::new(dmatrix![0.3]).unwrap();
        let g = build_damping(&w);
        assert!((g.matrix()[(0, 0)] - PI * 0.09).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_columns_give_column_norms() {
        // columns (3,4,0)/5·c1 and (0,0,1)·c2
        let (c1, c2) = (0.7, 1.3);
        let w = dmatrix![0.6 * c1, 0.0; 0.8 * c1, 0.0; 0.0, c2];
        let g = build_damping(&CouplingMatrix::new(w).unwrap());
        let mut ev: Vec<f64> = g.matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!(ev[0].abs() < 1e-14);
        assert!((ev[1] - PI * c1 * c1).abs() < 1e-13);
        assert!((ev[2] - PI * c2 * c2).abs() < 1e-13);
    }

    #[test]
    fn damping_matches_triple_loop() {
        let w = dmatrix![0.1, -0.4; 0.25, 0.9; -0.7, 0.05];
        let g = build_damping(&CouplingMatrix::new(w.clone()).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for m in 0..2 {
                    s += w[(i, m)] * w[(j, m)];
                }
                assert!((g.matrix()[(i, j)] - PI * s).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn scalar_dynamical_matrix() {
        let s = ModeSpectrum::new(vec![5.0], 5.0, Some(1.0)).unwrap();
        let d = DampingMatrix::new(dmatrix![0.2]).unwrap();
        let a = build_dynamical(&s, &d).unwrap();
        assert_eq!(a.matrix()[(0, 0)], c(-0.2, -5.0));
    }

    #[test]
    fn dimension_mismatch() {
        let s = ModeSpectrum::new(vec![5.0, 6.0], 5.5, None).unwrap();
        let d = DampingMatrix::new(dmatrix![0.2]).unwrap();
        assert!(matches!(
            build_dynamical(&s, &d),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn closed_cavity_is_normal() {
        let s = ModeSpectrum::new(vec![1.0, 2.5, 4.0], 2.5, None).unwrap();
        let d = DampingMatrix::new(DMatrix::zeros(3, 3)).unwrap();
        let a = build_dynamical(&s, &d).unwrap();
        let h = a.matrix() + a.matrix().adjoint();
        assert!(linalg::frobenius(&h) == 0.0);
        let res = resonances(&a, &ResonanceOptions::default()).unwrap();
        for k in 0..3 {
            assert!((res.omega(k) - s.frequencies()[k]).abs() < 1e-12);
            assert!(res.gamma(k).abs() < 1e-12);
            assert!((res.petermann()[k] - 1.0).abs() < 1e-10);
            let diff = res.left(k) - res.right(k);
            assert!(vector_norm(&diff) < 1e-10);
        }
    }

    #[test]
    fn two_mode_closed_form() {
        let (w1, w2, g, cpl) = (1.0, 1.4, 0.3, 0.25);
        let m = dmatrix![c(-g, -w1), c(cpl, 0.0); c(cpl, 0.0), c(-g, -w2)];
        let a = DynamicalMatrix::from_matrix(m, 1.0).unwrap();
        let res = resonances(&a, &ResonanceOptions::default()).unwrap();
        // ν = -γ - i(ω1+ω2)/2 ± sqrt(c² - (ω1-ω2)²/4)
        let mean = c(-g, -(w1 + w2) / 2.0);
        let disc = c(cpl * cpl - (w1 - w2) * (w1 - w2) / 4.0, 0.0).sqrt();
        let mut expected = [mean + disc, mean - disc];
        expected.sort_by(resonance_order);
        for (got, want) in res.eigenvalues().iter().zip(&expected) {
            assert!((got - want).norm() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn petermann_examples() {
        let e1 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let p = petermann_factor(&e1, &e1).unwrap();
        assert_eq!(p.value, 1.0);
        assert!(!p.renormalized);

        let r = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!((petermann_factor(&e1, &r).unwrap().value - 2.0).abs() < 1e-15);

        let scaled = &r * c(2.0, 0.0);
        let p = petermann_factor(&e1, &scaled).unwrap();
        assert!((p.value - 2.0).abs() < 1e-15);
        assert!(p.renormalized);

        let orth = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            petermann_factor(&e1, &orth),
            Err(Error::DegenerateVectors { .. })
        ));
    }

    #[test]
    fn petermann_of_nonnormal_two_by_two() {
        // eigenvalue 0: r ∝ (1, 0), l ∝ (1, i/2) → K = 1.25
        let m = dmatrix![c(0.0, 0.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, -2.0)];
        let a = DynamicalMatrix::from_matrix(m, 1.0).unwrap();
        let res = resonances(&a, &ResonanceOptions::default()).unwrap();
        let k = (0..2).find(|&k| res.eigenvalues()[k].norm() < 1e-12).unwrap();
        assert!((res.petermann()[k] - 1.25).abs() < 1e-12);

        let l = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.5)]);
        let r = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((petermann_factor(&l, &r).unwrap().value - 1.25).abs() < 1e-15);
    }

    #[test]
    fn defective_matrix_is_refused() {
        let m = dmatrix![c(0.0, -1.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, -1.0)];
        let a = DynamicalMatrix::from_matrix(m, 1.0).unwrap();
        assert!(matches!(
            resonances(&a, &ResonanceOptions::default()),
            Err(Error::NearDefective { .. })
        ));
    }

    #[test]
    fn nearly_defective_matrix_hits_condition_bound() {
        let eps = 1e-10;
        let m = dmatrix![c(0.0, -1.0), c(1.0, 0.0); c(0.0, 0.0), c(0.0, -1.0 - eps)];
        let a = DynamicalMatrix::from_matrix(m, 1.0).unwrap();
        let opts = ResonanceOptions {
            degeneracy_tol: 0.0,
            max_condition: 1e8,
        };
        match resonances(&a, &opts) {
            Err(Error::NearDefective { condition, first, second }) => {
                assert!(condition > 1e8);
                assert!((first - second).norm() < 1e-9);
            }
            other => panic!("expected NearDefective, got {other:?}"),
        }
    }
}
