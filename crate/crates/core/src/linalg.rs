//! Dense complex linear algebra that nalgebra does not cover directly:
//! eigenvalues and right eigenvectors of a general (non-Hermitian) complex
//! matrix via Householder reduction to Hessenberg form followed by the
//! implicitly shifted single-shift QR iteration, plus a few helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues, and optionally unit-norm right eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub values: Vec<C64>,
    pub vectors: Option<CMatrix>,
}

/// Eigendecomposition of a general complex square matrix.
///
/// With `want_vectors` the full Schur form `A = Z T Z^H` is accumulated and
/// eigenvectors of `T` are obtained by back substitution.
pub fn eigen(a: &CMatrix, want_vectors: bool) -> Result<ComplexEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(ComplexEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| CMatrix::zeros(0, 0)),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }

    let mut h = Dense::from(a);
    let mut z = want_vectors.then(|| Dense::identity(n));
    hessenberg(&mut h, z.as_mut());
    schur_qr(&mut h, z.as_mut(), want_vectors)?;

    let values: Vec<C64> = (0..n).map(|i| h.get(i, i)).collect();
    let vectors = z.map(|z| triangular_eigenvectors(&h, &z));
    Ok(ComplexEigen { values, vectors })
}

/// Row-major scratch matrix; the QR sweeps touch rows and columns equally,
/// and plain slices keep the inner loops free of bounds checks.
struct Dense {
    n: usize,
    data: Vec<C64>,
}

impl Dense {
    fn identity(n: usize) -> Self {
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = ONE;
        }
        Self { n, data }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    fn row_pair_mut(&mut self, i: usize) -> (&mut [C64], &mut [C64]) {
        let n = self.n;
        let (top, bottom) = self.data.split_at_mut((i + 1) * n);
        (&mut top[i * n..], &mut bottom[..n])
    }

    fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl From<&CMatrix> for Dense {
    fn from(a: &CMatrix) -> Self {
        let n = a.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(a[(i, j)]);
            }
        }
        Self { n, data }
    }
}

/// Householder reduction to upper Hessenberg form, accumulating into `z`.
fn hessenberg(h: &mut Dense, mut z: Option<&mut Dense>) {
    let n = h.n;
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|i| h.get(i, k).norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h.get(k + 1, k);
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;

        for i in k + 1..n {
            v[i] = h.get(i, k);
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi /= vnorm;
        }

        // H <- P H, columns k..n
        for j in k..n {
            let s: C64 = (k + 1..n).map(|i| v[i].conj() * h.get(i, j)).sum();
            let s2 = s * 2.0;
            for i in k + 1..n {
                let val = h.get(i, j) - v[i] * s2;
                h.set(i, j, val);
            }
        }
        // H <- H P, all rows
        for i in 0..n {
            let row = &mut h.data[i * n..(i + 1) * n];
            let s: C64 = (k + 1..n).map(|j| row[j] * v[j]).sum();
            let s2 = s * 2.0;
            for j in k + 1..n {
                row[j] -= s2 * v[j].conj();
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                let row = &mut z.data[i * n..(i + 1) * n];
                let s: C64 = (k + 1..n).map(|j| row[j] * v[j]).sum();
                let s2 = s * 2.0;
                for j in k + 1..n {
                    row[j] -= s2 * v[j].conj();
                }
            }
        }
        h.set(k + 1, k, alpha);
        for i in k + 2..n {
            h.set(i, k, ZERO);
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with real `c` such that
/// `G [x; y] = [r; 0]`.
#[inline]
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, ZERO);
    }
    let nx = x.norm();
    if nx == 0.0 {
        return (0.0, y.conj() / ny);
    }
    let norm = nx.hypot(ny);
    let c = nx / norm;
    let s = (x / nx) * y.conj() / norm;
    (c, s)
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 block closest to its
/// bottom-right entry.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn schur_qr(h: &mut Dense, mut z: Option<&mut Dense>, full: bool) -> Result<()> {
    let n = h.n;
    let eps = f64::EPSILON;
    let hnorm = h.norm1().max(f64::MIN_POSITIVE);
    let max_iter = 30 * n.max(10);

    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total_iter = 0usize;

    while hi > 0 {
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h.get(lo, lo - 1).norm();
            let mut scale = h.get(lo - 1, lo - 1).norm() + h.get(lo, lo).norm();
            if scale == 0.0 {
                scale = hnorm;
            }
            if sub <= eps * scale {
                h.set(lo, lo - 1, ZERO);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }

        total_iter += 1;
        iter_since_deflation += 1;
        if total_iter > max_iter {
            return Err(Error::NoConvergence);
        }

        let shift = if iter_since_deflation % 10 == 0 {
            // exceptional shift
            h.get(hi, hi) + 0.75 * h.get(hi, hi - 1).re.abs()
        } else {
            wilkinson_shift(
                h.get(hi - 1, hi - 1),
                h.get(hi - 1, hi),
                h.get(hi, hi - 1),
                h.get(hi, hi),
            )
        };

        let (row_lo, col_hi) = if full { (0, n - 1) } else { (lo, hi) };
        let mut x = h.get(lo, lo) - shift;
        let mut y = h.get(lo + 1, lo);
        for k in lo..hi {
            if k > lo {
                x = h.get(k, k - 1);
                y = h.get(k + 1, k - 1);
            }
            let (c, s) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { k };
            {
                let (rk, rk1) = h.row_pair_mut(k);
                for j in col_start..=col_hi {
                    let t1 = rk[j];
                    let t2 = rk1[j];
                    rk[j] = t1 * c + s * t2;
                    rk1[j] = -s.conj() * t1 + t2 * c;
                }
            }
            if k > lo {
                h.set(k + 1, k - 1, ZERO);
            }
            let row_end = (k + 2).min(hi);
            let sc = s.conj();
            for i in row_lo..=row_end {
                let base = i * n;
                let t1 = h.data[base + k];
                let t2 = h.data[base + k + 1];
                h.data[base + k] = t1 * c + t2 * sc;
                h.data[base + k + 1] = -s * t1 + t2 * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let base = i * n;
                    let t1 = z.data[base + k];
                    let t2 = z.data[base + k + 1];
                    z.data[base + k] = t1 * c + t2 * sc;
                    z.data[base + k + 1] = -s * t1 + t2 * c;
                }
            }
        }
    }
    Ok(())
}

/// Right eigenvectors of `A = Z T Z^H` from the upper-triangular `T`.
fn triangular_eigenvectors(t: &Dense, z: &Dense) -> CMatrix {
    let n = t.n;
    let tnorm = t.norm1();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * 1e3);
    let mut out = CMatrix::zeros(n, n);
    let mut x = vec![ZERO; n];
    for k in 0..n {
        let lambda = t.get(k, k);
        x.iter_mut().for_each(|v| *v = ZERO);
        x[k] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for i in j + 1..=k {
                s += t.get(j, i) * x[i];
            }
            let mut d = t.get(j, j) - lambda;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            x[j] = -s / d;
            // rescale to avoid overflow in long back substitutions
            let mag = x[j].norm();
            if mag > 1e100 {
                for v in x.iter_mut().take(k + 1) {
                    *v /= mag;
                }
            }
        }
        let mut norm = 0.0;
        for i in 0..n {
            let mut s = ZERO;
            for j in 0..=k {
                s += z.get(i, j) * x[j];
            }
            out[(i, k)] = s;
            norm += s.norm_sqr();
        }
        let norm = norm.sqrt();
        if norm > 0.0 {
            for i in 0..n {
                out[(i, k)] /= norm;
            }
        }
    }
    out
}

/// Induced 1-norm (maximum column sum).
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `u^H v`
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

/// Hermitian part `(A + A^H) / 2`, used to remove round-off asymmetry.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn check_residuals(a: &CMatrix, tol: f64) {
        let eig = eigen(a, true).unwrap();
        let vecs = eig.vectors.unwrap();
        let scale = norm1(a).max(1.0);
        for (k, lambda) in eig.values.iter().enumerate() {
            let r = vecs.column(k).into_owned();
            let res = a * &r - &r * *lambda;
            assert!(
                vector_norm(&res) <= tol * scale,
                "residual {} for eigenvalue {}",
                vector_norm(&res),
                lambda
            );
            assert!((vector_norm(&r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_matrices_have_small_residuals() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (7, 4), (30, 5), (64, 6)] {
            check_residuals(&random_matrix(n, seed), 1e-11);
        }
    }

    #[test]
    fn trace_and_determinant_are_preserved() {
        let a = random_matrix(12, 9);
        let eig = eigen(&a, false).unwrap();
        let sum: C64 = eig.values.iter().sum();
        assert!((sum - a.trace()).norm() < 1e-11);
        let prod: C64 = eig.values.iter().product();
        let det = a.clone().lu().determinant();
        assert!((prod - det).norm() < 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn eigenvalues_only_matches_full() {
        let a = random_matrix(25, 11);
        let mut v1 = eigen(&a, false).unwrap().values;
        let mut v2 = eigen(&a, true).unwrap().values;
        let key = |z: &C64| (z.re, z.im);
        v1.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        v2.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn triangular_input_returns_diagonal() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 0)] = C64::new(1.0, 0.0);
        a[(1, 1)] = C64::new(0.0, 2.0);
        a[(2, 2)] = C64::new(-3.0, 1.0);
        a[(0, 2)] = C64::new(0.5, 0.5);
        let mut vals = eigen(&a, true).unwrap().values;
        vals.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((vals[0] - C64::new(-3.0, 1.0)).norm() < 1e-14);
        assert!((vals[1] - C64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((vals[2] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hermitian_matrix_has_real_spectrum() {
        let b = random_matrix(10, 3);
        let a = &b + b.adjoint();
        for v in eigen(&a, false).unwrap().values {
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix() {
        let eig = eigen(&CMatrix::zeros(4, 4), true).unwrap();
        assert!(eig.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            eigen(&CMatrix::zeros(2, 3), false),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
