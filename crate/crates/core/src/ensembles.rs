//! Random-matrix inputs: GOE mode spectra, Gaussian channel couplings and
//! nearest-neighbour spacing diagnostics.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Seed;

/// Relative bandwidth above which the rotating-wave flag is raised.
pub const DEFAULT_RWA_THRESHOLD: f64 = 0.1;

/// Fraction of the spectrum (centred) used to fix the mean spacing.
pub const CENTRAL_FRACTION: f64 = 0.5;

/// Closed-cavity mode frequencies `ω_λ`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    frequencies: Vec<f64>,
    carrier: f64,
    mean_spacing: f64,
}

impl ModeSpectrum {
    /// Validates and wraps a spectrum.
    ///
    /// `mean_spacing = None` takes the empirical mean consecutive difference
    /// over the central window (needs at least two modes).
    pub fn new(frequencies: Vec<f64>, carrier: f64, mean_spacing: Option<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::InvalidParameter("spectrum needs at least one mode".into()));
        }
        if !(carrier > 0.0 && carrier.is_finite()) {
            return Err(Error::InvalidParameter(format!("carrier must be > 0, got {carrier}")));
        }
        if frequencies.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite frequency".into()));
        }
        if frequencies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("frequencies must be ascending".into()));
        }
        let min = frequencies[0];
        if min <= 0.0 {
            return Err(Error::NonPositiveFrequency { min });
        }
        let mean_spacing = match mean_spacing {
            Some(d) => d,
            None => central_mean_spacing(&frequencies).ok_or(Error::TooFewModes {
                found: frequencies.len(),
                required: 2,
            })?,
        };
        if !(mean_spacing > 0.0 && mean_spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean spacing must be > 0, got {mean_spacing}"
            )));
        }
        Ok(Self {
            frequencies,
            carrier,
            mean_spacing,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    /// `(max - min) / ω₀`
    pub fn relative_bandwidth(&self) -> f64 {
        (self.frequencies[self.len() - 1] - self.frequencies[0]) / self.carrier
    }

    pub fn rotating_wave_valid(&self, threshold: f64) -> bool {
        self.relative_bandwidth() < threshold
    }
}

/// Index range of the central `fraction` of `n` levels (at least two levels
/// when `n >= 2`).
pub fn central_window(n: usize, fraction: f64) -> Range<usize> {
    let fraction = fraction.clamp(0.0, 1.0);
    let len = ((n as f64) * fraction).round() as usize;
    let len = len.clamp(n.min(2), n);
    let start = (n - len) / 2;
    start..start + len
}

fn central_mean_spacing(levels: &[f64]) -> Option<f64> {
    let w = central_window(levels.len(), CENTRAL_FRACTION);
    if w.len() < 2 {
        return None;
    }
    Some((levels[w.end - 1] - levels[w.start]) / (w.len() - 1) as f64)
}

/// Real symmetric GOE matrix: off-diagonal entries `N(0, 1)`, diagonal
/// entries `N(0, 2)`.
pub fn sample_goe_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        h[(i, i)] = d * 2f64.sqrt();
        for j in i + 1..n {
            let x: f64 = StandardNormal.sample(rng);
            h[(i, j)] = x;
            h[(j, i)] = x;
        }
    }
    h
}

/// Haar-random orthogonal matrix (QR of a Gaussian matrix with the sign of
/// `R`'s diagonal absorbed into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn sorted_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// GOE spectrum centred on `carrier` whose central mean spacing equals
/// `mean_spacing`.
pub fn sample_goe_spectrum(
    n_modes: usize,
    mean_spacing: f64,
    carrier: f64,
    seed: Seed,
) -> Result<ModeSpectrum> {
    if n_modes < 1 {
        return Err(Error::InvalidParameter("n_modes must be >= 1".into()));
    }
    if !(mean_spacing > 0.0 && mean_spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean spacing must be > 0, got {mean_spacing}"
        )));
    }
    if !(carrier > 0.0 && carrier.is_finite()) {
        return Err(Error::InvalidParameter(format!("carrier must be > 0, got {carrier}")));
    }
    let mut rng = seed.rng();
    let levels = sorted_eigenvalues(sample_goe_matrix(n_modes, &mut rng));
    let centre = levels.iter().sum::<f64>() / n_modes as f64;
    let scale = match central_mean_spacing(&levels) {
        Some(s) if s > 0.0 => mean_spacing / s,
        _ => 1.0,
    };
    let frequencies: Vec<f64> = levels
        .iter()
        .map(|l| carrier + (l - centre) * scale)
        .collect();
    ModeSpectrum::new(frequencies, carrier, Some(mean_spacing))
}

/// Channel coupling amplitudes `W_{λm}`, an `N x M` real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() < 1 || entries.ncols() < 1 {
            return Err(Error::InvalidParameter(
                "coupling matrix needs N >= 1 modes and M >= 1 channels".into(),
            ));
        }
        if entries.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coupling entry".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.entries.ncols()
    }

    /// `W -> W O` for an `M x M` channel rotation.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        if rotation.nrows() != self.n_channels() || rotation.ncols() != self.n_channels() {
            return Err(Error::DimensionMismatch {
                expected: self.n_channels(),
                found: rotation.nrows(),
            });
        }
        Self::new(&self.entries * rotation)
    }

    /// `W -> c W`
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.entries * factor)
    }
}

/// Entry variance for dimensionless coupling `x`: `x Δω / (2π²)`.
///
/// With this normalisation the mean amplitude width of a resonance is
/// `x M Δω / (2π)` for `M` equal channels.
pub fn coupling_variance(x: f64, mean_spacing: f64) -> f64 {
    x * mean_spacing / (2.0 * PI * PI)
}

/// Independent Gaussian couplings with per-channel variance
/// [`coupling_variance`]`(x_m, Δω)`.
pub fn sample_coupling(
    n_modes: usize,
    n_channels: usize,
    coupling_x: &[f64],
    mean_spacing: f64,
    seed: Seed,
) -> Result<CouplingMatrix> {
    if n_modes < 1 || n_channels < 1 {
        return Err(Error::InvalidParameter(
            "n_modes and n_channels must be >= 1".into(),
        ));
    }
    if coupling_x.len() != n_channels {
        return Err(Error::InvalidParameter(format!(
            "{} coupling parameters for {} channels",
            coupling_x.len(),
            n_channels
        )));
    }
    if let Some(x) = coupling_x.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "coupling parameter must be > 0, got {x}"
        )));
    }
    if !(mean_spacing > 0.0 && mean_spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean spacing must be > 0, got {mean_spacing}"
        )));
    }
    let mut rng = seed.rng();
    let std: Vec<f64> = coupling_x
        .iter()
        .map(|&x| coupling_variance(x, mean_spacing).sqrt())
        .collect();
    // column-major fill: channel by channel
    let entries = DMatrix::from_fn(n_modes, n_channels, |_, m| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * std[m]
    });
    CouplingMatrix::new(entries)
}

// ---------------------------------------------------------------------------
// Spacing statistics

/// Wigner surmise CDF, `1 - exp(-π s² / 4)`.
pub fn wigner_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-PI * s * s / 4.0).exp()
    }
}

pub fn wigner_pdf(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        0.5 * PI * s * (-PI * s * s / 4.0).exp()
    }
}

pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    WignerGoe,
    Poisson,
}

impl Reference {
    pub fn cdf(self, s: f64) -> f64 {
        match self {
            Reference::WignerGoe => wigner_cdf(s),
            Reference::Poisson => poisson_cdf(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic of `samples` against
/// `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        let f = cdf(s);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_test(samples: &[f64], reference: Reference) -> KsTest {
    let statistic = ks_statistic(samples, |s| reference.cdf(s));
    KsTest {
        statistic,
        p_value: kolmogorov_p_value(statistic, samples.len()),
    }
}

/// Normalized nearest-neighbour spacings with KS tests against the Wigner
/// surmise and the Poisson law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingStatistics {
    pub spacings: Vec<f64>,
    pub reference: Reference,
    pub ks_statistic: f64,
    pub wigner: KsTest,
    pub poisson: KsTest,
}

impl SpacingStatistics {
    /// Renormalizes `spacings` to unit mean and runs both KS tests. Used to
    /// pool spacings from many spectra.
    pub fn from_spacings(mut spacings: Vec<f64>) -> Result<Self> {
        if spacings.is_empty() {
            return Err(Error::TooFewModes {
                found: 0,
                required: 3,
            });
        }
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::InvalidParameter("degenerate spectrum: zero mean spacing".into()));
        }
        spacings.iter_mut().for_each(|s| *s /= mean);
        let wigner = ks_test(&spacings, Reference::WignerGoe);
        let poisson = ks_test(&spacings, Reference::Poisson);
        Ok(Self {
            spacings,
            reference: Reference::WignerGoe,
            ks_statistic: wigner.statistic,
            wigner,
            poisson,
        })
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }

    pub fn test(&self, reference: Reference) -> KsTest {
        match reference {
            Reference::WignerGoe => self.wigner,
            Reference::Poisson => self.poisson,
        }
    }
}

/// How the level staircase is smoothed before taking spacings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unfolding {
    /// Raw spacings rescaled to unit mean.
    None,
    /// Least-squares polynomial fit of the staircase `N(ω)` (degree capped
    /// at `levels - 2`).
    Polynomial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingOptions {
    pub window: f64,
    pub unfolding: Unfolding,
}

impl Default for SpacingOptions {
    fn default() -> Self {
        Self {
            window: CENTRAL_FRACTION,
            unfolding: Unfolding::Polynomial(3),
        }
    }
}

/// Spacing statistics of the central `window` fraction, with the default
/// cubic unfolding.
pub fn spacing_statistics(spectrum: &ModeSpectrum, window: f64) -> Result<SpacingStatistics> {
    spacing_statistics_with(
        spectrum,
        &SpacingOptions {
            window,
            ..Default::default()
        },
    )
}

pub fn spacing_statistics_with(
    spectrum: &ModeSpectrum,
    options: &SpacingOptions,
) -> Result<SpacingStatistics> {
    if !(options.window > 0.0 && options.window <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction must be in (0, 1], got {}",
            options.window
        )));
    }
    let levels = &spectrum.frequencies()[central_window(spectrum.len(), options.window)];
    SpacingStatistics::from_spacings(unfolded_spacings(levels, options.unfolding)?)
}

/// Spacings of ascending `levels` after unfolding (not yet unit-mean).
pub fn unfolded_spacings(levels: &[f64], unfolding: Unfolding) -> Result<Vec<f64>> {
    if levels.len() < 3 {
        return Err(Error::TooFewModes {
            found: levels.len(),
            required: 3,
        });
    }
    let unfolded: Vec<f64> = match unfolding {
        Unfolding::None => levels.to_vec(),
        Unfolding::Polynomial(degree) => staircase_fit(levels, degree.min(levels.len() - 2))?,
    };
    Ok(unfolded.windows(2).map(|w| w[1] - w[0]).collect())
}

fn staircase_fit(levels: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = levels.len();
    let lo = levels[0];
    let hi = levels[n - 1];
    let half = 0.5 * (hi - lo);
    if !(half > 0.0) {
        return Err(Error::InvalidParameter("degenerate spectrum: zero width window".into()));
    }
    let mid = 0.5 * (hi + lo);
    let xs: Vec<f64> = levels.iter().map(|l| (l - mid) / half).collect();
    let vander = DMatrix::from_fn(n, degree + 1, |i, p| xs[i].powi(p as i32));
    let counts = DVector::from_fn(n, |i, _| i as f64);
    let coeffs = vander
        .clone()
        .svd(true, true)
        .solve(&counts, 1e-13)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((&vander * coeffs).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Purpose;

    #[test]
    fn single_mode_sits_on_carrier() {
        let s = sample_goe_spectrum(1, 1.0, 100.0, Seed::new(5)).unwrap();
        assert_eq!(s.frequencies(), &[100.0]);
        assert_eq!(s.mean_spacing(), 1.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let seed = Seed::substream(3, 11, Purpose::Spectrum);
        let a = sample_goe_spectrum(40, 0.7, 50.0, seed).unwrap();
        let b = sample_goe_spectrum(40, 0.7, 50.0, seed).unwrap();
        let bits = |s: &ModeSpectrum| s.frequencies().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = sample_goe_spectrum(40, 0.7, 50.0, Seed::substream(3, 12, Purpose::Spectrum)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn central_spacing_matches_request() {
        for n in [2, 3, 10, 101] {
            let s = sample_goe_spectrum(n, 2.5, 1e3, Seed::new(n as u64)).unwrap();
            let w = central_window(n, CENTRAL_FRACTION);
            let f = s.frequencies();
            let emp = (f[w.end - 1] - f[w.start]) / (w.len() - 1) as f64;
            assert!((emp - 2.5).abs() <= 1e-12 * 2.5, "n={n}: {emp}");
            assert!(f.windows(2).all(|w| w[0] <= w[1]));
            let mean = f.iter().sum::<f64>() / n as f64;
            assert!((mean - 1e3).abs() < 1e-9);
        }
    }

    #[test]
    fn small_carrier_is_rejected() {
        let e = sample_goe_spectrum(50, 1.0, 1.0, Seed::new(1)).unwrap_err();
        assert!(matches!(e, Error::NonPositiveFrequency { .. }));
    }

    #[test]
    fn parameter_guards() {
        assert!(matches!(
            sample_goe_spectrum(0, 1.0, 10.0, Seed::new(1)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            sample_goe_spectrum(3, 0.0, 10.0, Seed::new(1)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            sample_coupling(4, 1, &[0.0], 1.0, Seed::new(1)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            sample_coupling(4, 2, &[1.0], 1.0, Seed::new(1)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn rotating_wave_flag() {
        let s = ModeSpectrum::new(vec![9.0, 10.0, 11.0], 10.0, None).unwrap();
        assert!((s.relative_bandwidth() - 0.2).abs() < 1e-15);
        assert!(!s.rotating_wave_valid(DEFAULT_RWA_THRESHOLD));
        assert!(s.rotating_wave_valid(0.3));
    }

    #[test]
    fn goe_matrix_is_exactly_symmetric_and_orthogonally_invariant() {
        let mut rng = Seed::new(99).rng();
        let h = sample_goe_matrix(30, &mut rng);
        assert_eq!(h, h.transpose());
        let o = random_orthogonal(30, &mut rng);
        let rotated = &o * &h * o.transpose();
        let rotated = (&rotated + rotated.transpose()) * 0.5;
        let a = sorted_eigenvalues(h);
        let b = sorted_eigenvalues(rotated);
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn goe_variance_ratio() {
        let mut rng = Seed::new(4).rng();
        let (mut diag, mut off, mut nd, mut no) = (0.0, 0.0, 0usize, 0usize);
        for _ in 0..50 {
            let h = sample_goe_matrix(40, &mut rng);
            for i in 0..40 {
                diag += h[(i, i)] * h[(i, i)];
                nd += 1;
                for j in i + 1..40 {
                    off += h[(i, j)] * h[(i, j)];
                    no += 1;
                }
            }
        }
        let ratio = (diag / nd as f64) / (off / no as f64);
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn equally_spaced_spectrum() {
        let s = ModeSpectrum::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 3.0, None).unwrap();
        let st = spacing_statistics(&s, 1.0).unwrap();
        assert_eq!(st.spacings.len(), 4);
        for x in &st.spacings {
            assert!((x - 1.0).abs() < 1e-12);
        }
        // sup of |F_W - step| sits just below s = 1
        let expected = wigner_cdf(1.0).max(1.0 - wigner_cdf(1.0));
        assert!((st.ks_statistic - expected).abs() < 1e-12);
        assert!((expected - (1.0 - (-PI / 4.0).exp())).abs() < 1e-15);
    }

    #[test]
    fn too_few_modes_in_window() {
        let s = ModeSpectrum::new(vec![1.0, 2.0], 1.5, None).unwrap();
        assert!(matches!(
            spacing_statistics(&s, 1.0),
            Err(Error::TooFewModes { found: 2, .. })
        ));
    }

    #[test]
    fn spacings_have_unit_mean() {
        let s = sample_goe_spectrum(120, 1.0, 1e3, Seed::new(8)).unwrap();
        for unfolding in [Unfolding::None, Unfolding::Polynomial(3)] {
            let st = spacing_statistics_with(&s, &SpacingOptions { window: 0.5, unfolding }).unwrap();
            assert!((st.mean() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn coupling_is_deterministic() {
        let seed = Seed::substream(1, 2, Purpose::Coupling);
        let a = sample_coupling(10, 3, &[1.0, 0.5, 2.0], 1.0, seed).unwrap();
        let b = sample_coupling(10, 3, &[1.0, 0.5, 2.0], 1.0, seed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kolmogorov_p_value_limits() {
        assert_eq!(kolmogorov_p_value(0.0, 100), 1.0);
        assert!(kolmogorov_p_value(0.5, 1000) < 1e-100);
        // tabulated: λ = 1.36 ↔ p ≈ 0.049
        let n = 1_000_000;
        let d = 1.358 / (n as f64).sqrt();
        assert!((kolmogorov_p_value(d, n) - 0.05).abs() < 2e-3);
    }
}
