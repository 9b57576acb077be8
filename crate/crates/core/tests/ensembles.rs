mod common;

use chaotic_cavity::ensembles::{
    coupling_variance, kolmogorov_p_value, ks_statistic, poisson_cdf, random_orthogonal, sample_coupling,
    sample_goe_spectrum, spacing_statistics, unfolded_spacings, wigner_cdf, wigner_pdf, ModeSpectrum, Reference,
    SpacingStatistics, Unfolding, CENTRAL_FRACTION,
};
use chaotic_cavity::seed::{Purpose, Seed};
use chaotic_cavity::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn wigner_surmise_is_a_normalized_density() {
    // trapezoid integral of the pdf against the closed-form cdf
    let h = 1e-4;
    let mut acc = 0.0;
    let mut s = 0.0;
    while s < 6.0 {
        acc += 0.5 * h * (wigner_pdf(s) + wigner_pdf(s + h));
        s += h;
    }
    assert!((acc - 1.0).abs() < 1e-8);
    assert!((acc - wigner_cdf(6.0)).abs() < 1e-8);
    // mean spacing is one: ∫ s p(s) ds
    let mut mean = 0.0;
    let mut s = 0.0;
    while s < 8.0 {
        mean += 0.5 * h * (s * wigner_pdf(s) + (s + h) * wigner_pdf(s + h));
        s += h;
    }
    assert!((mean - 1.0).abs() < 1e-7);
    assert!((wigner_cdf(1.0) - (1.0 - (-PI / 4.0).exp())).abs() < 1e-15);
    assert!((poisson_cdf(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
}

#[test]
fn kolmogorov_p_value_reference_points() {
    // P(√n D > 1.36) ≈ 0.05 and P(√n D > 1.63) ≈ 0.01 for large n
    let n = 1_000_000;
    let sn = (n as f64).sqrt();
    assert!((kolmogorov_p_value(1.358 / sn, n) - 0.05).abs() < 2e-3);
    assert!((kolmogorov_p_value(1.628 / sn, n) - 0.01).abs() < 5e-4);
}

#[test]
fn ks_statistic_of_exact_quantiles_is_small() {
    let n = 1000;
    let samples: Vec<f64> = (0..n).map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln()).collect();
    let d = ks_statistic(&samples, poisson_cdf);
    assert!((d - 0.5 / n as f64).abs() < 1e-12);
}

#[test]
fn pooled_goe_spacings_follow_wigner() {
    let mut pooled = Vec::new();
    for r in 0..60 {
        let s = sample_goe_spectrum(200, 1.0, 1e4, Seed::substream(3, r, Purpose::Spectrum)).unwrap();
        pooled.extend(spacing_statistics(&s, CENTRAL_FRACTION).unwrap().spacings);
    }
    let stats = SpacingStatistics::from_spacings(pooled).unwrap();
    assert!(stats.spacings.len() > 5000);
    assert!(stats.test(Reference::WignerGoe).p_value > 0.01);
    assert!(stats.test(Reference::Poisson).p_value < 1e-10);
    // level repulsion: very few spacings below 0.1
    let small = stats.spacings.iter().filter(|&&s| s < 0.1).count() as f64 / stats.spacings.len() as f64;
    assert!((small - wigner_cdf(0.1)).abs() < 0.01);
}

#[test]
fn uniform_random_levels_look_poisson() {
    use rand::Rng;
    let mut rng = Seed::new(8).rng();
    let mut levels: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
    levels.sort_by(f64::total_cmp);
    let spacings = unfolded_spacings(&levels, Unfolding::None).unwrap();
    let stats = SpacingStatistics::from_spacings(spacings).unwrap();
    assert!(stats.test(Reference::Poisson).p_value > 0.01);
    assert!(stats.test(Reference::WignerGoe).p_value < 1e-10);
}

#[test]
fn coupling_entries_have_requested_variance() {
    let (n, m, x, dw) = (400, 5, 0.7, 2.0);
    let w = sample_coupling(n, m, &vec![x; m], dw, Seed::new(1)).unwrap();
    let entries = w.entries();
    let mean = entries.iter().sum::<f64>() / (n * m) as f64;
    let var = entries.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n * m - 1) as f64;
    let expected = coupling_variance(x, dw);
    // standard error of a sample variance: σ²√(2/(n-1))
    assert!((var - expected).abs() < 4.0 * expected * (2.0 / (n * m) as f64).sqrt());
    assert!(mean.abs() < 4.0 * (expected / (n * m) as f64).sqrt());
}

#[test]
fn per_channel_variances_differ() {
    let w = sample_coupling(2000, 2, &[0.1, 1.0], 1.0, Seed::new(2)).unwrap();
    let col = |m: usize| w.entries().column(m).iter().map(|v| v * v).sum::<f64>() / 2000.0;
    let ratio = col(1) / col(0);
    assert!((ratio - 10.0).abs() < 1.5);
}

#[test]
fn negative_spacing_and_carrier_are_rejected() {
    assert!(matches!(
        sample_goe_spectrum(10, -1.0, 100.0, Seed::new(0)),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        sample_goe_spectrum(100, 1.0, 5.0, Seed::new(0)),
        Err(Error::NonPositiveFrequency { .. })
    ));
    assert!(ModeSpectrum::new(vec![1.0, -1.0], 1.0, None).is_err());
}

#[test]
fn substreams_are_independent() {
    let a = sample_goe_spectrum(30, 1.0, 100.0, Seed::substream(5, 0, Purpose::Spectrum)).unwrap();
    let b = sample_goe_spectrum(30, 1.0, 100.0, Seed::substream(5, 1, Purpose::Spectrum)).unwrap();
    let c = sample_goe_spectrum(30, 1.0, 100.0, Seed::substream(5, 0, Purpose::Spectrum)).unwrap();
    assert_ne!(a.frequencies(), b.frequencies());
    assert_eq!(a.frequencies(), c.frequencies());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectra_are_sorted_and_centred(n in 2usize..60, seed in any::<u64>()) {
        let s = sample_goe_spectrum(n, 1.0, 1e3, Seed::new(seed)).unwrap();
        let f = s.frequencies();
        prop_assert!(f.windows(2).all(|w| w[0] <= w[1]));
        let mean = f.iter().sum::<f64>() / n as f64;
        prop_assert!((mean - 1e3).abs() < 1e-9 * 1e3);
    }

    #[test]
    fn random_orthogonal_is_orthogonal(n in 1usize..20, seed in any::<u64>()) {
        let mut rng = Seed::new(seed).rng();
        let o = random_orthogonal(n, &mut rng);
        let err = (o.transpose() * &o - nalgebra::DMatrix::<f64>::identity(n, n)).norm();
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn rotated_coupling_preserves_wwt(n in 1usize..12, m in 1usize..5, seed in any::<u64>()) {
        let w = sample_coupling(n, m, &vec![1.0; m], 1.0, Seed::new(seed)).unwrap();
        let mut rng = Seed::substream(seed, 0, Purpose::Spare).rng();
        let o = random_orthogonal(m, &mut rng);
        let wo = w.rotated(&o).unwrap();
        let a = w.entries() * w.entries().transpose();
        let b = wo.entries() * wo.entries().transpose();
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + w.entries().norm_squared()));
    }
}
