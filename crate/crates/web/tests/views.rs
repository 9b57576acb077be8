use chaotic_cavity_web::{laser, resonances, spacings, MAX_MODES};

#[test]
fn resonances_are_damped_and_non_orthogonal() {
    let r = resonances(30, 2, 1.0, 7).unwrap();
    assert_eq!(r.detuning.len(), 30);
    assert!(r.width.iter().all(|g| *g > 0.0));
    assert!(r.petermann.iter().all(|k| *k >= 1.0 - 1e-9));
    let narrowest = r.width[r.narrowest];
    assert!(r.width.iter().all(|g| *g >= narrowest));
}

#[test]
fn resonances_are_reproducible() {
    let a = serde_json::to_string(&resonances(12, 1, 0.5, 3).unwrap()).unwrap();
    let b = serde_json::to_string(&resonances(12, 1, 0.5, 3).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn laser_linewidth_is_petermann_enhanced() {
    let l = laser(12, 2, 1.0, 1, 2.0).unwrap();
    assert!(l.intensity > 0.0);
    assert!((l.linewidth / (l.petermann * l.schawlow_townes) - 1.0).abs() < 1e-9);
    let fit = l.fitted_half_width.unwrap();
    assert!((fit / l.linewidth - 1.0).abs() < 1e-3);
    let peak = l.spectrum.iter().copied().fold(0.0, f64::max);
    assert!((peak - 1.0).abs() < 1e-12);
    let centre = l.grid.iter().position(|w| w.abs() < 1e-12).unwrap();
    assert!((l.spectrum[centre] - 1.0).abs() < 1e-2);
}

#[test]
fn spacing_histogram_is_a_density() {
    let s = spacings(60, 20, 5, 40).unwrap();
    let width = s.bin_edges[1] - s.bin_edges[0];
    let mass: f64 = s.density.iter().sum::<f64>() * width;
    assert!(mass > 0.97 && mass <= 1.0 + 1e-12);
    let wigner: f64 = s.wigner.iter().sum::<f64>() * width;
    assert!((wigner - 1.0).abs() < 1e-4);
    assert!(s.wigner_p > s.poisson_p);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(resonances(MAX_MODES + 1, 1, 1.0, 0).is_err());
    assert!(resonances(10, 0, 1.0, 0).is_err());
    assert!(resonances(10, 1, -1.0, 0).is_err());
    assert!(laser(10, 1, 1.0, 0, 0.5).is_err());
    assert!(spacings(3, 1, 0, 10).is_err());
    assert!(spacings(10, 0, 0, 10).is_err());
}
