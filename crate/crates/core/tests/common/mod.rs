#![allow(dead_code)]

use chaotic_cavity::effective::{
    build_damping, build_dynamical, resonances, DampingMatrix, DynamicalMatrix, ResonanceOptions, ResonanceSet,
};
use chaotic_cavity::ensembles::{sample_coupling, sample_goe_spectrum, CouplingMatrix, ModeSpectrum};
use chaotic_cavity::laser::GainMedium;
use chaotic_cavity::seed::{Purpose, Seed};

pub struct Instance {
    pub spectrum: ModeSpectrum,
    pub coupling: CouplingMatrix,
    pub damping: DampingMatrix,
    pub dynamics: DynamicalMatrix,
}

impl Instance {
    pub fn from_parts(spectrum: ModeSpectrum, coupling: CouplingMatrix) -> Self {
        let damping = build_damping(&coupling);
        let dynamics = build_dynamical(&spectrum, &damping).unwrap();
        Self {
            spectrum,
            coupling,
            damping,
            dynamics,
        }
    }

    pub fn resonances(&self) -> ResonanceSet {
        resonances(&self.dynamics, &ResonanceOptions::default()).unwrap()
    }
}

/// GOE spectrum with unit spacing on a carrier far above the band.
pub fn goe(n: usize, m: usize, x: f64, master: u64, index: u64) -> Instance {
    let carrier = 10.0 * n as f64 + 100.0;
    let spectrum = sample_goe_spectrum(n, 1.0, carrier, Seed::substream(master, index, Purpose::Spectrum)).unwrap();
    let coupling = sample_coupling(n, m, &vec![x; m], 1.0, Seed::substream(master, index, Purpose::Coupling)).unwrap();
    Instance::from_parts(spectrum, coupling)
}

pub fn medium() -> GainMedium {
    GainMedium::new(0.0, 1e3, 1.0, 200.0, 300.0).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
