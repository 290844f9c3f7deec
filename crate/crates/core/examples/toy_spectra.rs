//! Closed-form single-resonance interference spectra for a few pulse areas:
//! an absorption dip in the weak-field limit, a flat spectrum at Φ = π, a
//! gain peak beyond inversion and a Fano-like profile with a 90° phase.
//!
//! Run with: cargo run -p nucavity --example toy_spectra

use nucavity::fourier::symmetric_grid;
use nucavity::spectrum::{detect_symmetry, SymmetryConfig};
use nucavity::toy::{toy_spectrum, ToyParams};

fn main() -> nucavity::Result<()> {
    let omega = symmetric_grid(20.0, 2001); // ±20 γ around the line
    let cases = [
        ("weak dip", 0.02, 0.0),
        ("inversion point", 1.0, 0.0),
        ("gain peak", 1.5, 0.0),
        ("fano", 0.02, std::f64::consts::FRAC_PI_2),
    ];
    for (label, area_pi, phase) in cases {
        let phi = area_pi * std::f64::consts::PI;
        let d = 0.8;
        let p = ToyParams::new(phi / (2.0 * d), d, 1.3, 1.0, phase, 0.0)?;
        let s = toy_spectrum(&p, &omega);
        let background = p.a0 * p.a0;
        let mid = s[s.len() / 2];
        let sym = detect_symmetry(&omega, &s, 0.0, 0.5, &SymmetryConfig::default())?;
        println!(
            "{label:16}  area={area_pi:.2}π  phase={phase:.2}  S(0)/|A0|²={:.4}  asymmetry={:+.3e}  {:?}",
            mid / background,
            sym.asymmetry,
            sym.classification
        );
    }
    Ok(())
}
