//! Spectral-asymmetry flips along a Gaussian pulse-area sweep: the
//! normalized reflection spectrum of the driven ensemble changes its skew
//! every time the pulse area crosses a multiple of π.
//!
//! Run with: cargo run -p nucavity --example gaussian_flip_sweep

use nucavity::dicke::{evolve, DickeState, EvolveConfig, SpontaneousMode};
use nucavity::pulse::{centered_grid, gaussian_pulse, photons_for_area, FWHM_TO_SIGMA};
use nucavity::spectrum::{coherent_spectrum, detect_symmetry, line_window_grid, SymmetryConfig};
use nucavity::SystemParams;

const PI: f64 = std::f64::consts::PI;

/// Cavity rates of the Pt/C/⁵⁷Fe/C/Pt structure, with the collective
/// coupling chosen so the superradiant width is 30 γ and Δ_C = κ.
fn cavity_params(n: usize) -> SystemParams {
    let gamma: f64 = 7.09e6; // 141 ns lifetime
    let kappa = 1.4e6 * gamma;
    let g_sqrt_n = (90.0 * gamma * kappa).sqrt();
    SystemParams::from_collective(n, gamma, g_sqrt_n, kappa, 0.4 * kappa, kappa).unwrap()
}

fn main() -> nucavity::Result<()> {
    let params = cavity_params(100);
    let sigma_t = 100e-15 * FWHM_TO_SIGMA;
    let grid = centered_grid(sigma_t, 8.0, 64);
    let omega = line_window_grid(&params, SpontaneousMode::Auto, 10.0, 801);
    let center = params.lamb_shift();
    let width = params.collective_rate();
    let cfg = EvolveConfig::fast();

    let mut last: Option<(f64, f64)> = None;
    for area_pi in [0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 3.25] {
        let nph = photons_for_area(area_pi * PI, params.xi(), sigma_t);
        let pulse = gaussian_pulse(sigma_t, nph, &grid)?;
        let (rec, _) = evolve(&params, &DickeState::ground(params.n_atoms), &pulse, &cfg)?;
        let sp = coherent_spectrum(&rec, &omega)?;
        let sym = detect_symmetry(&omega, &sp.normalized, center, width, &SymmetryConfig::default())?;
        println!(
            "area={area_pi:.2}π  asymmetry={:+.4e}  {:?}",
            sym.asymmetry, sym.classification
        );
        if let Some((a0, s0)) = last {
            if s0 != sym.asymmetry.signum() {
                println!("  -> sign flip between {a0:.2}π and {area_pi:.2}π");
            }
        }
        last = Some((area_pi, sym.asymmetry.signum()));
    }
    Ok(())
}
