//! Cavity-parameter fit round trip: synthesize a rocking curve and a
//! nuclear line spectrum from known (κ, κ_R, θ₀, g√N), fit them back, and
//! compare.
//!
//! Run with: cargo run -p nucavity --example cavity_fit_roundtrip

use nucavity::cavityfit::{fit_cavity_params, synthetic_fit_data};

fn main() -> nucavity::Result<()> {
    // rates in units of gamma
    let gamma = 1.0;
    let kappa: f64 = 1.4e6;
    let kappa_r = 0.4 * kappa;
    let theta0 = 3.5e-3;
    let g_sqrt_n = (90.0 * kappa).sqrt();
    let omega0 = 3.0e12;

    let slope = omega0 * theta0;
    let theta: Vec<f64> = (0..321)
        .map(|i| theta0 - 8.0e-4 + 1.6e-3 * i as f64 / 320.0)
        .collect();
    let theta_spectrum = theta0 + kappa / slope;
    let detuning: Vec<f64> = (0..401).map(|i| -335.0 + (335.0 + 275.0) * i as f64 / 400.0).collect();

    let data = synthetic_fit_data(
        kappa, kappa_r, theta0, g_sqrt_n, gamma, omega0, theta, theta_spectrum, detuning,
    );
    let fit = fit_cavity_params(&data, omega0)?;

    for (name, truth, got) in [
        ("kappa", kappa, fit.kappa),
        ("kappa_r", kappa_r, fit.kappa_r),
        ("theta0", theta0, fit.theta0),
        ("g_sqrt_n", g_sqrt_n, fit.g_sqrt_n),
    ] {
        println!(
            "{name:9}  truth {truth:.6e}  fit {got:.6e}  rel. error {:.2e}",
            (got / truth - 1.0).abs()
        );
    }
    println!("residual {:.3e} after {} iterations", fit.residual, fit.iterations);
    Ok(())
}
