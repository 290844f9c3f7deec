//! Extraction of quantum-optical cavity parameters from reflectivity data.
//!
//! The linear-response reflection model depends on the rates (κ, κ_R), the
//! mode angle θ₀, the collective coupling G = g√N and the angle→detuning
//! map Δ_C(θ). The fit runs jointly (unit weights) over a rocking curve
//! sampled off the nuclear resonance and a frequency spectrum sampled at one
//! fixed angle near the mode.
//!
//! Identifiability note: all linear-response observables depend on κ and the
//! detuning slope only through their ratio, so a free slope makes the
//! absolute frequency scale of κ unobservable. The slope is therefore tied
//! to its physical value Δ_C(θ) = ω₀·θ₀·(θ − θ₀) (carrier frequency times
//! mode angle) and varies only through θ₀.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lm::{levenberg_marquardt, LmConfig};
use crate::reflectivity::find_mode_angles;

/// Joint fit input: a rocking curve (off nuclear resonance) plus one
/// normalized frequency spectrum at `theta_spectrum`. Rates and detunings
/// share one frequency unit; angles are in rad.
#[derive(Debug, Clone)]
pub struct CavityFitData {
    pub theta: Vec<f64>,
    /// |r(θ)|² off the nuclear line.
    pub rocking: Vec<f64>,
    /// Angle at which `spectrum` was recorded.
    pub theta_spectrum: f64,
    /// Detuning grid of the nuclear-line spectrum.
    pub detuning: Vec<f64>,
    /// Normalized reflected intensity on `detuning`.
    pub spectrum: Vec<f64>,
    /// Single-nucleus linewidth γ entering the nuclear line half-width.
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CavityFit {
    pub kappa: f64,
    pub kappa_r: f64,
    /// Guided-mode angle (rad).
    pub theta0: f64,
    /// Collective coupling g√N.
    pub g_sqrt_n: f64,
    /// dΔ_C/dθ = ω₀·θ₀ evaluated at the fitted θ₀.
    pub delta_c_slope: f64,
    /// RMS residual over all fitted points.
    pub residual: f64,
    pub iterations: usize,
}

/// Empty-cavity reflection |2κ_R/(κ + iΔ_C) − 1|² as a function of angle.
pub fn rocking_model(kappa: f64, kappa_r: f64, delta_c: f64) -> f64 {
    (2.0 * kappa_r / C64::new(kappa, delta_c) - 1.0).norm_sqr()
}

/// Linear-response reflection amplitude at collective coupling G = g√N:
///
/// ```text
/// r(Δ) = c_bg − (4/3)κ_R G²/(κ + iΔ_C)² / (Γ + i(Δ_L − Δ))
/// Γ = (2/3)G²κ/(κ² + Δ_C²) + γ/2,   Δ_L = −(2/3)G²Δ_C/(κ² + Δ_C²)
/// ```
pub fn spectrum_model_amplitude(
    kappa: f64,
    kappa_r: f64,
    g_sqrt_n: f64,
    gamma: f64,
    delta_c: f64,
    detuning: f64,
) -> C64 {
    let denom = C64::new(kappa, delta_c);
    let zeta_n = 2.0 / 3.0 * g_sqrt_n * g_sqrt_n / denom;
    let c_bg = 2.0 * kappa_r / denom - 1.0;
    let n_xi_sq = 4.0 / 3.0 * kappa_r * g_sqrt_n * g_sqrt_n / (denom * denom);
    c_bg - n_xi_sq / C64::new(zeta_n.re + 0.5 * gamma, zeta_n.im - detuning)
}

/// Location, half width and size of the dominant feature of `y` relative to
/// its edge baseline; `None` if the curve is essentially flat.
pub(crate) fn feature_estimate(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = y.len();
    let edge = (n / 10).max(1);
    let baseline = (y[..edge].iter().sum::<f64>() + y[n - edge..].iter().sum::<f64>())
        / (2 * edge) as f64;
    let (i_star, dev) = y
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, (v - baseline).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    if dev < 1e-3 * baseline.abs().max(1e-12) {
        return None;
    }
    let half = 0.5 * dev;
    let mut left = x[0];
    for i in (0..i_star).rev() {
        if (y[i] - baseline).abs() <= half {
            left = x[i];
            break;
        }
    }
    let mut right = x[n - 1];
    for i in i_star + 1..n {
        if (y[i] - baseline).abs() <= half {
            right = x[i];
            break;
        }
    }
    let hwhm = 0.5 * (right - left);
    Some((x[i_star], hwhm.max(x[1] - x[0]), baseline, dev))
}

/// Fit (κ, κ_R, θ₀, g√N) to the joint data. `omega0` is the carrier
/// frequency in the same unit as the rates; it fixes the angle→detuning
/// slope ω₀θ₀.
///
/// Initialization (deterministic): θ₀ from the deepest rocking minimum; κ
/// from the dip's angular half width times ω₀θ₀; κ_R from the dip depth on
/// the undercoupled branch κ_R ≤ κ/2; G from the nuclear-line half width.
pub fn fit_cavity_params(data: &CavityFitData, omega0: f64) -> Result<CavityFit> {
    if data.theta.len() != data.rocking.len() || data.detuning.len() != data.spectrum.len() {
        return Err(Error::GridMismatch("fit data grids and values differ in length".into()));
    }
    if !(omega0 > 0.0) || !(data.gamma > 0.0) {
        return Err(Error::Invalid("omega0 and gamma must be positive".into()));
    }

    // --- initialization heuristic ---
    let modes = find_mode_angles(&data.theta, &data.rocking, 0.02)?;
    let deepest = |&t: &f64| {
        let i = data
            .theta
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap();
        data.rocking[i]
    };
    let theta0_init = *modes
        .iter()
        .min_by(|a, b| deepest(a).total_cmp(&deepest(b)))
        .unwrap();
    let slope_init = omega0 * theta0_init;
    let (_, dip_hwhm, baseline, depth) =
        feature_estimate(&data.theta, &data.rocking).ok_or(Error::NoModes)?;
    let kappa_init = (dip_hwhm * slope_init).max(data.gamma);
    // dip depth (2r−1)² relative to baseline; undercoupled branch r ≤ 1/2
    let floor = ((baseline - depth) / baseline.max(1e-12)).clamp(0.0, 1.0);
    let r_init = (0.5 * (1.0 - floor.sqrt())).clamp(1e-3, 0.5);
    // nuclear line: Γ − γ/2 = (2/3)G²κ/(κ² + Δ_C²)
    let delta_c_s = slope_init * (data.theta_spectrum - theta0_init);
    let g_init = match feature_estimate(&data.detuning, &data.spectrum) {
        Some((_, line_hwhm, _, _)) => {
            let gamma_coll = (line_hwhm - 0.5 * data.gamma).max(data.gamma);
            (1.5 * gamma_coll * (kappa_init * kappa_init + delta_c_s * delta_c_s) / kappa_init)
                .sqrt()
        }
        None => 0.0,
    };
    let g_scale = if g_init > 0.0 { g_init } else { (kappa_init * data.gamma).sqrt() };

    // --- scaled joint least squares ---
    let x0 = [1.0, r_init, 1.0, g_init / g_scale];
    let lower = [1e-2, 1e-3, data.theta[0] / theta0_init, 0.0];
    let upper = [
        1e2,
        0.999,
        data.theta[data.theta.len() - 1] / theta0_init,
        1e3,
    ];
    let residuals = |x: &[f64], out: &mut Vec<f64>| {
        out.clear();
        let kappa = x[0] * kappa_init;
        let kappa_r = x[1] * kappa;
        let theta0 = x[2] * theta0_init;
        let g = x[3] * g_scale;
        let slope = omega0 * theta0;
        for (&t, &y) in data.theta.iter().zip(&data.rocking) {
            out.push(rocking_model(kappa, kappa_r, slope * (t - theta0)) - y);
        }
        let dc = slope * (data.theta_spectrum - theta0);
        for (&d, &y) in data.detuning.iter().zip(&data.spectrum) {
            let amp = spectrum_model_amplitude(kappa, kappa_r, g, data.gamma, dc, d);
            out.push(amp.norm_sqr() - y);
        }
    };
    let res = levenberg_marquardt(residuals, &x0, &lower, &upper, &LmConfig::default())?;

    let kappa = res.params[0] * kappa_init;
    let theta0 = res.params[2] * theta0_init;
    let n_pts = data.theta.len() + data.detuning.len();
    Ok(CavityFit {
        kappa,
        kappa_r: res.params[1] * kappa,
        theta0,
        g_sqrt_n: res.params[3] * g_scale,
        delta_c_slope: omega0 * theta0,
        residual: (2.0 * res.cost / n_pts as f64).sqrt(),
        iterations: res.iterations,
    })
}

/// Evaluate the fit model itself on the data grids (used for round-trip
/// checks and synthetic data generation).
pub fn synthetic_fit_data(
    kappa: f64,
    kappa_r: f64,
    theta0: f64,
    g_sqrt_n: f64,
    gamma: f64,
    omega0: f64,
    theta: Vec<f64>,
    theta_spectrum: f64,
    detuning: Vec<f64>,
) -> CavityFitData {
    let slope = omega0 * theta0;
    let rocking = theta
        .iter()
        .map(|&t| rocking_model(kappa, kappa_r, slope * (t - theta0)))
        .collect();
    let dc = slope * (theta_spectrum - theta0);
    let spectrum = detuning
        .iter()
        .map(|&d| spectrum_model_amplitude(kappa, kappa_r, g_sqrt_n, gamma, dc, d).norm_sqr())
        .collect();
    CavityFitData { theta, rocking, theta_spectrum, detuning, spectrum, gamma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // gamma = 1 units
    const KAPPA: f64 = 1.4e6;
    const R: f64 = 0.4;
    const THETA0: f64 = 3.5e-3;
    const OMEGA0: f64 = 3.0e12;

    fn grids() -> (Vec<f64>, f64, Vec<f64>) {
        let theta: Vec<f64> = (0..321)
            .map(|i| THETA0 - 8e-4 + i as f64 * 5e-6)
            .collect();
        // spectrum taken one cavity linewidth off the mode (Delta_C = kappa)
        let theta_s = THETA0 + KAPPA / (OMEGA0 * THETA0);
        // line sits near Delta_L = -30 with half width about 30.5
        let detuning: Vec<f64> = (0..401).map(|i| -335.0 + i as f64 * 1.525).collect();
        (theta, theta_s, detuning)
    }

    fn truth() -> CavityFitData {
        let g = (90.0 * KAPPA).sqrt();
        let (theta, theta_s, detuning) = grids();
        synthetic_fit_data(KAPPA, R * KAPPA, THETA0, g, 1.0, OMEGA0, theta, theta_s, detuning)
    }

    #[test]
    fn round_trip_recovers_parameters() {
        let data = truth();
        let fit = fit_cavity_params(&data, OMEGA0).unwrap();
        let g = (90.0 * KAPPA).sqrt();
        assert!((fit.kappa / KAPPA - 1.0).abs() < 1e-3, "kappa {}", fit.kappa);
        assert!((fit.kappa_r / (R * KAPPA) - 1.0).abs() < 1e-3);
        assert!((fit.theta0 / THETA0 - 1.0).abs() < 1e-3);
        assert!((fit.g_sqrt_n / g - 1.0).abs() < 1e-3);
        assert!(fit.residual < 1e-8);
        assert!(fit.kappa_r <= fit.kappa);
    }

    #[test]
    fn one_percent_noise_recovers_within_five_percent() {
        let mut data = truth();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut jitter = |v: &mut Vec<f64>| {
            for y in v.iter_mut() {
                // uniform +-1% multiplicative noise
                *y *= 1.0 + 0.01 * (2.0 * rng.gen::<f64>() - 1.0);
            }
        };
        jitter(&mut data.rocking);
        jitter(&mut data.spectrum);
        let fit = fit_cavity_params(&data, OMEGA0).unwrap();
        let g = (90.0 * KAPPA).sqrt();
        assert!((fit.kappa / KAPPA - 1.0).abs() < 0.05);
        assert!((fit.kappa_r / (R * KAPPA) - 1.0).abs() < 0.05);
        assert!((fit.theta0 / THETA0 - 1.0).abs() < 0.05);
        assert!((fit.g_sqrt_n / g - 1.0).abs() < 0.05);
    }

    #[test]
    fn empty_cavity_fits_zero_coupling() {
        let (theta, theta_s, detuning) = grids();
        let data = synthetic_fit_data(
            KAPPA,
            R * KAPPA,
            THETA0,
            0.0,
            1.0,
            OMEGA0,
            theta,
            theta_s,
            detuning,
        );
        let fit = fit_cavity_params(&data, OMEGA0).unwrap();
        assert!((fit.kappa / KAPPA - 1.0).abs() < 1e-3);
        assert!((fit.kappa_r / (R * KAPPA) - 1.0).abs() < 1e-3);
        assert!((fit.theta0 / THETA0 - 1.0).abs() < 1e-3);
        // g√N collapses to (numerically) zero coupling
        assert!(fit.g_sqrt_n * fit.g_sqrt_n / KAPPA < 1e-3);
    }
}
