//! Reflection spectra of the driven ensemble.
//!
//! The coherently reflected intensity is |ã_out(ω)|² with ã_out the Fourier
//! transform of the output field record; the normalized spectrum divides by
//! the drive spectrum |ã_in(ω)|² wherever the drive carries weight. For weak
//! driving the master equation closes on ⟨J₋⟩ and the spectrum has the
//! closed form implemented in [`linear_response_amplitude`].

use num_complex::Complex64 as C64;

use crate::dicke::{gamma_se, OutputRecord, SpontaneousMode};
use crate::error::{Error, Result};
use crate::fourier::fourier_quadrature;
use crate::lm::{levenberg_marquardt, LmConfig};
use crate::params::SystemParams;

/// Frequencies where the drive spectrum falls below this fraction of its
/// maximum are excluded from the normalized spectrum.
pub const DRIVE_FLOOR: f64 = 1e-6;

/// Reflection spectrum on an explicit detuning grid (rad/s relative to the
/// nuclear transition).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    /// Coherently reflected intensity |ã_out(ω)|².
    pub i_coh: Vec<f64>,
    /// Drive intensity |ã_in(ω)|².
    pub i_in: Vec<f64>,
    /// I_coh / I_in where `mask` is set, 0 elsewhere.
    pub normalized: Vec<f64>,
    /// True where the drive carries enough weight for the ratio to be
    /// meaningful.
    pub mask: Vec<bool>,
}

impl Spectrum {
    fn from_intensities(omega: Vec<f64>, i_coh: Vec<f64>, i_in: Vec<f64>) -> Self {
        let peak = i_in.iter().cloned().fold(0.0, f64::max);
        let mask: Vec<bool> = i_in.iter().map(|&v| v >= DRIVE_FLOOR * peak && peak > 0.0).collect();
        let normalized = i_coh
            .iter()
            .zip(&i_in)
            .zip(&mask)
            .map(|((&c, &n), &ok)| if ok { c / n } else { 0.0 })
            .collect();
        Self { omega, i_coh, i_in, normalized, mask }
    }
}

fn check_omega_grid(omega: &[f64]) -> Result<()> {
    if omega.len() < 2 {
        return Err(Error::Invalid("need at least two spectrum frequencies".into()));
    }
    if omega.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("spectrum frequencies must be strictly increasing".into()));
    }
    Ok(())
}

/// Coherent reflection spectrum of a simulated trajectory, evaluated on the
/// given detuning grid by Fourier quadrature of the sampled fields.
pub fn coherent_spectrum(rec: &OutputRecord, omega: &[f64]) -> Result<Spectrum> {
    check_omega_grid(omega)?;
    if rec.times.len() != rec.a_out.len() || rec.times.len() != rec.a_in.len() {
        return Err(Error::Invalid("trajectory record has inconsistent lengths".into()));
    }
    let a_out = fourier_quadrature(&rec.times, &rec.a_out, omega);
    let a_in = fourier_quadrature(&rec.times, &rec.a_in, omega);
    let i_coh = a_out.iter().map(|z| z.norm_sqr()).collect();
    let i_in = a_in.iter().map(|z| z.norm_sqr()).collect();
    Ok(Spectrum::from_intensities(omega.to_vec(), i_coh, i_in))
}

/// Weak-drive reflection amplitude ã_out(ω)/ã_in(ω).
///
/// To first order in the drive the ladder stays near the ground state and
/// the master equation closes on the collective coherence:
///
/// ```text
/// d⟨J₋⟩/dt = −(Γ + iΔ_L)⟨J₋⟩ − i N ξ a_in(t),
/// Γ = N·Re(ζ) + γ_se/2,   Δ_L = N·Im(ζ).
/// ```
///
/// With the transform convention F(ω) = ∫ f(t) e^{iωt} dt (so ∂_t → −iω)
/// this gives ⟨J̃₋⟩ = −i N ξ ã_in / (Γ + i(Δ_L − ω)), and inserting it into
/// the input–output relation a_out = c_bg a_in − iξ⟨J₋⟩ yields
///
/// ```text
/// r(ω) = c_bg − N ξ² / (Γ + i(Δ_L − ω)),   c_bg = 2κ_R/(κ + iΔ_C) − 1.
/// ```
///
/// The line sits at the cooperative Lamb shift Δ_L with half width Γ,
/// interfering with the electronic background c_bg.
pub fn linear_response_amplitude(
    params: &SystemParams,
    spontaneous: SpontaneousMode,
    omega: f64,
) -> C64 {
    let g_se = gamma_se(params, spontaneous);
    let gamma_tot = params.collective_rate() + 0.5 * g_se;
    let n_xi_sq = params.n_atoms as f64 * params.xi() * params.xi();
    let denom = C64::new(gamma_tot, params.lamb_shift() - omega);
    params.empty_cavity_reflection() - n_xi_sq / denom
}

/// Weak-drive normalized reflection spectrum |r(ω)|² on a detuning grid.
pub fn linear_response_spectrum(
    params: &SystemParams,
    spontaneous: SpontaneousMode,
    omega: &[f64],
) -> Result<Vec<f64>> {
    check_omega_grid(omega)?;
    Ok(omega
        .iter()
        .map(|&w| linear_response_amplitude(params, spontaneous, w).norm_sqr())
        .collect())
}

/// Symmetric detuning grid centered on the collective line, spanning
/// ±`half_span_linewidths` half-widths with `n` points (forced odd so the
/// line center is a grid point).
pub fn line_window_grid(
    params: &SystemParams,
    spontaneous: SpontaneousMode,
    half_span_linewidths: f64,
    n: usize,
) -> Vec<f64> {
    let g_se = gamma_se(params, spontaneous);
    let gamma_tot = params.collective_rate() + 0.5 * g_se;
    let center = params.lamb_shift();
    crate::fourier::symmetric_grid(half_span_linewidths * gamma_tot, n)
        .into_iter()
        .map(|d| center + d)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    /// Spectrum is flat (or empty) inside the window; no line to classify.
    Indeterminate,
    /// |asymmetry| below the symmetric threshold.
    Symmetric,
    /// More weight below the line center.
    Negative,
    /// More weight above the line center.
    Positive,
}

#[derive(Debug, Clone, Copy)]
pub struct SymmetryReport {
    /// Normalized signed asymmetry in [−1, 1].
    pub asymmetry: f64,
    pub classification: SymmetryClass,
}

#[derive(Debug, Clone, Copy)]
pub struct SymmetryConfig {
    /// |asymmetry| below this classifies as `Symmetric`.
    pub symmetric_threshold: f64,
    /// Relative spectral contrast inside the window below this classifies as
    /// `Indeterminate`.
    pub flat_threshold: f64,
    /// Quadrature points per side.
    pub quadrature_points: usize,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self { symmetric_threshold: 1e-3, flat_threshold: 1e-9, quadrature_points: 801 }
    }
}

fn interp_monotone(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => ys[i],
        Err(i) => {
            // callers guarantee x inside [xs[0], xs[last]]
            let i = i.clamp(1, xs.len() - 1);
            let f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + f * (ys[i] - ys[i - 1])
        }
    }
}

/// Signed asymmetry of a spectral line around `center`.
///
/// Computes A = ∫ w(δ) [S(c+δ) − S(c−δ)] dδ / ∫ w(δ) [S(c+δ) + S(c−δ)] dδ
/// with the odd weight w(δ) = tanh(2δ/(5·`linewidth`)), which saturates a
/// few half-widths out so distant wings count fully but do not dominate.
/// A > 0 means more spectral weight above the line center.
pub fn detect_symmetry(
    omega: &[f64],
    s: &[f64],
    center: f64,
    linewidth: f64,
    cfg: &SymmetryConfig,
) -> Result<SymmetryReport> {
    check_omega_grid(omega)?;
    if omega.len() != s.len() {
        return Err(Error::Invalid("spectrum grid/value length mismatch".into()));
    }
    if !(linewidth > 0.0) {
        return Err(Error::Invalid("linewidth must be positive".into()));
    }
    let span = (center - omega[0]).min(omega[omega.len() - 1] - center);
    if span < linewidth {
        return Err(Error::Invalid(
            "symmetry window must cover at least one linewidth on both sides of the center".into(),
        ));
    }
    let nq = cfg.quadrature_points.max(8);
    let dq = span / nq as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut smin = f64::INFINITY;
    let mut smax = f64::NEG_INFINITY;
    for k in 1..=nq {
        let delta = k as f64 * dq;
        let w = (2.0 * delta / (5.0 * linewidth)).tanh();
        let hi = interp_monotone(omega, s, center + delta);
        let lo = interp_monotone(omega, s, center - delta);
        num += w * (hi - lo) * dq;
        den += w * (hi + lo) * dq;
        smin = smin.min(hi).min(lo);
        smax = smax.max(hi).max(lo);
    }
    if !(smax > 0.0) || (smax - smin) <= cfg.flat_threshold * smax {
        return Ok(SymmetryReport { asymmetry: 0.0, classification: SymmetryClass::Indeterminate });
    }
    if den <= 0.0 {
        return Ok(SymmetryReport { asymmetry: 0.0, classification: SymmetryClass::Indeterminate });
    }
    let a = num / den;
    let classification = if a.abs() < cfg.symmetric_threshold {
        SymmetryClass::Symmetric
    } else if a < 0.0 {
        SymmetryClass::Negative
    } else {
        SymmetryClass::Positive
    };
    Ok(SymmetryReport { asymmetry: a, classification })
}

/// Result of fitting |c − B/(Γ + i(ω_c − ω))|² to a spectrum.
#[derive(Debug, Clone, Copy)]
pub struct LineCenterFit {
    /// Fitted line center ω_c (rad/s detuning).
    pub center: f64,
    /// Fitted half width Γ (rad/s).
    pub width: f64,
    /// |c|, the background reflection magnitude (its phase is a gauge
    /// freedom and is absorbed into `amplitude`).
    pub background: f64,
    /// Complex line amplitude B in the background gauge.
    pub amplitude: C64,
    pub cost: f64,
    pub iterations: usize,
}

/// Fit the interference line shape |c − B/(Γ + i(ω_c − ω))|² to a measured
/// spectrum, starting from the weak-drive prediction for `params`.
///
/// A global phase rotation of (c, B) leaves the model invariant, so the
/// background is parametrized by its magnitude only: 5 real parameters
/// (|c|, Re B, Im B, Γ, ω_c).
pub fn fit_line_center(
    omega: &[f64],
    s: &[f64],
    params: &SystemParams,
    spontaneous: SpontaneousMode,
) -> Result<LineCenterFit> {
    check_omega_grid(omega)?;
    if omega.len() != s.len() {
        return Err(Error::Invalid("spectrum grid/value length mismatch".into()));
    }
    let g_se = gamma_se(params, spontaneous);
    let gamma0 = params.collective_rate() + 0.5 * g_se;
    let c_bg = params.empty_cavity_reflection();
    // rotate the gauge so the background is real and positive
    let phase = C64::from_polar(1.0, -c_bg.arg());
    let b0 = params.n_atoms as f64 * params.xi() * params.xi() * phase;
    let x0 = [c_bg.norm(), b0.re, b0.im, gamma0, params.lamb_shift()];
    let span = omega[omega.len() - 1] - omega[0];
    let bscale = b0.norm().max(gamma0) * 1e3;
    let lower = [0.0, -bscale, -bscale, gamma0 * 1e-3, omega[0] - span];
    let upper = [10.0 * x0[0].max(1.0), bscale, bscale, gamma0 * 1e3, omega[omega.len() - 1] + span];
    let model = |x: &[f64], out: &mut Vec<f64>| {
        out.clear();
        let b = C64::new(x[1], x[2]);
        for (&w, &y) in omega.iter().zip(s) {
            let r = C64::new(x[0], 0.0) - b / C64::new(x[3], x[4] - w);
            out.push(r.norm_sqr() - y);
        }
    };
    let res = levenberg_marquardt(model, &x0, &lower, &upper, &LmConfig::default())?;
    Ok(LineCenterFit {
        center: res.params[4],
        width: res.params[3],
        background: res.params[0],
        amplitude: C64::new(res.params[1], res.params[2]),
        cost: res.cost,
        iterations: res.iterations,
    })
}

/// Ensemble-averaged normalized spectrum: mean(I_coh) / mean(I_in) on a
/// shared frequency grid.
pub fn ensemble_average_spectrum(spectra: &[Spectrum]) -> Result<Spectrum> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::Invalid("empty spectrum ensemble".into()))?;
    let n = first.omega.len();
    for sp in spectra {
        if sp.omega.len() != n || sp.omega.iter().zip(&first.omega).any(|(a, b)| a != b) {
            return Err(Error::GridMismatch(
                "ensemble members must share one frequency grid".into(),
            ));
        }
    }
    let scale = 1.0 / spectra.len() as f64;
    let mut i_coh = vec![0.0; n];
    let mut i_in = vec![0.0; n];
    for sp in spectra {
        for k in 0..n {
            i_coh[k] += scale * sp.i_coh[k];
            i_in[k] += scale * sp.i_in[k];
        }
    }
    Ok(Spectrum::from_intensities(first.omega.clone(), i_coh, i_in))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::symmetric_grid;
    use approx::assert_relative_eq;

    fn test_params() -> SystemParams {
        let kappa = 1.4e6;
        let g_sqrt_n = (90.0_f64 * kappa).sqrt();
        SystemParams::from_collective(100, 1.0, g_sqrt_n, kappa, 0.4 * kappa, kappa).unwrap()
    }

    #[test]
    fn linear_response_wings_approach_background() {
        let p = test_params();
        let r_far = linear_response_amplitude(&p, SpontaneousMode::Auto, 1e6 * p.collective_rate());
        let c_bg = p.empty_cavity_reflection();
        assert_relative_eq!(r_far.norm_sqr(), c_bg.norm_sqr(), max_relative = 1e-4);
    }

    #[test]
    fn linear_response_line_center_and_width() {
        // With Δ_C = κ and κ_R = 0.4κ: c_bg = -0.6 - 0.4i, Γ = 30γ, Δ_L = -30γ
        let p = test_params();
        assert_relative_eq!(p.collective_rate(), 30.0, max_relative = 1e-10);
        assert_relative_eq!(p.lamb_shift(), -30.0, max_relative = 1e-10);
        let c_bg = p.empty_cavity_reflection();
        assert_relative_eq!(c_bg.re, -0.6, max_relative = 1e-12);
        assert_relative_eq!(c_bg.im, -0.4, max_relative = 1e-12);
        let r_center = linear_response_amplitude(&p, SpontaneousMode::Auto, p.lamb_shift());
        let n_xi_sq = p.n_atoms as f64 * p.xi() * p.xi();
        let expect = c_bg - n_xi_sq / p.collective_rate();
        assert_relative_eq!(r_center.re, expect.re, max_relative = 1e-12);
        assert_relative_eq!(r_center.im, expect.im, max_relative = 1e-12);
    }

    #[test]
    fn coherent_spectrum_of_scaled_drive() {
        // a_out = c * a_in identically: normalized spectrum is |c|^2 where
        // the drive has weight.
        let c = C64::new(-0.6, -0.4);
        let sigma = 1.0;
        let times: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.02).collect();
        let a_in: Vec<C64> = times
            .iter()
            .map(|&t| C64::new((-0.5 * t * t / (sigma * sigma)).exp(), 0.0))
            .collect();
        let a_out: Vec<C64> = a_in.iter().map(|&a| c * a).collect();
        let n = times.len();
        let rec = OutputRecord {
            times,
            a_in: a_in.clone(),
            a_out,
            j_minus_expect: vec![C64::new(0.0, 0.0); n],
            jz_expect: vec![0.0; n],
            emission_intensity: vec![0.0; n],
            pulse_end: 8.0,
            params: test_params(),
        };
        let omega = symmetric_grid(2.0, 41);
        let sp = coherent_spectrum(&rec, &omega).unwrap();
        for k in 0..omega.len() {
            assert!(sp.mask[k]);
            assert_relative_eq!(sp.normalized[k], c.norm_sqr(), max_relative = 1e-10);
        }
        // far in the wings the drive is negligible and the mask clears
        let far = symmetric_grid(60.0, 5);
        let sp_far = coherent_spectrum(&rec, &far).unwrap();
        assert!(!sp_far.mask[0]);
        assert_eq!(sp_far.normalized[0], 0.0);
    }

    #[test]
    fn symmetric_line_classified_symmetric() {
        let omega = symmetric_grid(20.0, 2001);
        let s: Vec<f64> = omega.iter().map(|&w| 1.0 + 3.0 / (1.0 + w * w)).collect();
        let rep = detect_symmetry(&omega, &s, 0.0, 1.0, &SymmetryConfig::default()).unwrap();
        assert_eq!(rep.classification, SymmetryClass::Symmetric);
        assert!(rep.asymmetry.abs() < 1e-6);
    }

    #[test]
    fn skewed_lines_get_the_right_sign() {
        let omega = symmetric_grid(20.0, 2001);
        let base = |w: f64| 1.0 + 3.0 / (1.0 + w * w);
        let odd = |w: f64| 0.5 * w / (1.0 + w * w);
        let s_hi: Vec<f64> = omega.iter().map(|&w| base(w) + odd(w)).collect();
        let s_lo: Vec<f64> = omega.iter().map(|&w| base(w) - odd(w)).collect();
        let cfg = SymmetryConfig::default();
        let hi = detect_symmetry(&omega, &s_hi, 0.0, 1.0, &cfg).unwrap();
        let lo = detect_symmetry(&omega, &s_lo, 0.0, 1.0, &cfg).unwrap();
        assert_eq!(hi.classification, SymmetryClass::Positive);
        assert_eq!(lo.classification, SymmetryClass::Negative);
        assert_relative_eq!(hi.asymmetry, -lo.asymmetry, max_relative = 1e-12);
    }

    #[test]
    fn flat_spectrum_is_indeterminate() {
        let omega = symmetric_grid(10.0, 101);
        let s = vec![0.36; omega.len()];
        let rep = detect_symmetry(&omega, &s, 0.0, 1.0, &SymmetryConfig::default()).unwrap();
        assert_eq!(rep.classification, SymmetryClass::Indeterminate);
    }

    #[test]
    fn line_fit_recovers_weak_drive_parameters() {
        let p = test_params();
        let mode = SpontaneousMode::Auto;
        let omega = line_window_grid(&p, mode, 10.0, 801);
        let s = linear_response_spectrum(&p, mode, &omega).unwrap();
        let fit = fit_line_center(&omega, &s, &p, mode).unwrap();
        assert_relative_eq!(fit.center, p.lamb_shift(), max_relative = 1e-8);
        assert_relative_eq!(fit.width, p.collective_rate(), max_relative = 1e-8);
        assert_relative_eq!(fit.background, p.empty_cavity_reflection().norm(), max_relative = 1e-8);
    }

    #[test]
    fn ensemble_average_requires_matching_grids() {
        let omega_a = symmetric_grid(1.0, 11);
        let omega_b = symmetric_grid(2.0, 11);
        let mk = |omega: &[f64]| Spectrum {
            omega: omega.to_vec(),
            i_coh: vec![1.0; omega.len()],
            i_in: vec![2.0; omega.len()],
            normalized: vec![0.5; omega.len()],
            mask: vec![true; omega.len()],
        };
        let avg = ensemble_average_spectrum(&[mk(&omega_a), mk(&omega_a)]).unwrap();
        assert_relative_eq!(avg.normalized[5], 0.5, max_relative = 1e-14);
        assert!(matches!(
            ensemble_average_spectrum(&[mk(&omega_a), mk(&omega_b)]),
            Err(Error::GridMismatch(_))
        ));
    }
}
