//! Photon requirements for full collective inversion, and the cavity-design
//! search that minimizes them.
//!
//! The inversion condition Φ ≥ π for a Gaussian pulse translates into a
//! minimal photon number
//!
//! ```text
//! N_Ph,min = π^{3/2} / (8 |ξ|² σ_t,eff) · V_exc / V_coh
//! ```
//!
//! where σ_t,eff accounts for the spectral broadening by the beam
//! divergence, V_coh is the volume over which the nuclei act collectively
//! and V_exc the volume the focused beam actually excites. The single-
//! nucleus |ξ|² comes from a cavity fit: a candidate multilayer is evaluated
//! with the recursive reflectivity model, its guided-mode structure sets the
//! admissible divergence, and the linear-response fit extracts (κ, κ_R, θ₀,
//! g√N), from which g follows with N taken as the coherence-volume count.

use rayon::prelude::*;

use crate::cavityfit::{feature_estimate, fit_cavity_params, CavityFitData};
use crate::data::{BeamEntry, IsotopeEntry, MaterialTable};
use crate::error::{Error, Result};
use crate::pulse::FWHM_TO_SIGMA;
use crate::reflectivity::{
    find_mode_angles, parratt_with_resonance, rocking_curve, Layer, LayerStack,
};

const PI: f64 = std::f64::consts::PI;

/// Focused beam at the sample.
#[derive(Debug, Clone, Copy)]
pub struct BeamParams {
    /// Spot diameter (nm).
    pub d_b_nm: f64,
    /// Divergence (mrad).
    pub theta_b_mrad: f64,
    /// Pulse duration FWHM (fs).
    pub t_fwhm_fs: f64,
    /// Conserved d_B·θ_B product (nm·mrad).
    pub phase_space_nm_mrad: f64,
}

impl BeamParams {
    pub fn new(d_b_nm: f64, theta_b_mrad: f64, t_fwhm_fs: f64, phase_space: f64) -> Result<Self> {
        if !(d_b_nm > 0.0 && theta_b_mrad > 0.0 && t_fwhm_fs > 0.0 && phase_space > 0.0) {
            return Err(Error::Invalid("beam parameters must be positive".into()));
        }
        let product = d_b_nm * theta_b_mrad;
        if (product / phase_space - 1.0).abs() > 0.01 {
            return Err(Error::Invalid(format!(
                "d_B·θ_B = {product:.3} nm·mrad violates the phase-space constant {phase_space:.3}"
            )));
        }
        Ok(Self { d_b_nm, theta_b_mrad, t_fwhm_fs, phase_space_nm_mrad: phase_space })
    }

    /// Beam with the given divergence and the spot size dictated by the
    /// phase-space constant.
    pub fn from_divergence(phase_space: f64, theta_b_mrad: f64, t_fwhm_fs: f64) -> Result<Self> {
        Self::new(phase_space / theta_b_mrad, theta_b_mrad, t_fwhm_fs, phase_space)
    }

    /// Gaussian σ_t in seconds (FWHM/2.35 convention).
    pub fn sigma_t(&self) -> f64 {
        self.t_fwhm_fs * 1e-15 * FWHM_TO_SIGMA
    }
}

/// Nuclei interacting collectively: a disk of diameter equal to the
/// electronic absorption length and the thickness of the resonant layer.
pub fn coherence_volume_nuclei(iso: &IsotopeEntry, layer_nm: f64) -> Result<f64> {
    if !(layer_nm > 0.0) {
        return Err(Error::Invalid("resonant layer thickness must be positive".into()));
    }
    let d_nm = iso.absorption_length_um * 1e3;
    let volume = 0.25 * PI * d_nm * d_nm * layer_nm;
    Ok(volume * iso.number_density_nm3)
}

/// Volume illuminated at grazing incidence, V_exc = d_B²·d/sin θ₀, and the
/// nuclei it contains.
pub fn excitation_volume(
    beam: &BeamParams,
    theta0_rad: f64,
    layer_nm: f64,
    number_density_nm3: f64,
) -> Result<(f64, f64)> {
    if !(theta0_rad > 0.0) {
        return Err(Error::Invalid("mode angle must be positive".into()));
    }
    let volume = beam.d_b_nm * beam.d_b_nm * layer_nm / theta0_rad.sin();
    Ok((volume, volume * number_density_nm3))
}

/// Effective pulse duration once the divergence-induced detuning spread
/// ω₀θ₀θ_B is added in quadrature to the Fourier width 1/σ_t.
pub fn effective_sigma_t(sigma_t: f64, omega0: f64, theta0_rad: f64, theta_b_rad: f64) -> f64 {
    let sigma_w = 1.0 / sigma_t;
    let spread = omega0 * theta0_rad * theta_b_rad;
    1.0 / (sigma_w * sigma_w + spread * spread).sqrt()
}

/// Smallest photon number with 8·N_Ph·|ξ|²·σ_t,eff·π^{−3/2}·(V_coh/V_exc) ≥ 1.
pub fn min_photons(xi_sq: f64, sigma_t_eff: f64, n_coh: f64, n_exc: f64) -> Result<f64> {
    if !(xi_sq > 0.0 && sigma_t_eff > 0.0 && n_coh > 0.0 && n_exc > 0.0) {
        return Err(Error::Invalid("photon-budget inputs must be positive".into()));
    }
    Ok(PI.powf(1.5) / (8.0 * xi_sq * sigma_t_eff) * (n_exc / n_coh))
}

/// Coupling reduced by internal conversion: intensity requirements scale
/// with (1+α), so the amplitude-level coupling scales with 1/√(1+α).
pub fn conversion_scaled_coupling(g: f64, alpha: f64) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::Invalid("conversion coefficient must be non-negative".into()));
    }
    Ok(g / (1.0 + alpha).sqrt())
}

/// g for a different ensemble size at fixed collective coupling g√N.
pub fn rescale_coupling(n_target: f64, g_ref: f64, n_ref: f64) -> Result<f64> {
    if !(n_target > 0.0 && n_ref > 0.0) {
        return Err(Error::Invalid("ensemble sizes must be positive".into()));
    }
    Ok(g_ref * (n_ref / n_target).sqrt())
}

/// Candidate cavity layout: mirror(d_top) / C(d_cen) / X(layer) / C(d_cen) /
/// mirror substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityCandidate {
    pub mirror: String,
    pub d_top_nm: f64,
    pub d_cen_nm: f64,
    pub layer_nm: f64,
}

impl CavityCandidate {
    fn key(&self) -> (String, u64, u64) {
        (self.mirror.clone(), self.d_top_nm.to_bits(), self.d_cen_nm.to_bits())
    }
}

/// Full evaluation of one candidate for one isotope.
#[derive(Debug, Clone)]
pub struct PhotonBudget {
    pub isotope: String,
    pub candidate: CavityCandidate,
    pub alpha: f64,
    /// Fitted mode angle (rad).
    pub theta0: f64,
    /// Next mode angle (rad).
    pub theta1: f64,
    pub theta_b_mrad: f64,
    pub d_b_nm: f64,
    pub n_exc: f64,
    pub n_coh: f64,
    /// Fitted cavity rates (rad/s).
    pub kappa: f64,
    pub kappa_r: f64,
    /// Fitted collective coupling (rad/s) at the reference α.
    pub g_sqrt_n: f64,
    /// Single-nucleus |ξ|² (1/s) at Δ_C = 0 and the requested α.
    pub xi_sq: f64,
    pub sigma_t_eff: f64,
    pub n_ph_min: f64,
}

impl PhotonBudget {
    /// Budget at a different conversion coefficient (photon number scales
    /// with (1+α)/(1+α_old)).
    pub fn with_alpha(&self, alpha: f64) -> Result<PhotonBudget> {
        if alpha < 0.0 {
            return Err(Error::Invalid("conversion coefficient must be non-negative".into()));
        }
        let ratio = (1.0 + self.alpha) / (1.0 + alpha);
        let mut out = self.clone();
        out.alpha = alpha;
        out.xi_sq = self.xi_sq * ratio;
        out.n_ph_min = self.n_ph_min / ratio;
        Ok(out)
    }

    /// Budget for a different pulse duration at fixed geometry.
    pub fn with_t_fwhm(&self, t_fwhm_fs: f64, omega0: f64) -> PhotonBudget {
        let sigma_t = t_fwhm_fs * 1e-15 * FWHM_TO_SIGMA;
        let sigma_eff =
            effective_sigma_t(sigma_t, omega0, self.theta0, self.theta_b_mrad * 1e-3);
        let mut out = self.clone();
        out.sigma_t_eff = sigma_eff;
        out.n_ph_min = self.n_ph_min * self.sigma_t_eff / sigma_eff;
        out
    }
}

fn build_stack(
    iso: &IsotopeEntry,
    materials: &MaterialTable,
    cand: &CavityCandidate,
) -> Result<(LayerStack, usize)> {
    let e = iso.energy_kev;
    let mirror = materials.lookup(&cand.mirror, e)?;
    let guide = materials.lookup("C", e)?;
    let resonant = materials.lookup(&iso.symbol, e)?;
    let stack = LayerStack::new(
        vec![
            Layer::new(&mirror.name, cand.d_top_nm, mirror.delta, mirror.beta),
            Layer::new(&guide.name, cand.d_cen_nm, guide.delta, guide.beta),
            Layer::new(&resonant.name, cand.layer_nm, resonant.delta, resonant.beta),
            Layer::new(&guide.name, cand.d_cen_nm, guide.delta, guide.beta),
            Layer::substrate(&mirror.name, mirror.delta, mirror.beta),
        ],
        e,
    )?;
    Ok((stack, 2))
}

/// Parratt analysis of one candidate: mode structure, joint fit data and
/// the extracted quantum-optical parameters.
pub struct CandidateAnalysis {
    pub stack: LayerStack,
    pub data: CavityFitData,
    pub fit: crate::cavityfit::CavityFit,
    /// Next mode angle (rad); sets the divergence limit.
    pub theta1: f64,
}

/// Scan the rocking curve of a candidate, build the joint (angle, frequency)
/// fit data from the reflectivity model with the nuclear resonance included,
/// and fit the linear-response cavity parameters.
pub fn analyze_candidate(
    iso: &IsotopeEntry,
    materials: &MaterialTable,
    cand: &CavityCandidate,
) -> Result<CandidateAnalysis> {
    let (stack, res_idx) = build_stack(iso, materials, cand)?;
    let mirror_delta = materials.lookup(&cand.mirror, iso.energy_kev)?.delta;
    let theta_c = (2.0 * mirror_delta).sqrt();

    // mode structure from the off-resonance rocking curve
    let lo = 0.05 * theta_c;
    let hi = (1.3 * theta_c).min(0.099);
    let n_scan = 4000;
    let scan: Vec<f64> = (0..n_scan)
        .map(|i| lo + (hi - lo) * i as f64 / (n_scan - 1) as f64)
        .collect();
    let curve = rocking_curve(&stack, &scan)?;
    let modes = find_mode_angles(&scan, &curve, 0.02)?;
    if modes.len() < 2 {
        return Err(Error::NoModes);
    }
    let theta0_est = modes[0];
    let theta1 = modes[1];

    // joint fit data: rocking window around the mode, nuclear spectrum at θ₀
    let gamma = iso.gamma();
    let strength = iso.resonant_strength(iso.alpha_ref);
    let half_window = (0.5 * (theta1 - theta0_est)).min(0.3 * theta0_est);
    let theta_fit: Vec<f64> = (0..301)
        .map(|i| theta0_est - half_window + 2.0 * half_window * i as f64 / 300.0)
        .collect();
    let rocking = rocking_curve(&stack, &theta_fit)?;

    // two-pass detuning grid: probe the line width, then resolve it
    let spectrum_at = |detunings: &[f64]| -> Result<Vec<f64>> {
        detunings
            .iter()
            .map(|&d| {
                parratt_with_resonance(&stack, theta0_est, res_idx, strength, gamma, d)
                    .map(|r| r.norm_sqr())
            })
            .collect()
    };
    let probe: Vec<f64> = (0..801).map(|i| (i as f64 - 400.0) * 5.0 * gamma).collect();
    let probe_vals = spectrum_at(&probe)?;
    let line_hwhm = feature_estimate(&probe, &probe_vals)
        .map(|(_, w, _, _)| w)
        .unwrap_or(gamma)
        .max(gamma);
    let detuning: Vec<f64> = (0..401)
        .map(|i| (i as f64 - 200.0) / 200.0 * 10.0 * line_hwhm)
        .collect();
    let spectrum = spectrum_at(&detuning)?;

    let data = CavityFitData {
        theta: theta_fit,
        rocking,
        theta_spectrum: theta0_est,
        detuning,
        spectrum,
        gamma,
    };
    let fit = fit_cavity_params(&data, iso.omega0())?;
    Ok(CandidateAnalysis { stack, data, fit, theta1 })
}

/// Evaluate one cavity candidate end to end: mode structure → beam →
/// linear-response fit → photon budget at the requested α and duration.
pub fn evaluate_candidate(
    iso: &IsotopeEntry,
    materials: &MaterialTable,
    beam: &BeamEntry,
    cand: &CavityCandidate,
    t_fwhm_fs: f64,
    alpha: f64,
) -> Result<PhotonBudget> {
    let analysis = analyze_candidate(iso, materials, cand)?;
    let fit = analysis.fit;
    let theta1 = analysis.theta1;
    let theta_b_rad = theta1 - fit.theta0;
    let theta_b_mrad = theta_b_rad * 1e3;
    let beam_p = BeamParams::from_divergence(beam.phase_space_nm_mrad, theta_b_mrad, t_fwhm_fs)?;

    // budget: g from the coherence-volume ensemble, rescaled to α
    let n_coh = coherence_volume_nuclei(iso, cand.layer_nm)?;
    let (_, n_exc) =
        excitation_volume(&beam_p, fit.theta0, cand.layer_nm, iso.number_density_nm3)?;
    let g_single_ref = fit.g_sqrt_n / n_coh.sqrt();
    let g_unscaled = g_single_ref * (1.0 + iso.alpha_ref).sqrt();
    let g_single = conversion_scaled_coupling(g_unscaled, alpha)?;
    let xi_sq = 4.0 / 3.0 * g_single * g_single * fit.kappa_r / (fit.kappa * fit.kappa);
    let sigma_t_eff = effective_sigma_t(beam_p.sigma_t(), iso.omega0(), fit.theta0, theta_b_rad);
    let n_ph_min = min_photons(xi_sq, sigma_t_eff, n_coh, n_exc)?;

    Ok(PhotonBudget {
        isotope: iso.name.clone(),
        candidate: cand.clone(),
        alpha,
        theta0: fit.theta0,
        theta1,
        theta_b_mrad,
        d_b_nm: beam_p.d_b_nm,
        n_exc,
        n_coh,
        kappa: fit.kappa,
        kappa_r: fit.kappa_r,
        g_sqrt_n: fit.g_sqrt_n,
        xi_sq,
        sigma_t_eff,
        n_ph_min,
    })
}

/// Grid search over mirror materials and layer thicknesses. Candidates
/// without a usable mode pair or without material data are skipped (reported
/// in the `skipped` list); the feasible ones are returned ranked by photon
/// number with lexicographic tie-breaking on (mirror, d_top, d_cen).
pub struct OptimizationReport {
    pub ranked: Vec<PhotonBudget>,
    pub skipped: Vec<(CavityCandidate, String)>,
}

impl OptimizationReport {
    pub fn best(&self) -> &PhotonBudget {
        &self.ranked[0]
    }
}

#[allow(clippy::too_many_arguments)]
pub fn optimize_cavity(
    iso: &IsotopeEntry,
    materials: &MaterialTable,
    beam: &BeamEntry,
    mirrors: &[String],
    d_top_grid: &[f64],
    d_cen_grid: &[f64],
    layer_nm: f64,
    t_fwhm_fs: f64,
    alpha: f64,
) -> Result<OptimizationReport> {
    let mut candidates = Vec::new();
    for m in mirrors {
        for &dt in d_top_grid {
            for &dc in d_cen_grid {
                candidates.push(CavityCandidate {
                    mirror: m.clone(),
                    d_top_nm: dt,
                    d_cen_nm: dc,
                    layer_nm,
                });
            }
        }
    }
    let results: Vec<(CavityCandidate, Result<PhotonBudget>)> = candidates
        .into_par_iter()
        .map(|c| {
            let r = evaluate_candidate(iso, materials, beam, &c, t_fwhm_fs, alpha);
            (c, r)
        })
        .collect();

    let mut ranked = Vec::new();
    let mut skipped = Vec::new();
    for (cand, res) in results {
        match res {
            Ok(b) => ranked.push(b),
            Err(e) => skipped.push((cand, e.to_string())),
        }
    }
    if ranked.is_empty() {
        return Err(Error::NoModes);
    }
    ranked.sort_by(|a, b| {
        a.n_ph_min
            .total_cmp(&b.n_ph_min)
            .then_with(|| a.candidate.key().cmp(&b.candidate.key()))
    });
    Ok(OptimizationReport { ranked, skipped })
}

/// N_Ph,min versus pulse duration at fixed geometry (divergence-limited
/// plateau at long durations).
pub fn budget_curve(budget: &PhotonBudget, omega0: f64, t_fwhm_fs: &[f64]) -> Vec<(f64, f64)> {
    t_fwhm_fs
        .iter()
        .map(|&t| (t, budget.with_t_fwhm(t, omega0).n_ph_min))
        .collect()
}
