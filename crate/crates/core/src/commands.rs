//! Entry points behind the CLI subcommands. Each takes a parsed scenario,
//! runs the corresponding pipeline, writes columnar files into the output
//! directory and prints a short summary to stdout. Skipped work (infeasible
//! cavity candidates, indeterminate spectra) is reported, never dropped
//! silently.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::budget::{analyze_candidate, budget_curve, optimize_cavity, CavityCandidate};
use crate::cavityfit::{rocking_model, spectrum_model_amplitude};
use crate::config::{load_scenario, PulseConfig};
use crate::data::{
    bundled_beams, bundled_isotopes, bundled_materials, load_beams, load_isotopes,
    load_materials, BeamTable, IsotopeTable, MaterialTable,
};
use crate::dicke::{evolve, gamma_se, DickeState, EvolveConfig, OutputRecord};
use crate::error::{Error, Result};
use crate::output::{read_pulse, write_pulse, write_table, FileHeader};
use crate::params::SystemParams;
use crate::pulse::{
    centered_grid, gaussian_pulse, photons_for_area, pulse_area, sase_generate, PulseRecord,
    SaseConfig, FWHM_TO_SIGMA,
};
use crate::spectrum::{
    coherent_spectrum, detect_symmetry, ensemble_average_spectrum, line_window_grid, Spectrum,
    SymmetryClass, SymmetryConfig, SymmetryReport,
};
use crate::toy::ToyParams;

const PI: f64 = std::f64::consts::PI;

/// Everything a subcommand needs beyond its scenario file.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    /// `--seed`; overrides the scenario seed.
    pub seed: Option<u64>,
}

impl RunContext {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Numeric encoding of [`SymmetryClass`] for columnar files:
/// −1 negative, 0 symmetric, +1 positive, 2 indeterminate.
pub fn class_code(c: SymmetryClass) -> f64 {
    match c {
        SymmetryClass::Negative => -1.0,
        SymmetryClass::Symmetric => 0.0,
        SymmetryClass::Positive => 1.0,
        SymmetryClass::Indeterminate => 2.0,
    }
}

fn class_name(c: SymmetryClass) -> &'static str {
    match c {
        SymmetryClass::Negative => "negative",
        SymmetryClass::Symmetric => "symmetric",
        SymmetryClass::Positive => "positive",
        SymmetryClass::Indeterminate => "indeterminate",
    }
}

fn spectrum_rows(sp: &Spectrum) -> Vec<Vec<f64>> {
    (0..sp.omega.len())
        .map(|i| {
            vec![
                sp.omega[i],
                sp.normalized[i],
                sp.i_coh[i],
                sp.i_in[i],
                if sp.mask[i] { 1.0 } else { 0.0 },
            ]
        })
        .collect()
}

const SPECTRUM_COLS: [&str; 5] = ["omega_rad_s", "i_norm", "i_coh", "i_in", "mask"];

fn trace_rows(rec: &OutputRecord) -> Vec<Vec<f64>> {
    (0..rec.times.len())
        .map(|i| {
            vec![
                rec.times[i],
                rec.a_in[i].re,
                rec.a_in[i].im,
                rec.a_out[i].re,
                rec.a_out[i].im,
                rec.jz_expect[i],
                rec.emission_intensity[i],
            ]
        })
        .collect()
}

const TRACE_COLS: [&str; 7] =
    ["t_s", "re_a_in", "im_a_in", "re_a_out", "im_a_out", "jz", "jpjm"];

fn system_header(cmd: &str, hash: &str, params: &SystemParams) -> FileHeader {
    FileHeader::new(cmd, hash)
        .with("n_atoms", params.n_atoms)
        .with("gamma_rad_s", format!("{:.6e}", params.gamma))
        .with("kappa_rad_s", format!("{:.6e}", params.kappa))
        .with("kappa_r_rad_s", format!("{:.6e}", params.kappa_r))
        .with("delta_c_rad_s", format!("{:.6e}", params.delta_c))
        .with(
            "g_sqrt_n_rad_s",
            format!("{:.6e}", params.g.norm() * (params.n_atoms as f64).sqrt()),
        )
}

/// Drive the ensemble with one or more Gaussian (or file-sourced) pulses,
/// compute normalized reflection spectra and classify their symmetry.
pub fn run_simulate(ctx: &RunContext) -> Result<()> {
    let (cfg, hash) = load_scenario(&ctx.config_path)?;
    let sysc = cfg.require_system()?;
    let params = sysc.build()?;
    let mode = sysc.spontaneous_mode();

    let jobs: Vec<(f64, PulseRecord)> = match cfg.require_pulse()? {
        PulseConfig::Gaussian { t_fwhm_fs, area_pi } => {
            let sigma_t = t_fwhm_fs * 1e-15 * FWHM_TO_SIGMA;
            let areas = cfg
                .sweep_area_pi
                .clone()
                .or_else(|| area_pi.map(|a| vec![a]))
                .ok_or_else(|| {
                    Error::Config("gaussian pulse needs area_pi or sweep_area_pi".into())
                })?;
            let grid = centered_grid(sigma_t, 8.0, 64);
            areas
                .into_iter()
                .map(|a| {
                    let nph = photons_for_area(a * PI, params.xi(), sigma_t);
                    gaussian_pulse(sigma_t, nph, &grid).map(|p| (a, p))
                })
                .collect::<Result<_>>()?
        }
        PulseConfig::File { path } => {
            let p = read_pulse(path)?;
            let a = pulse_area(&p, params.xi()) / PI;
            vec![(a, p)]
        }
        PulseConfig::Sase { .. } => {
            return Err(Error::Config(
                "stochastic drives run under the `sase` subcommand".into(),
            ))
        }
    };

    let omega = line_window_grid(
        &params,
        mode,
        cfg.spectrum.half_span_linewidths,
        cfg.spectrum.points,
    );
    let center = params.lamb_shift();
    let width = params.collective_rate() + 0.5 * gamma_se(&params, mode);
    let evolve_cfg = EvolveConfig { spontaneous: mode, ..EvolveConfig::fast() };

    let results: Vec<(f64, Spectrum, SymmetryReport, OutputRecord)> = jobs
        .into_par_iter()
        .map(|(a, pulse)| {
            let (rec, _) =
                evolve(&params, &DickeState::ground(params.n_atoms), &pulse, &evolve_cfg)?;
            let sp = coherent_spectrum(&rec, &omega)?;
            let sym =
                detect_symmetry(&omega, &sp.normalized, center, width, &SymmetryConfig::default())?;
            Ok((a, sp, sym, rec))
        })
        .collect::<Result<_>>()?;

    let header = system_header("simulate", &hash, &params);
    let mut summary = Vec::new();
    for (i, (a, sp, sym, rec)) in results.iter().enumerate() {
        let h = header.clone().with("area_pi", format!("{a:.6}"));
        write_table(&ctx.out(&format!("spectrum_{i:03}.dat")), &h, &SPECTRUM_COLS, &spectrum_rows(sp))?;
        write_table(&ctx.out(&format!("trace_{i:03}.dat")), &h, &TRACE_COLS, &trace_rows(rec))?;
        let jz_max = rec.jz_expect.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        summary.push(vec![*a, sym.asymmetry, class_code(sym.classification), jz_max]);
        println!(
            "area_pi={a:.4}  asymmetry={:+.4e}  class={}  max_jz={jz_max:.4}",
            sym.asymmetry,
            class_name(sym.classification)
        );
    }
    write_table(
        &ctx.out("summary.dat"),
        &header,
        &["area_pi", "asymmetry", "class", "max_jz"],
        &summary,
    )?;

    // report where the classified sign flips along the sweep
    let signed: Vec<(f64, f64)> = results
        .iter()
        .filter(|(_, _, sym, _)| {
            matches!(sym.classification, SymmetryClass::Negative | SymmetryClass::Positive)
        })
        .map(|(a, _, sym, _)| (*a, sym.asymmetry.signum()))
        .collect();
    for w in signed.windows(2) {
        if w[0].1 != w[1].1 {
            println!("symmetry flip between area_pi={:.4} and area_pi={:.4}", w[0].0, w[1].0);
        }
    }
    Ok(())
}

/// Drive the ensemble with a stochastic pulse ensemble and average the
/// normalized spectra; optionally also per resonant-intensity quartile.
pub fn run_sase(ctx: &RunContext) -> Result<()> {
    let (cfg, hash) = load_scenario(&ctx.config_path)?;
    let sysc = cfg.require_system()?;
    let params = sysc.build()?;
    let mode = sysc.spontaneous_mode();
    let (t_fwhm_fs, f_sase, n_pulses, area_max_pi, group) = match cfg.require_pulse()? {
        PulseConfig::Sase { t_fwhm_fs, f_sase, n_pulses, area_max_pi, group_by_intensity } => {
            (*t_fwhm_fs, *f_sase, *n_pulses, *area_max_pi, *group_by_intensity)
        }
        _ => {
            return Err(Error::Config(
                "the `sase` subcommand needs a pulse table with kind = \"sase\"".into(),
            ))
        }
    };
    let seed = ctx.seed.or(cfg.seed).unwrap_or(0);

    let sigma_t = t_fwhm_fs * 1e-15 * FWHM_TO_SIGMA;
    let n_photons = photons_for_area(area_max_pi * PI, params.xi(), sigma_t);
    // resolve the spectral structure σ_ω = f/σ_t on the time grid
    let spp = ((8.0 * f_sase).ceil() as usize).max(64);
    let grid = centered_grid(sigma_t, 8.0, spp);
    let sase_cfg = SaseConfig { sigma_t, f_sase, n_pulses, seed, n_photons };
    let pulses = sase_generate(&sase_cfg, &grid)?;

    let omega = line_window_grid(
        &params,
        mode,
        cfg.spectrum.half_span_linewidths,
        cfg.spectrum.points,
    );
    let center = params.lamb_shift();
    let width = params.collective_rate() + 0.5 * gamma_se(&params, mode);
    let evolve_cfg = EvolveConfig { spontaneous: mode, ..EvolveConfig::fast() };

    let shots: Vec<(Spectrum, SymmetryReport)> = pulses
        .par_iter()
        .map(|pulse| {
            let (rec, _) =
                evolve(&params, &DickeState::ground(params.n_atoms), pulse, &evolve_cfg)?;
            let sp = coherent_spectrum(&rec, &omega)?;
            let sym =
                detect_symmetry(&omega, &sp.normalized, center, width, &SymmetryConfig::default())?;
            Ok((sp, sym))
        })
        .collect::<Result<_>>()?;

    let header = system_header("sase", &hash, &params)
        .with("seed", seed)
        .with("f_sase", f_sase)
        .with("n_pulses", n_pulses)
        .with("area_max_pi", format!("{area_max_pi:.6}"));

    let spectra: Vec<Spectrum> = shots.iter().map(|(sp, _)| sp.clone()).collect();
    let mean = ensemble_average_spectrum(&spectra)?;
    write_table(&ctx.out("mean_spectrum.dat"), &header, &SPECTRUM_COLS, &spectrum_rows(&mean))?;
    let mean_sym =
        detect_symmetry(&omega, &mean.normalized, center, width, &SymmetryConfig::default())?;

    // per-shot record: effective area, resonant drive intensity, asymmetry
    let i_center = omega.len() / 2;
    let shot_rows: Vec<Vec<f64>> = shots
        .iter()
        .zip(&pulses)
        .enumerate()
        .map(|(i, ((sp, sym), pulse))| {
            vec![
                i as f64,
                pulse_area(pulse, params.xi()) / PI,
                sp.i_in[i_center],
                sym.asymmetry,
                class_code(sym.classification),
            ]
        })
        .collect();
    write_table(
        &ctx.out("shots.dat"),
        &header,
        &["shot", "area_pi", "i_in_resonant", "asymmetry", "class"],
        &shot_rows,
    )?;
    write_pulse(&ctx.out("pulse_000.dat"), &pulses[0], &header)?;

    if group {
        let mut order: Vec<usize> = (0..shots.len()).collect();
        order.sort_by(|&a, &b| shots[a].0.i_in[i_center].total_cmp(&shots[b].0.i_in[i_center]));
        for q in 0..4 {
            let lo = q * order.len() / 4;
            let hi = ((q + 1) * order.len() / 4).max(lo + 1).min(order.len());
            let members: Vec<Spectrum> =
                order[lo..hi].iter().map(|&i| spectra[i].clone()).collect();
            let grouped = ensemble_average_spectrum(&members)?;
            let h = header.clone().with("intensity_quartile", q + 1).with("shots", hi - lo);
            write_table(
                &ctx.out(&format!("group_q{}.dat", q + 1)),
                &h,
                &SPECTRUM_COLS,
                &spectrum_rows(&grouped),
            )?;
        }
    }

    let n_pos = shots.iter().filter(|(_, s)| s.classification == SymmetryClass::Positive).count();
    let n_neg = shots.iter().filter(|(_, s)| s.classification == SymmetryClass::Negative).count();
    println!(
        "shots={}  mean_asymmetry={:+.4e}  mean_class={}  positive={n_pos}  negative={n_neg}",
        shots.len(),
        mean_sym.asymmetry,
        class_name(mean_sym.classification)
    );
    Ok(())
}

/// Closed-form single-resonance spectra over a grid of pulse areas and
/// scattering phases.
pub fn run_toy(ctx: &RunContext) -> Result<()> {
    let (cfg, hash) = load_scenario(&ctx.config_path)?;
    let toy = cfg.require_toy()?;
    if toy.areas_pi.is_empty() || toy.phases.is_empty() {
        return Err(Error::Config("toy needs at least one area and one phase".into()));
    }
    let omega: Vec<f64> = crate::fourier::symmetric_grid(
        toy.half_span_gamma * toy.gamma,
        toy.points,
    );
    let mut summary = Vec::new();
    for (i, &area_pi) in toy.areas_pi.iter().enumerate() {
        for (j, &phase) in toy.phases.iter().enumerate() {
            let d = area_pi * PI / (2.0 * toy.a0);
            let p = ToyParams::new(toy.a0, d, toy.beta, toy.gamma, phase, 0.0)?;
            let s = crate::toy::toy_spectrum(&p, &omega);
            let h = FileHeader::new("toy", &hash)
                .with("area_pi", format!("{area_pi:.6}"))
                .with("phase_rad", format!("{phase:.6}"))
                .with("gamma_rad_s", format!("{:.6e}", toy.gamma));
            let rows: Vec<Vec<f64>> =
                omega.iter().zip(&s).map(|(&w, &v)| vec![w, v]).collect();
            write_table(&ctx.out(&format!("toy_{i:02}_{j:02}.dat")), &h, &["omega_rad_s", "s"], &rows)?;
            let sym = detect_symmetry(&omega, &s, 0.0, 0.5 * toy.gamma, &SymmetryConfig::default())?;
            summary.push(vec![area_pi, phase, sym.asymmetry, class_code(sym.classification)]);
            println!(
                "area_pi={area_pi:.4}  phase={phase:.4}  asymmetry={:+.4e}  class={}",
                sym.asymmetry,
                class_name(sym.classification)
            );
        }
    }
    let h = FileHeader::new("toy", &hash);
    write_table(&ctx.out("summary.dat"), &h, &["area_pi", "phase_rad", "asymmetry", "class"], &summary)
}

fn tables(
    materials_file: Option<&Path>,
    isotopes_file: Option<&Path>,
    beams_file: Option<&Path>,
) -> Result<(MaterialTable, IsotopeTable, BeamTable)> {
    let materials = match materials_file {
        Some(p) => load_materials(p)?,
        None => bundled_materials().clone(),
    };
    let isotopes = match isotopes_file {
        Some(p) => load_isotopes(p)?,
        None => bundled_isotopes().clone(),
    };
    let beams = match beams_file {
        Some(p) => load_beams(p)?,
        None => bundled_beams().clone(),
    };
    Ok((materials, isotopes, beams))
}

/// Grid search over cavity layouts; writes a ranked table per isotope and
/// photon-budget curves for the best layout at every tabulated conversion
/// coefficient.
pub fn run_optimize(ctx: &RunContext) -> Result<()> {
    let (cfg, hash) = load_scenario(&ctx.config_path)?;
    let opt = cfg.require_optimize()?;
    let (materials, isotopes, beams) = tables(
        opt.materials_file.as_deref(),
        opt.isotopes_file.as_deref(),
        opt.beams_file.as_deref(),
    )?;

    for name in &opt.isotopes {
        let iso = isotopes.lookup(name)?;
        let beam = beams.lookup(name)?;
        let report = optimize_cavity(
            iso,
            &materials,
            beam,
            &opt.mirrors,
            &opt.d_top_nm,
            &opt.d_cen_nm,
            opt.layer_nm,
            opt.t_fwhm_fs,
            iso.alpha_ref,
        )?;
        for (cand, why) in &report.skipped {
            eprintln!(
                "warning: {name} {}({:.2} nm)/C({:.2} nm) skipped: {why}",
                cand.mirror, cand.d_top_nm, cand.d_cen_nm
            );
        }

        let header = FileHeader::new("optimize", &hash)
            .with("isotope", name)
            .with("mirrors", opt.mirrors.join(" "))
            .with("layer_nm", opt.layer_nm)
            .with("t_fwhm_fs", opt.t_fwhm_fs)
            .with("alpha", iso.alpha_ref);
        let rows: Vec<Vec<f64>> = report
            .ranked
            .iter()
            .take(opt.top)
            .map(|b| {
                let mirror_index = opt
                    .mirrors
                    .iter()
                    .position(|m| *m == b.candidate.mirror)
                    .unwrap_or(0) as f64;
                vec![
                    mirror_index,
                    b.candidate.d_top_nm,
                    b.candidate.d_cen_nm,
                    b.theta0 * 1e3,
                    b.theta1 * 1e3,
                    b.theta_b_mrad,
                    b.d_b_nm,
                    b.n_exc,
                    b.kappa,
                    b.kappa_r,
                    b.g_sqrt_n,
                    b.n_ph_min,
                ]
            })
            .collect();
        write_table(
            &ctx.out(&format!("ranked_{name}.dat")),
            &header,
            &[
                "mirror_index",
                "d_top_nm",
                "d_cen_nm",
                "theta0_mrad",
                "theta1_mrad",
                "theta_b_mrad",
                "d_b_nm",
                "n_exc",
                "kappa_rad_s",
                "kappa_r_rad_s",
                "g_sqrt_n_rad_s",
                "n_ph_min",
            ],
            &rows,
        )?;

        let best = report.best();
        println!(
            "{name}: best {}({:.1} nm)/C({:.1} nm)  theta0={:.3} mrad  theta_B={:.3} mrad  \
             d_B={:.0} nm  N_exc={:.2e}  N_ph_min={:.2e} (alpha={})",
            best.candidate.mirror,
            best.candidate.d_top_nm,
            best.candidate.d_cen_nm,
            best.theta0 * 1e3,
            best.theta_b_mrad,
            best.d_b_nm,
            best.n_exc,
            best.n_ph_min,
            best.alpha,
        );
        for (k, &alpha) in iso.alpha.iter().enumerate() {
            let scaled = best.with_alpha(alpha)?;
            if alpha != best.alpha {
                println!("{name}: alpha={alpha}  N_ph_min={:.2e}", scaled.n_ph_min);
            }
            if !opt.curve_t_fwhm_fs.is_empty() {
                let curve = budget_curve(&scaled, iso.omega0(), &opt.curve_t_fwhm_fs);
                let h = header.clone().with("curve_alpha", alpha);
                let rows: Vec<Vec<f64>> = curve.iter().map(|&(t, n)| vec![t, n]).collect();
                write_table(
                    &ctx.out(&format!("curve_{name}_alpha{k}.dat")),
                    &h,
                    &["t_fwhm_fs", "n_ph_min"],
                    &rows,
                )?;
            }
        }
    }
    Ok(())
}

/// Analyze one cavity layout: reflectivity data, fitted parameters and the
/// model curves they imply.
pub fn run_fit_cavity(ctx: &RunContext) -> Result<()> {
    let (cfg, hash) = load_scenario(&ctx.config_path)?;
    let fitc = cfg.require_fit()?;
    let (materials, isotopes, _) =
        tables(fitc.materials_file.as_deref(), fitc.isotopes_file.as_deref(), None)?;
    let iso = isotopes.lookup(&fitc.isotope)?;
    let cand = CavityCandidate {
        mirror: fitc.mirror.clone(),
        d_top_nm: fitc.d_top_nm,
        d_cen_nm: fitc.d_cen_nm,
        layer_nm: fitc.layer_nm,
    };
    let analysis = analyze_candidate(iso, &materials, &cand)?;
    let fit = &analysis.fit;

    let header = FileHeader::new("fit-cavity", &hash)
        .with("isotope", &fitc.isotope)
        .with("mirror", &fitc.mirror)
        .with("kappa_rad_s", format!("{:.6e}", fit.kappa))
        .with("kappa_r_rad_s", format!("{:.6e}", fit.kappa_r))
        .with("theta0_rad", format!("{:.9e}", fit.theta0))
        .with("g_sqrt_n_rad_s", format!("{:.6e}", fit.g_sqrt_n))
        .with("delta_c_slope_rad_s_per_rad", format!("{:.6e}", fit.delta_c_slope))
        .with("residual_rms", format!("{:.6e}", fit.residual));

    let rocking_rows: Vec<Vec<f64>> = analysis
        .data
        .theta
        .iter()
        .zip(&analysis.data.rocking)
        .map(|(&th, &r)| {
            let dc = fit.delta_c_slope * (th - fit.theta0);
            vec![th, r, rocking_model(fit.kappa, fit.kappa_r, dc)]
        })
        .collect();
    write_table(
        &ctx.out("rocking.dat"),
        &header,
        &["theta_rad", "reflectivity", "model"],
        &rocking_rows,
    )?;

    let dc_line = fit.delta_c_slope * (analysis.data.theta_spectrum - fit.theta0);
    let spectrum_rows: Vec<Vec<f64>> = analysis
        .data
        .detuning
        .iter()
        .zip(&analysis.data.spectrum)
        .map(|(&d, &s)| {
            let m = spectrum_model_amplitude(
                fit.kappa,
                fit.kappa_r,
                fit.g_sqrt_n,
                analysis.data.gamma,
                dc_line,
                d,
            )
            .norm_sqr();
            vec![d, s, m]
        })
        .collect();
    write_table(
        &ctx.out("line_spectrum.dat"),
        &header,
        &["detuning_rad_s", "reflectivity", "model"],
        &spectrum_rows,
    )?;

    println!(
        "kappa={:.4e} rad/s  kappa_r={:.4e} rad/s  theta0={:.4e} rad  g_sqrt_n={:.4e} rad/s  \
         residual={:.3e}  iterations={}",
        fit.kappa, fit.kappa_r, fit.theta0, fit.g_sqrt_n, fit.residual, fit.iterations
    );
    Ok(())
}

/// Dispatch table used by the binary; kept here so the library exposes the
/// full CLI surface for integration tests.
pub fn run(command: &str, ctx: &RunContext) -> Result<()> {
    match command {
        "simulate" => run_simulate(ctx),
        "sase" => run_sase(ctx),
        "optimize" => run_optimize(ctx),
        "toy" => run_toy(ctx),
        "fit-cavity" => run_fit_cavity(ctx),
        other => Err(Error::Invalid(format!("unknown command {other}"))),
    }
}
