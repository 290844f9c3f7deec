//! Photon budget for full collective inversion of a ⁵⁷Fe cavity: evaluate
//! one candidate layout end to end (rocking scan → linear-response fit →
//! beam geometry → N_Ph,min) and show the divergence-limited plateau of the
//! budget versus pulse duration.
//!
//! Run with: cargo run -p nucavity --example photon_budget

use nucavity::budget::{budget_curve, evaluate_candidate, CavityCandidate};
use nucavity::data::{bundled_beams, bundled_isotopes, bundled_materials};

fn main() -> nucavity::Result<()> {
    let iso = bundled_isotopes().lookup("fe57")?;
    let beam = bundled_beams().lookup("fe57")?;
    let cand = CavityCandidate {
        mirror: "Pt".into(),
        d_top_nm: 6.0,
        d_cen_nm: 20.0,
        layer_nm: 1.0,
    };
    let b = evaluate_candidate(iso, bundled_materials(), beam, &cand, 100.0, iso.alpha_ref)?;

    println!("isotope {}  cavity {}({} nm)/C({} nm)/{}(1 nm)/C/{}",
        b.isotope, cand.mirror, cand.d_top_nm, cand.d_cen_nm, iso.symbol, cand.mirror);
    println!("theta0 = {:.4} mrad  next mode at {:.4} mrad  divergence {:.3} mrad",
        b.theta0 * 1e3, b.theta1 * 1e3, b.theta_b_mrad);
    println!("spot d_B = {:.1} nm  N_exc = {:.3e}  N_coh = {:.3e}", b.d_b_nm, b.n_exc, b.n_coh);
    println!("fit: kappa = {:.3e}  kappa_r = {:.3e}  g_sqrt_n = {:.3e} (rad/s)",
        b.kappa, b.kappa_r, b.g_sqrt_n);
    println!("N_Ph,min = {:.3e} at t_FWHM = 100 fs", b.n_ph_min);

    println!("\nbudget versus pulse duration (divergence-limited plateau):");
    for (t, n) in budget_curve(&b, iso.omega0(), &[10.0, 50.0, 100.0, 500.0, 2000.0, 10000.0]) {
        println!("  t_FWHM = {t:8.0} fs  N_Ph,min = {n:.3e}");
    }
    Ok(())
}
