//! Grazing-incidence reflectivity of layered cavities (Parratt recursion).
//!
//! A stack is vacuum on top, finite layers in order, and one semi-infinite
//! substrate at the bottom. Each layer is described by its refractive index
//! n = 1 − δ + iβ at the working photon energy. The specular reflection
//! amplitude follows from the recursive interface relation evaluated from
//! the substrate upward. Guided cavity modes appear as sharp minima of
//! |r(θ)|² versus grazing angle.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// ħc in keV·nm, converting photon energy to vacuum wavenumber.
pub const HBARC_KEV_NM: f64 = 0.197_326_980_4;

#[derive(Debug, Clone)]
pub struct Layer {
    pub material: String,
    /// Thickness in nm; `None` marks the semi-infinite substrate.
    pub thickness: Option<f64>,
    /// Refractive decrement δ.
    pub delta: f64,
    /// Absorption index β.
    pub beta_abs: f64,
}

impl Layer {
    pub fn new(material: &str, thickness: f64, delta: f64, beta_abs: f64) -> Self {
        Self { material: material.into(), thickness: Some(thickness), delta, beta_abs }
    }

    pub fn substrate(material: &str, delta: f64, beta_abs: f64) -> Self {
        Self { material: material.into(), thickness: None, delta, beta_abs }
    }
}

/// Layered structure, topmost layer first, substrate last. Vacuum above the
/// first layer is implicit.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub photon_energy_kev: f64,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, photon_energy_kev: f64) -> Result<Self> {
        if !(photon_energy_kev > 0.0) {
            return Err(Error::Invalid("photon energy must be positive".into()));
        }
        if layers.is_empty() {
            return Err(Error::Invalid("stack needs at least a substrate".into()));
        }
        let n_sub = layers.iter().filter(|l| l.thickness.is_none()).count();
        if n_sub != 1 || layers.last().unwrap().thickness.is_some() {
            return Err(Error::Invalid(
                "exactly one semi-infinite substrate is required, at the bottom".into(),
            ));
        }
        for l in &layers {
            if let Some(d) = l.thickness {
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::Invalid(format!(
                        "layer {} has invalid thickness {d}",
                        l.material
                    )));
                }
            }
            if !(l.delta.is_finite() && l.beta_abs >= 0.0) {
                return Err(Error::Invalid(format!(
                    "layer {} has invalid optical constants",
                    l.material
                )));
            }
        }
        Ok(Self { layers, photon_energy_kev })
    }

    /// Vacuum wavenumber k₀ = E/ħc in nm⁻¹.
    pub fn wavenumber(&self) -> f64 {
        self.photon_energy_kev / HBARC_KEV_NM
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 0.1) {
        return Err(Error::Invalid(format!(
            "grazing angle {theta} rad outside the supported range (0, 100 mrad)"
        )));
    }
    Ok(())
}

/// z-component of the wavevector in a medium of index n at grazing angle θ:
/// k_z = k₀ √(n² − cos²θ). The square-root branch with Im(k_z) ≥ 0 is
/// chosen so evanescent waves decay into the medium.
fn kz(k0: f64, n: C64, cos_theta: f64) -> C64 {
    let mut root = (n * n - cos_theta * cos_theta).sqrt();
    if root.im < 0.0 || (root.im == 0.0 && root.re < 0.0) {
        root = -root;
    }
    k0 * root
}

fn parratt(k0: f64, indices: &[C64], thicknesses: &[Option<f64>], theta: f64) -> C64 {
    let cos_theta = theta.cos();
    // medium 0 is vacuum; media 1..=L are the stack layers
    let mut kzs = Vec::with_capacity(indices.len() + 1);
    kzs.push(kz(k0, C64::new(1.0, 0.0), cos_theta));
    for &n in indices {
        kzs.push(kz(k0, n, cos_theta));
    }
    // recursion upward from the substrate (no reflection from below it)
    let mut x = C64::new(0.0, 0.0);
    for j in (0..indices.len()).rev() {
        let fresnel = (kzs[j] - kzs[j + 1]) / (kzs[j] + kzs[j + 1]);
        // phase across layer j+1 (substrate: X = 0 so the phase is irrelevant)
        let phase_sq = match thicknesses[j] {
            Some(d) => (C64::new(0.0, 2.0 * d) * kzs[j + 1]).exp(),
            None => C64::new(1.0, 0.0),
        };
        x = (fresnel + x * phase_sq) / (1.0 + fresnel * x * phase_sq);
    }
    x
}

/// Specular reflection amplitude r(θ) of the stack; |r|² is the
/// rocking-curve intensity.
pub fn parratt_reflectivity(stack: &LayerStack, theta: f64) -> Result<C64> {
    check_theta(theta)?;
    let indices: Vec<C64> = stack
        .layers
        .iter()
        .map(|l| C64::new(1.0 - l.delta, l.beta_abs))
        .collect();
    let thicknesses: Vec<Option<f64>> = stack.layers.iter().map(|l| l.thickness).collect();
    Ok(parratt(stack.wavenumber(), &indices, &thicknesses, theta))
}

/// Complex refractive-index contribution of a narrow nuclear resonance,
/// −C·(γ/2)/(Δ + iγ/2): purely absorptive (+iC) on resonance, dispersive in
/// the wings. `strength` is C = n_N σ₀ f_LM/(2k₀) for number density n_N,
/// resonant cross section σ₀ and recoilless fraction f_LM.
pub fn resonant_index_shift(strength: f64, gamma: f64, detuning: f64) -> C64 {
    -strength * 0.5 * gamma / C64::new(detuning, 0.5 * gamma)
}

/// Reflection amplitude with one layer carrying a nuclear resonance, as a
/// function of the detuning Δ from the nuclear line (same units as `gamma`).
pub fn parratt_with_resonance(
    stack: &LayerStack,
    theta: f64,
    resonant_layer: usize,
    strength: f64,
    gamma: f64,
    detuning: f64,
) -> Result<C64> {
    check_theta(theta)?;
    if resonant_layer >= stack.layers.len() {
        return Err(Error::Invalid(format!(
            "resonant layer index {resonant_layer} out of range"
        )));
    }
    if !(gamma > 0.0) || !(strength >= 0.0) {
        return Err(Error::Invalid("resonance needs gamma > 0 and strength >= 0".into()));
    }
    let mut indices: Vec<C64> = stack
        .layers
        .iter()
        .map(|l| C64::new(1.0 - l.delta, l.beta_abs))
        .collect();
    indices[resonant_layer] += resonant_index_shift(strength, gamma, detuning);
    let thicknesses: Vec<Option<f64>> = stack.layers.iter().map(|l| l.thickness).collect();
    Ok(parratt(stack.wavenumber(), &indices, &thicknesses, theta))
}

/// |r(θ)|² over an angle grid.
pub fn rocking_curve(stack: &LayerStack, theta_grid: &[f64]) -> Result<Vec<f64>> {
    theta_grid
        .iter()
        .map(|&t| parratt_reflectivity(stack, t).map(|r| r.norm_sqr()))
        .collect()
}

/// Locate guided-mode angles as local minima of the rocking curve with
/// prominence at least `min_prominence` times the curve's total range,
/// refined by a parabola through the three points around each minimum.
/// Returned ascending. The curve should sample each dip with ≥ 5 points.
pub fn find_mode_angles(
    theta_grid: &[f64],
    curve: &[f64],
    min_prominence: f64,
) -> Result<Vec<f64>> {
    if theta_grid.len() != curve.len() || theta_grid.len() < 5 {
        return Err(Error::Invalid("rocking curve needs at least 5 matching samples".into()));
    }
    let hi = curve.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = curve.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = hi - lo;
    let mut modes = Vec::new();
    for i in 1..curve.len() - 1 {
        if !(curve[i] < curve[i - 1] && curve[i] <= curve[i + 1]) {
            continue;
        }
        // prominence: smaller of the climbs to the left and right before a
        // deeper point (or the grid edge) is reached
        let climb = |iter: &mut dyn Iterator<Item = usize>| -> f64 {
            let mut peak = curve[i];
            for k in iter {
                if curve[k] < curve[i] {
                    break;
                }
                peak = peak.max(curve[k]);
            }
            peak - curve[i]
        };
        let left = climb(&mut (0..i).rev());
        let right = climb(&mut (i + 1..curve.len()));
        if left.min(right) < min_prominence * range {
            continue;
        }
        // parabolic refinement
        let denom = curve[i + 1] - 2.0 * curve[i] + curve[i - 1];
        let theta = if denom > 0.0 {
            let shift = 0.5 * (curve[i - 1] - curve[i + 1]) / denom;
            let h = 0.5 * (theta_grid[i + 1] - theta_grid[i - 1]);
            theta_grid[i] + shift.clamp(-1.0, 1.0) * h
        } else {
            theta_grid[i]
        };
        modes.push(theta);
    }
    if modes.is_empty() {
        return Err(Error::NoModes);
    }
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // rough optical constants at 14.4 keV for tests (the bundled data files
    // carry the curated values)
    const PT: (f64, f64) = (1.72e-5, 2.3e-6);
    const C_LAYER: (f64, f64) = (2.2e-6, 1.5e-9);
    const FE: (f64, f64) = (7.3e-6, 3.2e-7);

    fn reference_stack() -> LayerStack {
        LayerStack::new(
            vec![
                Layer::new("Pt", 2.6, PT.0, PT.1),
                Layer::new("C", 7.9, C_LAYER.0, C_LAYER.1),
                Layer::new("Fe", 1.5, FE.0, FE.1),
                Layer::new("C", 9.3, C_LAYER.0, C_LAYER.1),
                Layer::substrate("Pt", PT.0, PT.1),
            ],
            14.4,
        )
        .unwrap()
    }

    #[test]
    fn zero_contrast_reflects_nothing() {
        let stack = LayerStack::new(
            vec![
                Layer::new("A", 5.0, 0.0, 0.0),
                Layer::new("B", 12.0, 0.0, 0.0),
                Layer::substrate("C", 0.0, 0.0),
            ],
            14.4,
        )
        .unwrap();
        let r = parratt_reflectivity(&stack, 3e-3).unwrap();
        assert!(r.norm() < 1e-15);
    }

    #[test]
    fn total_external_reflection_below_critical_angle() {
        // lossless single interface below theta_c = sqrt(2 delta): |r| = 1
        let delta = 1.72e-5;
        let stack =
            LayerStack::new(vec![Layer::substrate("Pt", delta, 0.0)], 14.4).unwrap();
        let theta_c = (2.0 * delta).sqrt();
        for f in [0.3, 0.6, 0.9] {
            let r = parratt_reflectivity(&stack, f * theta_c).unwrap();
            assert!((r.norm() - 1.0).abs() < 1e-10, "theta = {} theta_c", f);
        }
        // well above the critical angle the Fresnel tail is small
        let r_hi = parratt_reflectivity(&stack, 5.0 * theta_c).unwrap();
        assert!(r_hi.norm() < 0.1);
    }

    #[test]
    fn reflectivity_bounded_and_lossy_below_one() {
        let stack = reference_stack();
        for i in 1..=60 {
            let theta = i as f64 * 2e-4;
            let r = parratt_reflectivity(&stack, theta).unwrap().norm_sqr();
            assert!(r <= 1.0 + 1e-12);
            assert!(r < 1.0);
        }
    }

    #[test]
    fn zero_thickness_layer_is_invisible() {
        let base = reference_stack();
        let mut padded_layers = base.layers.clone();
        padded_layers.insert(2, Layer::new("Pd", 0.0, 3.9e-6, 4.0e-7));
        let padded = LayerStack::new(padded_layers, 14.4).unwrap();
        for i in 1..=40 {
            let theta = i as f64 * 2.5e-4;
            let a = parratt_reflectivity(&base, theta).unwrap();
            let b = parratt_reflectivity(&padded, theta).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn continuous_across_critical_angle() {
        let stack =
            LayerStack::new(vec![Layer::substrate("Pt", PT.0, PT.1)], 14.4).unwrap();
        let theta_c = (2.0 * PT.0).sqrt();
        let eps = 1e-9;
        let below = parratt_reflectivity(&stack, theta_c - eps).unwrap();
        let above = parratt_reflectivity(&stack, theta_c + eps).unwrap();
        assert!((below - above).norm() < 1e-4);
    }

    #[test]
    fn guided_mode_appears_as_dip() {
        let stack = reference_stack();
        let grid: Vec<f64> = (1..=3000).map(|i| i as f64 * 2e-6).collect();
        let curve = rocking_curve(&stack, &grid).unwrap();
        let modes = find_mode_angles(&grid, &curve, 0.05).unwrap();
        assert!(!modes.is_empty());
        // first mode sits in the guided-mode region above the C critical
        // angle and below the Pt critical angle
        assert!(modes[0] > (2.0 * C_LAYER.0).sqrt());
        assert!(modes[0] < 1.5 * (2.0 * PT.0).sqrt());
    }

    #[test]
    fn synthetic_double_dip_centers_recovered() {
        let grid: Vec<f64> = (0..2000).map(|i| 1e-3 + i as f64 * 5e-6).collect();
        let dip = |t: f64, c: f64, w: f64| -0.4 / (1.0 + ((t - c) / w).powi(2));
        let curve: Vec<f64> = grid
            .iter()
            .map(|&t| 0.9 + dip(t, 3.2e-3, 1e-4) + dip(t, 6.8e-3, 1.5e-4))
            .collect();
        let modes = find_mode_angles(&grid, &curve, 0.1).unwrap();
        assert_eq!(modes.len(), 2);
        assert!((modes[0] - 3.2e-3).abs() < 5e-6);
        assert!((modes[1] - 6.8e-3).abs() < 5e-6);
    }

    #[test]
    fn monotone_curve_has_no_modes() {
        let grid: Vec<f64> = (0..100).map(|i| 1e-3 + i as f64 * 1e-5).collect();
        let curve: Vec<f64> = grid.iter().map(|&t| 1.0 / (1.0 + t * 1e3)).collect();
        assert!(matches!(find_mode_angles(&grid, &curve, 0.05), Err(Error::NoModes)));
    }

    #[test]
    fn resonance_adds_absorption_on_line_center() {
        let shift = resonant_index_shift(1.16e-4, 1.0, 0.0);
        assert!(shift.re.abs() < 1e-15);
        assert_relative_eq!(shift.im, 1.16e-4, max_relative = 1e-12);
        // far detuned: contribution vanishes
        let far = resonant_index_shift(1.16e-4, 1.0, 1e6);
        assert!(far.norm() < 1e-9);
    }

    #[test]
    fn rejects_malformed_stacks() {
        assert!(LayerStack::new(vec![Layer::new("Pt", 2.0, 1e-5, 1e-6)], 14.4).is_err());
        assert!(LayerStack::new(
            vec![Layer::substrate("Pt", 1e-5, 1e-6), Layer::new("C", 2.0, 1e-6, 1e-9)],
            14.4
        )
        .is_err());
        let stack = reference_stack();
        assert!(parratt_reflectivity(&stack, 0.0).is_err());
        assert!(parratt_reflectivity(&stack, 0.2).is_err());
    }
}
