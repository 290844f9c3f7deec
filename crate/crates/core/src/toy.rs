//! Closed-form single-resonance interference spectra.
//!
//! A δ-like impulse of amplitude A₀ kicks a single damped dipole; the
//! total field is the unscattered impulse plus the free decay of the
//! dipole. Interference between the flat impulse spectrum and the
//! Lorentzian decay line produces an absorption dip, a gain peak or a
//! Fano-like profile depending on the pulse area Φ = 2dA₀ and an optional
//! extra phase on the scattered term. This is the analytic reference the
//! N = 1 collective simulator is checked against.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Parameters of the impulsively driven single resonance.
#[derive(Debug, Clone, Copy)]
pub struct ToyParams {
    /// Drive impulse amplitude A₀ (the drive is A₀ δ(t)).
    pub a0: f64,
    /// Dipole magnitude d; the pulse area is Φ = 2dA₀.
    pub d: f64,
    /// Sample constant β (density/size prefactor of the scattered field).
    pub beta: f64,
    /// Resonance decay rate γ.
    pub gamma: f64,
    /// Extra phase on the scattered term; π/2 gives Fano-like profiles.
    pub phase_shift: f64,
    /// Resonance frequency ω₀ (the carrier is factored out of the field).
    pub omega0: f64,
}

impl ToyParams {
    pub fn new(a0: f64, d: f64, beta: f64, gamma: f64, phase_shift: f64, omega0: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Invalid("gamma must be positive".into()));
        }
        if !(d > 0.0) {
            return Err(Error::Invalid("dipole magnitude d must be positive".into()));
        }
        Ok(Self { a0, d, beta, gamma, phase_shift, omega0 })
    }

    /// Pulse area Φ = 2dA₀ of the impulsive drive.
    pub fn pulse_area(&self) -> f64 {
        2.0 * self.d * self.a0
    }
}

/// Field sample at one instant. The undamped impulse A₀δ(t) cannot be
/// sampled; it is carried as the analytic amplitude `impulse` (its spectral
/// contribution is the constant A₀) and only the scattered part is a
/// function of time.
#[derive(Debug, Clone, Copy)]
pub struct ToyField {
    /// Amplitude of the δ(t) term (spectrally flat contribution).
    pub impulse: f64,
    /// Scattered field −(βd/2)·sin(Φ)·e^{iφ}·e^{−γt/2} for t ≥ 0, with the
    /// carrier e^{−iω₀t} factored out.
    pub scattered: C64,
}

/// Total field at time `t` (rotating frame at ω₀).
pub fn toy_field(params: &ToyParams, t: f64) -> ToyField {
    let phi_area = params.pulse_area();
    let scattered = if t >= 0.0 {
        let amp = -0.5 * params.beta * params.d * phi_area.sin() * (-0.5 * params.gamma * t).exp();
        amp * C64::from_polar(1.0, params.phase_shift)
    } else {
        C64::new(0.0, 0.0)
    };
    ToyField { impulse: params.a0, scattered }
}

/// Unnormalized spectral intensity
///
/// ```text
/// S(ω) = |A₀ − (i/2)·βd·sin(Φ)·e^{iφ} / (ω − ω₀ + iγ/2)|²
/// ```
///
/// (the Fourier transform of the impulse plus the scattered decay, with the
/// convention F(ω) = ∫ f(t) e^{iωt} dt). The overall proportionality
/// constant of the physical intensity is left at 1.
pub fn toy_spectrum(params: &ToyParams, omega_grid: &[f64]) -> Vec<f64> {
    let phi_area = params.pulse_area();
    let line = 0.5 * params.beta * params.d * phi_area.sin()
        * C64::from_polar(1.0, params.phase_shift)
        * C64::new(0.0, 1.0);
    omega_grid
        .iter()
        .map(|&w| {
            let denom = C64::new(w - params.omega0, 0.5 * params.gamma);
            (params.a0 - line / denom).norm_sqr()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::symmetric_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params_with_area(phi: f64, phase: f64) -> ToyParams {
        let d = 0.8;
        ToyParams::new(phi / (2.0 * d), d, 1.3, 1.0, phase, 0.0).unwrap()
    }

    #[test]
    fn pi_area_scatters_nothing() {
        let p = params_with_area(PI, 0.0);
        let f = toy_field(&p, 0.7);
        assert!(f.scattered.norm() < 1e-15);
        let s = toy_spectrum(&p, &symmetric_grid(10.0, 101));
        for v in s {
            assert!((v - p.a0 * p.a0).abs() < 1e-12 * p.a0 * p.a0);
        }
    }

    #[test]
    fn causality_and_decay_value() {
        let p = params_with_area(PI / 2.0, 0.0);
        assert_eq!(toy_field(&p, -1e-9).scattered, C64::new(0.0, 0.0));
        // t = 2/gamma: amplitude -(beta d / 2) e^{-1}
        let f = toy_field(&p, 2.0 / p.gamma);
        assert_relative_eq!(
            f.scattered.re,
            -0.5 * p.beta * p.d * (-1.0_f64).exp(),
            max_relative = 1e-14
        );
        assert_eq!(f.scattered.im, 0.0);
    }

    #[test]
    fn weak_field_is_symmetric_absorption_dip() {
        let p = params_with_area(PI / 50.0, 0.0);
        let grid = symmetric_grid(10.0, 2001);
        let s = toy_spectrum(&p, &grid);
        let mid = grid.len() / 2;
        // dip at resonance
        assert!(s[mid] < p.a0 * p.a0);
        assert!(s[mid] < s[0] && s[mid] < s[grid.len() - 1]);
        // exactly symmetric at zero extra phase
        for k in 0..mid {
            assert_relative_eq!(s[k], s[grid.len() - 1 - k], max_relative = 1e-12);
        }
    }

    #[test]
    fn inverted_area_gives_gain_peak() {
        let p = params_with_area(1.5 * PI, 0.0);
        let grid = symmetric_grid(10.0, 2001);
        let s = toy_spectrum(&p, &grid);
        let mid = grid.len() / 2;
        assert!(s[mid] > p.a0 * p.a0);
        assert!(s[mid] > s[0]);
    }

    #[test]
    fn quarter_phase_makes_fano_asymmetry() {
        let p = params_with_area(PI / 50.0, PI / 2.0);
        let s = toy_spectrum(&p, &[-1.0, 1.0]);
        assert!((s[0] - s[1]).abs() > 1e-3 * p.a0 * p.a0);
    }

    #[test]
    fn scattered_field_periodic_in_area() {
        // the scattered term depends on the area only through sin(Φ); the
        // impulse background scales with A₀ and is not periodic
        let a = toy_field(&params_with_area(0.7 * PI, 0.3), 0.5).scattered;
        let b = toy_field(&params_with_area(2.7 * PI, 0.3), 0.5).scattered;
        assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-12);
    }

    #[test]
    fn wing_approach_sign_is_minus_sin_area_cos_phase() {
        // the odd (Fano) 1/ω term cancels in the two-sided wing mean,
        // leaving a 1/ω² approach whose sign is −sign(sin Φ · cos φ)
        let w_far = 400.0;
        for (phi, phase) in [
            (0.4 * PI, 0.0),
            (1.4 * PI, 0.0),
            (0.4 * PI, PI),
            (0.4 * PI, 0.25 * PI),
        ] {
            let p = params_with_area(phi, phase);
            let s = toy_spectrum(&p, &[-w_far, w_far]);
            let mean = 0.5 * (s[0] + s[1]);
            let expect = -(phi.sin() * phase.cos()).signum();
            assert_eq!(
                (mean - p.a0 * p.a0).signum(),
                expect,
                "phi={phi} phase={phase}"
            );
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(ToyParams::new(1.0, 0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ToyParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }
}
