//! Shared fixtures for the integration tests: the reference cavity rate
//! set and an independently coded two-level master-equation solver used as
//! an oracle for the N = 1 limit of the Dicke pipeline.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use num_complex::Complex64 as C64;

use nucavity::pulse::PulseRecord;
use nucavity::SystemParams;

/// Cavity rate set used throughout: γ of the 14.4 keV ⁵⁷Fe transition,
/// κ = 1.4·10⁶ γ, κ_R = 0.4 κ, Δ_C = κ, and g√N chosen so the collective
/// superradiant width N·Re(ζ) is 30 γ.
pub fn cavity_params(n: usize) -> SystemParams {
    let gamma: f64 = 7.09e6;
    let kappa = 1.4e6 * gamma;
    let g_sqrt_n = (90.0 * gamma * kappa).sqrt();
    SystemParams::from_collective(n, gamma, g_sqrt_n, kappa, 0.4 * kappa, kappa).unwrap()
}

pub const PI: f64 = std::f64::consts::PI;

/// Two-level density matrix in the {ground, excited} basis.
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelState {
    pub rho_gg: C64,
    pub rho_ge: C64,
    pub rho_eg: C64,
    pub rho_ee: C64,
}

impl TwoLevelState {
    pub fn ground() -> Self {
        Self {
            rho_gg: C64::new(1.0, 0.0),
            rho_ge: C64::new(0.0, 0.0),
            rho_eg: C64::new(0.0, 0.0),
            rho_ee: C64::new(0.0, 0.0),
        }
    }

    pub fn jz(&self) -> f64 {
        0.5 * (self.rho_ee.re - self.rho_gg.re)
    }
}

/// Right-hand side of the driven two-level master equation
///
///   dρ/dt = −i[H, ρ] + D (σ₋ρσ₊ − ½{σ₊σ₋, ρ}),
///   H = u σ₊ + u* σ₋ + λ σ₊σ₋,
///
/// written out element by element from the operator algebra rather than via
/// the library's ladder code. `d` is the total decay rate of the excited
/// population.
fn two_level_rhs(u: C64, lambda: f64, d: f64, s: &TwoLevelState) -> TwoLevelState {
    let i = C64::new(0.0, 1.0);
    // commutator worked out by hand:
    // [H, ρ]_gg = u* ρ_eg − u ρ_ge
    // [H, ρ]_ge = u* (ρ_ee − ρ_gg) − λ ρ_ge
    // [H, ρ]_ee = u ρ_ge − u* ρ_eg
    let c_gg = u.conj() * s.rho_eg - u * s.rho_ge;
    let c_ge = u.conj() * (s.rho_ee - s.rho_gg) - lambda * s.rho_ge;
    let c_ee = u * s.rho_ge - u.conj() * s.rho_eg;
    TwoLevelState {
        rho_gg: -i * c_gg + d * s.rho_ee,
        rho_ge: -i * c_ge - 0.5 * d * s.rho_ge,
        rho_eg: (-i * c_ge - 0.5 * d * s.rho_ge).conj(),
        rho_ee: -i * c_ee - d * s.rho_ee,
    }
}

fn axpy(s: &TwoLevelState, h: f64, k: &TwoLevelState) -> TwoLevelState {
    TwoLevelState {
        rho_gg: s.rho_gg + h * k.rho_gg,
        rho_ge: s.rho_ge + h * k.rho_ge,
        rho_eg: s.rho_eg + h * k.rho_eg,
        rho_ee: s.rho_ee + h * k.rho_ee,
    }
}

/// Integrate the two-level master equation with classic fixed-step RK4,
/// landing on every requested sample time. The step inside each interval is
/// chosen from the local rates so the truncation error stays far below the
/// 10⁻⁸ comparison level.
pub fn two_level_trajectory(
    params: &SystemParams,
    pulse: &PulseRecord,
    sample_times: &[f64],
) -> Vec<TwoLevelState> {
    assert_eq!(params.n_atoms, 1, "oracle is the N = 1 two-level system");
    let xi = params.xi();
    let lambda = params.zeta().im;
    let d = 2.0 * params.zeta().re + params.gamma;

    let mut out = Vec::with_capacity(sample_times.len());
    let mut s = TwoLevelState::ground();
    out.push(s);
    for w in sample_times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let rate = d.abs()
            + lambda.abs()
            + 2.0 * (xi * pulse.interp(0.5 * (t0 + t1))).norm()
            + 2.0 * (xi * pulse.interp(t0)).norm();
        let nsub = ((t1 - t0) * rate / 2e-3).ceil().max(8.0) as usize;
        let h = (t1 - t0) / nsub as f64;
        for j in 0..nsub {
            let t = t0 + j as f64 * h;
            let u = |tt: f64| xi * pulse.interp(tt);
            let k1 = two_level_rhs(u(t), lambda, d, &s);
            let k2 = two_level_rhs(u(t + 0.5 * h), lambda, d, &axpy(&s, 0.5 * h, &k1));
            let k3 = two_level_rhs(u(t + 0.5 * h), lambda, d, &axpy(&s, 0.5 * h, &k2));
            let k4 = two_level_rhs(u(t + h), lambda, d, &axpy(&s, h, &k3));
            s = TwoLevelState {
                rho_gg: s.rho_gg
                    + (h / 6.0) * (k1.rho_gg + 2.0 * k2.rho_gg + 2.0 * k3.rho_gg + k4.rho_gg),
                rho_ge: s.rho_ge
                    + (h / 6.0) * (k1.rho_ge + 2.0 * k2.rho_ge + 2.0 * k3.rho_ge + k4.rho_ge),
                rho_eg: s.rho_eg
                    + (h / 6.0) * (k1.rho_eg + 2.0 * k2.rho_eg + 2.0 * k3.rho_eg + k4.rho_eg),
                rho_ee: s.rho_ee
                    + (h / 6.0) * (k1.rho_ee + 2.0 * k2.rho_ee + 2.0 * k3.rho_ee + k4.rho_ee),
            };
        }
        out.push(s);
    }
    out
}
