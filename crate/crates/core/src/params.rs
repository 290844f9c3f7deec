//! Quantum-optical system parameters of the cavity–ensemble model.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ħ in eV·s, used when converting rates to energy units for file headers.
pub const HBAR_EV_S: f64 = 6.582119569e-16;

/// Largest supported ensemble size. The density matrix is dense
/// (N+1)×(N+1) complex, so N = 4096 corresponds to roughly 270 MB per
/// state; anything beyond that is rejected up front.
pub const N_ATOMS_CAP: usize = 4096;

/// All quantum-optical constants of the adiabatically eliminated
/// cavity–ensemble model, with the derived quantities ζ and ξ.
///
/// All rates are angular frequencies in s⁻¹. The derived constants are
///
/// ```text
/// ζ = 2|g|² / (3 (κ + iΔ_C)),    ξ = ζ √(3 κ_R) / g*
/// ```
///
/// Re(ζ) > 0 whenever κ > 0; N·Re(ζ) is the superradiant decay rate and
/// N·Im(ζ) the cooperative Lamb shift.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_atoms: usize,
    /// Single-nucleus radiative decay rate γ.
    pub gamma: f64,
    /// Coupling of the cavity mode to one nucleus.
    pub g: C64,
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Cavity in-coupling rate κ_R.
    pub kappa_r: f64,
    /// Cavity detuning Δ_C.
    pub delta_c: f64,
    zeta: C64,
    xi: C64,
}

impl SystemParams {
    pub fn new(
        n_atoms: usize,
        gamma: f64,
        g: C64,
        kappa: f64,
        kappa_r: f64,
        delta_c: f64,
    ) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::Invalid("n_atoms must be at least 1".into()));
        }
        if n_atoms > N_ATOMS_CAP {
            return Err(Error::Invalid(format!(
                "n_atoms = {n_atoms} exceeds the dimension cap {N_ATOMS_CAP}"
            )));
        }
        if !(gamma > 0.0) || !(kappa > 0.0) || !(kappa_r > 0.0) {
            return Err(Error::Invalid(
                "gamma, kappa and kappa_r must be strictly positive".into(),
            ));
        }
        if !gamma.is_finite() || !kappa.is_finite() || !kappa_r.is_finite()
            || !delta_c.is_finite() || !g.is_finite()
        {
            return Err(Error::Invalid("non-finite parameter".into()));
        }
        let denom = C64::new(kappa, delta_c);
        let zeta = 2.0 * g.norm_sqr() / (3.0 * denom);
        let xi = if g.norm_sqr() > 0.0 {
            zeta * (3.0 * kappa_r).sqrt() / g.conj()
        } else {
            C64::new(0.0, 0.0)
        };
        Ok(Self { n_atoms, gamma, g, kappa, kappa_r, delta_c, zeta, xi })
    }

    /// Convenience constructor from the collective coupling g√N (real g).
    pub fn from_collective(
        n_atoms: usize,
        gamma: f64,
        g_sqrt_n: f64,
        kappa: f64,
        kappa_r: f64,
        delta_c: f64,
    ) -> Result<Self> {
        let g = C64::new(g_sqrt_n / (n_atoms as f64).sqrt(), 0.0);
        Self::new(n_atoms, gamma, g, kappa, kappa_r, delta_c)
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn xi(&self) -> C64 {
        self.xi
    }

    /// Superradiant decay rate N·Re(ζ) of the collective coherence.
    pub fn collective_rate(&self) -> f64 {
        self.n_atoms as f64 * self.zeta.re
    }

    /// Cooperative Lamb shift N·Im(ζ).
    pub fn lamb_shift(&self) -> f64 {
        self.n_atoms as f64 * self.zeta.im
    }

    /// Empty-cavity reflection coefficient 2κ_R/(κ + iΔ_C) − 1 that multiplies
    /// the input field in the input–output relation.
    pub fn empty_cavity_reflection(&self) -> C64 {
        2.0 * self.kappa_r / C64::new(self.kappa, self.delta_c) - 1.0
    }

    /// Same parameters with a different detuning (ζ and ξ recomputed).
    pub fn with_delta_c(&self, delta_c: f64) -> Result<Self> {
        Self::new(self.n_atoms, self.gamma, self.g, self.kappa, self.kappa_r, delta_c)
    }

    /// Same parameters with a different ensemble size, keeping g√N invariant.
    pub fn with_rescaled_n(&self, n_atoms: usize) -> Result<Self> {
        let scale = (self.n_atoms as f64 / n_atoms as f64).sqrt();
        Self::new(n_atoms, self.gamma, self.g * scale, self.kappa, self.kappa_r, self.delta_c)
    }
}
