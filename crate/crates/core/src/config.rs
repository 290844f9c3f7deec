//! Scenario configuration files.
//!
//! A scenario is a single TOML document with a `schema_version`, an optional
//! global `seed`, and one section per concern. Unknown keys are rejected so
//! typos fail loudly, and every section that a command needs is validated up
//! front with a message naming the missing table.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::dicke::SpontaneousMode;
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Default RNG seed; `--seed` on the command line overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub pulse: Option<PulseConfig>,
    /// Pulse areas Φ to sweep, in units of π.
    #[serde(default)]
    pub sweep_area_pi: Option<Vec<f64>>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub toy: Option<ToyConfig>,
    #[serde(default)]
    pub optimize: Option<OptimizeConfig>,
    #[serde(default)]
    pub fit: Option<FitConfig>,
}

impl ScenarioConfig {
    pub fn require_system(&self) -> Result<&SystemConfig> {
        self.system
            .as_ref()
            .ok_or_else(|| Error::Config("missing [system] table".into()))
    }

    pub fn require_pulse(&self) -> Result<&PulseConfig> {
        self.pulse
            .as_ref()
            .ok_or_else(|| Error::Config("missing [pulse] table".into()))
    }

    pub fn require_toy(&self) -> Result<&ToyConfig> {
        self.toy
            .as_ref()
            .ok_or_else(|| Error::Config("missing [toy] table".into()))
    }

    pub fn require_optimize(&self) -> Result<&OptimizeConfig> {
        self.optimize
            .as_ref()
            .ok_or_else(|| Error::Config("missing [optimize] table".into()))
    }

    pub fn require_fit(&self) -> Result<&FitConfig> {
        self.fit
            .as_ref()
            .ok_or_else(|| Error::Config("missing [fit] table".into()))
    }
}

/// Quantum-optical system parameters. `gamma` is in s⁻¹; the cavity rates,
/// detuning and collective coupling are all given in units of γ so the same
/// file reads naturally across isotopes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_atoms: usize,
    /// Single-nucleus decay rate γ (s⁻¹).
    pub gamma: f64,
    /// Collective coupling g√N in units of γ.
    pub g_sqrt_n: f64,
    /// Cavity decay rate κ in units of γ.
    pub kappa: f64,
    /// Cavity in-coupling rate κ_R in units of γ.
    pub kappa_r: f64,
    /// Cavity detuning Δ_C in units of γ.
    #[serde(default)]
    pub delta_c: f64,
    #[serde(default)]
    pub spontaneous: SpontaneousChoice,
}

impl SystemConfig {
    pub fn build(&self) -> Result<SystemParams> {
        SystemParams::from_collective(
            self.n_atoms,
            self.gamma,
            self.g_sqrt_n * self.gamma,
            self.kappa * self.gamma,
            self.kappa_r * self.gamma,
            self.delta_c * self.gamma,
        )
    }

    pub fn spontaneous_mode(&self) -> SpontaneousMode {
        match self.spontaneous {
            SpontaneousChoice::Auto => SpontaneousMode::Auto,
            SpontaneousChoice::Off => SpontaneousMode::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpontaneousChoice {
    #[default]
    Auto,
    Off,
}

/// Exactly one drive source per scenario; the tagged enum makes it
/// impossible to configure two at once.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseConfig {
    /// Fourier-limited Gaussian. The area comes from `area_pi` or, if a
    /// sweep is configured, from the sweep list.
    Gaussian {
        t_fwhm_fs: f64,
        #[serde(default)]
        area_pi: Option<f64>,
    },
    /// Stochastic ensemble built with the partial-coherence method.
    /// `area_max_pi` is the effective area Φ_max of the fixed per-shot
    /// photon number.
    Sase {
        t_fwhm_fs: f64,
        f_sase: f64,
        n_pulses: usize,
        area_max_pi: f64,
        /// Also emit spectra averaged within resonant-intensity quartiles.
        #[serde(default)]
        group_by_intensity: bool,
    },
    /// Pre-sampled amplitude from a columnar file.
    File { path: PathBuf },
}

/// Detuning window for spectral output, in collective half-widths around the
/// line center.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_half_span")]
    pub half_span_linewidths: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_half_span() -> f64 {
    12.0
}

fn default_points() -> usize {
    1201
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { half_span_linewidths: default_half_span(), points: default_points() }
    }
}

/// Single-resonance interference model: spectra for every combination of
/// pulse area and scattering phase.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    /// Impulse amplitude A₀ (the layer thickness follows from the area).
    #[serde(default = "default_one")]
    pub a0: f64,
    #[serde(default = "default_one")]
    pub beta: f64,
    /// Line decay rate γ; spectra are reported in these units.
    #[serde(default = "default_one")]
    pub gamma: f64,
    /// Pulse areas Φ in units of π.
    pub areas_pi: Vec<f64>,
    /// Scattering phases φ in radians.
    pub phases: Vec<f64>,
    #[serde(default = "default_toy_span")]
    pub half_span_gamma: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_one() -> f64 {
    1.0
}

fn default_toy_span() -> f64 {
    40.0
}

/// Grid search over cavity layouts, one report per isotope.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub isotopes: Vec<String>,
    pub mirrors: Vec<String>,
    /// Top mirror thickness grid (nm).
    pub d_top_nm: Vec<f64>,
    /// Guiding layer thickness grid (nm).
    pub d_cen_nm: Vec<f64>,
    /// Resonant layer thickness (nm).
    pub layer_nm: f64,
    /// Pulse duration FWHM (fs) for the budget.
    pub t_fwhm_fs: f64,
    /// Durations for the budget-versus-duration curve of the best layout.
    #[serde(default)]
    pub curve_t_fwhm_fs: Vec<f64>,
    /// How many ranked layouts to write per isotope.
    #[serde(default = "default_top")]
    pub top: usize,
    #[serde(default)]
    pub materials_file: Option<PathBuf>,
    #[serde(default)]
    pub isotopes_file: Option<PathBuf>,
    #[serde(default)]
    pub beams_file: Option<PathBuf>,
}

fn default_top() -> usize {
    10
}

/// One cavity layout to analyze and fit.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub isotope: String,
    pub mirror: String,
    pub d_top_nm: f64,
    pub d_cen_nm: f64,
    pub layer_nm: f64,
    #[serde(default)]
    pub materials_file: Option<PathBuf>,
    #[serde(default)]
    pub isotopes_file: Option<PathBuf>,
}

/// Load and validate a scenario file; also returns the SHA-256 of the raw
/// bytes for provenance headers in output files.
pub fn load_scenario(path: &Path) -> Result<(ScenarioConfig, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg: ScenarioConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok((cfg, hash))
}
