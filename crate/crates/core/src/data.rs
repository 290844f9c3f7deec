//! Bundled material, isotope and beam data tables (editable TOML).

use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Relative energy tolerance for material lookups; optical constants are
/// only valid near the energy they were tabulated at.
const ENERGY_TOL: f64 = 0.02;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    pub name: String,
    pub energy_kev: f64,
    pub delta: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialTable {
    pub schema: u32,
    #[serde(rename = "material")]
    pub materials: Vec<MaterialEntry>,
}

impl MaterialTable {
    pub fn lookup(&self, name: &str, energy_kev: f64) -> Result<&MaterialEntry> {
        self.materials
            .iter()
            .find(|m| {
                m.name == name
                    && (m.energy_kev - energy_kev).abs() <= ENERGY_TOL * energy_kev
            })
            .ok_or_else(|| {
                Error::MissingData(format!(
                    "no optical constants for {name} at {energy_kev} keV"
                ))
            })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopeEntry {
    pub name: String,
    /// Element symbol of the resonant layer material.
    pub symbol: String,
    pub energy_kev: f64,
    /// Mean life 1/γ.
    pub lifetime_ns: f64,
    /// Internal conversion coefficients reported in the literature.
    pub alpha: Vec<f64>,
    /// The coefficient `sigma0_nm2` was evaluated at.
    pub alpha_ref: f64,
    pub number_density_nm3: f64,
    /// Electronic 1/e absorption length at the transition energy (μm).
    pub absorption_length_um: f64,
    /// On-resonance nuclear cross section at `alpha_ref` (nm²).
    pub sigma0_nm2: f64,
    /// Recoilless fraction.
    pub f_lm: f64,
}

impl IsotopeEntry {
    /// Decay rate γ = 1/lifetime in rad/s.
    pub fn gamma(&self) -> f64 {
        1.0 / (self.lifetime_ns * 1e-9)
    }

    /// Transition angular frequency ω₀ in rad/s.
    pub fn omega0(&self) -> f64 {
        self.energy_kev * 1e3 / crate::params::HBAR_EV_S
    }

    /// Vacuum wavenumber at ω₀ in nm⁻¹.
    pub fn wavenumber(&self) -> f64 {
        self.energy_kev / crate::reflectivity::HBARC_KEV_NM
    }

    /// Cross section rescaled to a different conversion coefficient:
    /// σ(α) = σ₀·(1 + α_ref)/(1 + α).
    pub fn sigma_at_alpha(&self, alpha: f64) -> f64 {
        self.sigma0_nm2 * (1.0 + self.alpha_ref) / (1.0 + alpha)
    }

    /// Resonant refractive-index strength C = n σ f_LM/(2k) of the nuclear
    /// line (see `reflectivity::resonant_index_shift`).
    pub fn resonant_strength(&self, alpha: f64) -> f64 {
        self.number_density_nm3 * self.sigma_at_alpha(alpha) * self.f_lm
            / (2.0 * self.wavenumber())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopeTable {
    pub schema: u32,
    #[serde(rename = "isotope")]
    pub isotopes: Vec<IsotopeEntry>,
}

impl IsotopeTable {
    pub fn lookup(&self, name: &str) -> Result<&IsotopeEntry> {
        self.isotopes
            .iter()
            .find(|i| i.name == name)
            .ok_or_else(|| Error::MissingData(format!("unknown isotope {name}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamEntry {
    pub isotope: String,
    /// Conserved d_B·θ_B product in nm·mrad.
    pub phase_space_nm_mrad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamTable {
    pub schema: u32,
    #[serde(rename = "beam")]
    pub beams: Vec<BeamEntry>,
}

impl BeamTable {
    pub fn lookup(&self, isotope: &str) -> Result<&BeamEntry> {
        self.beams
            .iter()
            .find(|b| b.isotope == isotope)
            .ok_or_else(|| Error::MissingData(format!("no beam data for {isotope}")))
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(format!("{what}: {e}")))
}

pub fn bundled_materials() -> &'static MaterialTable {
    static TABLE: OnceLock<MaterialTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        parse(include_str!("../data/materials.toml"), "bundled materials.toml")
            .expect("bundled material table is valid")
    })
}

pub fn bundled_isotopes() -> &'static IsotopeTable {
    static TABLE: OnceLock<IsotopeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        parse(include_str!("../data/isotopes.toml"), "bundled isotopes.toml")
            .expect("bundled isotope table is valid")
    })
}

pub fn bundled_beams() -> &'static BeamTable {
    static TABLE: OnceLock<BeamTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        parse(include_str!("../data/beams.toml"), "bundled beams.toml")
            .expect("bundled beam table is valid")
    })
}

pub fn load_materials(path: &Path) -> Result<MaterialTable> {
    parse(&std::fs::read_to_string(path)?, &path.display().to_string())
}

pub fn load_isotopes(path: &Path) -> Result<IsotopeTable> {
    parse(&std::fs::read_to_string(path)?, &path.display().to_string())
}

pub fn load_beams(path: &Path) -> Result<BeamTable> {
    parse(&std::fs::read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bundled_tables_parse_and_cover_all_isotopes() {
        let isotopes = bundled_isotopes();
        let materials = bundled_materials();
        let beams = bundled_beams();
        assert_eq!(isotopes.isotopes.len(), 5);
        for iso in &isotopes.isotopes {
            // every isotope needs its own layer material plus both mirror
            // candidates and the carbon guide at its energy
            for name in [iso.symbol.as_str(), "Pt", "Pd", "C"] {
                materials.lookup(name, iso.energy_kev).unwrap();
            }
            beams.lookup(&iso.name).unwrap();
            assert!(iso.gamma() > 0.0 && iso.omega0() > 0.0);
            assert!(iso.alpha.contains(&iso.alpha_ref));
        }
    }

    #[test]
    fn fe57_resonant_strength_magnitude() {
        let fe = bundled_isotopes().lookup("fe57").unwrap();
        // n σ0 f/(2k) with n = 83 nm^-3, σ0 = 2.56e-4 nm², f = 0.8, k = 73 nm^-1
        let c = fe.resonant_strength(fe.alpha_ref);
        assert_relative_eq!(c, 1.16e-4, max_relative = 0.02);
        // gamma of the 141 ns state
        assert_relative_eq!(fe.gamma(), 7.09e6, max_relative = 0.01);
    }

    #[test]
    fn alpha_rescaling_ratio() {
        let pt = bundled_isotopes().lookup("pt193").unwrap();
        let r = pt.sigma_at_alpha(3.5) / pt.sigma_at_alpha(2200.0);
        assert_relative_eq!(r, 2201.0 / 4.5, max_relative = 1e-12);
    }

    #[test]
    fn unknown_entries_are_missing_data() {
        assert!(matches!(
            bundled_isotopes().lookup("u238"),
            Err(Error::MissingData(_))
        ));
        assert!(matches!(
            bundled_materials().lookup("Pt", 5.0),
            Err(Error::MissingData(_))
        ));
    }
}
