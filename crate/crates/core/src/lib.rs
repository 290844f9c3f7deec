//! Simulation and analysis toolkit for collective excitation of Mössbauer
//! nuclei embedded in thin-film x-ray cavities.
//!
//! The crate covers the full pipeline:
//!
//! * [`params`] / [`operators`] / [`dicke`] — a driven, superradiantly damped
//!   Dicke ensemble on the (N+1)-dimensional symmetric ladder, evolved with an
//!   adaptive Runge–Kutta integrator.
//! * [`spectrum`] — coherently scattered output spectra via input–output
//!   relations, the closed-form linear-response line shape, and a quantitative
//!   spectral-asymmetry metric that classifies inversion-induced symmetry
//!   flips.
//! * [`toy`] — closed-form single-nucleus interference spectra.
//! * [`pulse`] — Fourier-limited Gaussian drives and stochastic SASE pulses
//!   built with the partial-coherence method.
//! * [`reflectivity`] / [`cavityfit`] — recursive grazing-incidence
//!   reflectivity of layered cavities and least-squares extraction of the
//!   quantum-optical cavity parameters.
//! * [`budget`] — photon-budget estimates for full population inversion and
//!   grid-search cavity optimization.
//! * [`config`] / [`commands`] / [`output`] — structured scenario
//!   configuration, CLI entry points and columnar file emission.

pub mod budget;
pub mod cavityfit;
pub mod commands;
pub mod config;
pub mod data;
pub mod dicke;
pub mod error;
pub mod fourier;
pub mod integrate;
pub mod lm;
pub mod operators;
pub mod output;
pub mod params;
pub mod pulse;
pub mod reflectivity;
pub mod spectrum;
pub mod toy;

pub use error::{Error, Result};
pub use params::SystemParams;
