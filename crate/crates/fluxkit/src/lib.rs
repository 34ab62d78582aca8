//! Generalized-flux-qubit engineering toolkit.
//!
//! Solves the one-dimensional qubit Hamiltonian
//! `H = -4 E_C d^2/dphi^2 + E_J (-gamma N cos(phi/N) - cos(phi + phi_e))`
//! for arbitrary circuit parameters, the full N-dimensional circuit model at
//! desk scale, and derives the qubit figures of merit used in design work:
//! frequency, anharmonicity, charge dispersion, and noise sensitivities.
//! A sweep engine and a two-stage design optimizer search the
//! (I_c, C_sh, N, gamma/N) tradespace for property targets.

pub mod circuit;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod fullmodel;
pub mod noise;
pub mod spectral;
pub mod spectrum;

pub use circuit::{
    classify_regime, derive_energies, expansion_coefficients, CircuitDesign, EnergyScales, Regime,
    RegimeTag,
};
pub use constants::PhysicalConstants;
pub use error::{FluxError, Result};
