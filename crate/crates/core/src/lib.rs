//! Pulsed optomechanical readout beyond the resolved-sideband regime.
//!
//! The library simulates how a short, strong optical pulse imprints mechanical
//! quadrature statistics onto its momentum quadrature, reconstructs
//! s-parameterized quasiprobability distributions (Wigner, Q, and everything in
//! between) of the mechanical mode from sets of tomograms, and certifies
//! P-function nonclassicality from a single tomogram via demarginalization
//! witnesses.
//!
//! Conventions used throughout: quadratures are `x̂(φ) = (a e^{-iφ} + a† e^{iφ})/√2`
//! with ħ = 1; phase-space points `α = (q + ip)/√2`; distributions `W(q,p;s)`
//! are normalized to unit integral over `dq dp`.

pub mod error;
pub mod feasibility;
pub mod fft;
pub mod grid;
pub mod hermite;
pub mod phase_space;
pub mod protocol;
pub mod state;
pub mod tomography;
pub mod transform;
pub mod witness;

pub mod config;
pub mod io;
pub mod run;

pub use error::{Error, Result};
pub use grid::PhaseSpaceGrid;
pub use phase_space::{QuasiDistribution, Tomogram};
pub use state::DensityOperator;
pub use transform::{ProtocolParams, SymplecticTransform};
