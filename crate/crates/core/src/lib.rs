//! Exact unitary simulation of a two-branch tight-binding interference
//! device threaded by a magnetic flux, with optional two-state witness
//! systems field-coupled to the branch sites.
//!
//! The crate is organized around the pipeline
//! geometry -> Hamiltonian -> composite system -> propagator -> observables,
//! with [`experiment`] orchestrating full parameter sweeps and [`io`]
//! handling configs, CSV tables and run manifests.

pub mod composite;
pub mod device;
pub mod error;
pub mod evolve;
pub mod experiment;
pub mod io;
pub mod observables;
pub mod validate;

pub use composite::{standard_witness_layout, CompositeBasis, TotalHamiltonian, WitnessSpec};
pub use device::{BranchLabel, DeviceGeometry, DeviceHamiltonian, SiteIndex, N_SITES, OUTPUT_SITE};
pub use error::{Error, Result};
pub use evolve::{
    gaussian_packet, LayeredPropagator, Propagator, SpectralPropagator, StateVector,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Natural time unit of the packet motion in working units (hbar = gamma = 1):
/// tau = pi * hbar / (2 gamma), the half-period of a two-site hopping dimer.
/// With the default packet (k a = pi/2, group velocity 2 gamma a / hbar) the
/// peak advances by pi * a per tau and reaches the output site at T_f.
pub const TAU: f64 = std::f64::consts::FRAC_PI_2;

/// End time of the interference experiment, in units of tau.
pub const T_FINAL_OVER_TAU: f64 = 5.27;
