//! Stroboscopic dynamics of a periodically driven ring of Rydberg two-level
//! atoms.
//!
//! The drive alternates two Hamiltonians: a stage with Rabi coupling (plus,
//! depending on the variant, detuning and nearest-neighbour interaction) and
//! a dark stage that is diagonal in the occupation basis. One period of that
//! protocol compiles to a cycle propagator which is then applied
//! stroboscopically; the chief observable is the population imbalance
//! P(n) = ⟨ψ(nT)| (N_g − N_r)/L |ψ(nT)⟩ together with its subharmonic
//! order parameter Q(n) and the critical cycle count n_c at which the
//! period-doubled response first breaks down.
//!
//! Modules:
//! - [`params`]: drive variants, model parameters, validation, unit helpers.
//! - [`basis`]: occupation-number basis conventions and bond bookkeeping.
//! - [`hamiltonian`]: stage Hamiltonians, dense or diagonal.
//! - [`floquet`]: cycle compilation and pure-state stroboscopic evolution.
//! - [`observables`]: P, Q, n_c, Fourier spectra, beating periods.
//! - [`oracle`]: closed-form few-atom imbalance formulas used as
//!   cross-checks against the numerical engine.
//! - [`lindblad`]: density-matrix evolution with spontaneous decay, and
//!   envelope decay-rate fits.
//! - [`sweep`]: parallel parameter scans, scaling fits, phase diagrams,
//!   symmetry audits.

// Linked for their BLAS/LAPACK symbols.
use blas_src as _;
use openblas_src as _;

pub mod basis;
pub mod error;
pub mod floquet;
pub mod hamiltonian;
pub mod linalg;
pub mod lindblad;
pub mod observables;
pub mod oracle;
pub mod params;
pub mod sweep;

pub use error::{CoreError, Result};
pub use floquet::{compile_cycle, evolve, evolve_with_budget, EvolveMode, FloquetPropagator};
pub use observables::{
    fourier_spectrum, order_parameter, population_imbalance, Spectrum, Trajectory,
};
pub use params::{Boundary, DriveVariant, ModelParams, Stage};
