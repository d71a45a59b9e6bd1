//! Synchronization of all-to-all coupled two-level ensembles with incoherent
//! gain and damping.
//!
//! The crate is organised around the representative-site Bloch vector of an
//! ensemble:
//!
//! - [`bloch`]: state and parameter types.
//! - [`dynamics`]: right-hand sides of the bare, interaction, mean-field and
//!   two-group flows.
//! - [`integrate`]: adaptive Dormand–Prince and fixed-step RK4 drivers with
//!   uniform sampling.
//! - [`stability`]: fixed point, Jacobian spectrum, critical coupling and the
//!   closed-form limit cycle.
//! - [`spectral`]: order parameter, spectra of `<σ⁺>(t)` and dominant lines.
//! - [`two_group`]: detuned pairs of ensembles, Arnold tongues and
//!   phase-tuning scans.
//! - [`oracle`]: exact finite-N Lindblad evolution used as ground truth.
//!
//! Rates and frequencies are plain `f64` in whatever unit the caller picks;
//! the helpers on [`EnsembleParams`] accept the customary ratio
//! parametrization (`V/(γ₊+γ₋)`, `γ₊/γ₋`).

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod oracle;
pub mod spectral;
pub mod stability;
pub mod two_group;

pub use bloch::{BlochVector, CrossPhase, EnsembleParams, TwoGroupParams};
pub use error::{Error, Result};
pub use integrate::{IntegratorControls, Method, Trajectory};
