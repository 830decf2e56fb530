//! Desk-scale simulation of quantum-state transfer through XX spin-½
//! channels with long-range-correlated on-site disorder.
//!
//! The pipeline, module by module:
//!
//! - [`disorder`]: power-law-spectrum field sequences (S(k) ∝ 1/k^α),
//!   normalized to zero mean and unit variance
//! - [`hamiltonian`]: single-excitation tridiagonal matrices for the channel
//!   and for the full chain with weakly coupled sender/receiver spins
//! - [`spectral`]: implicit-shift QL eigensolver and participation ratios
//! - [`effective`]: second-order reduction to the sender/receiver two-level
//!   system (h_s, h_r, J', Δ)
//! - [`dynamics`]: exact spectral time evolution, averaged transfer
//!   fidelity, and the F_max search over the protocol window
//! - [`ensemble`]: reproducible Monte Carlo sweeps over (α, g) grids with
//!   CSV/JSON persistence

pub mod disorder;
pub mod dynamics;
pub mod effective;
pub mod ensemble;
pub mod error;
pub mod hamiltonian;
pub mod spectral;

pub use disorder::{DisorderParams, DisorderSequence, PhaseVector};
pub use dynamics::{FidelityResult, OccupancyTrace, TransitionAmplitude};
pub use effective::EffectiveTwoSite;
pub use ensemble::{EnsembleSummary, GroupSummary, SampleRecord, SweepConfig};
pub use error::{Error, Result};
pub use hamiltonian::{ChainSpec, TriMatrix};
pub use spectral::{EigenSystem, ParticipationProfile};
