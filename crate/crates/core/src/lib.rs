//! Species entanglement of the one-dimensional transverse-field Ising chain.
//!
//! The chain `H = -J Σ σˣᵢσˣᵢ₊₁ - h Σ σᶻᵢ` maps onto a gas of up-spin and
//! down-spin particles at half filling with exclusion. The entanglement
//! between the two species is computed
//!
//! * at finite size, as a sum of binary entropies of the per-mode amplitudes
//!   ([`entanglement::epsilon_finite`]),
//! * in the thermodynamic limit, from the integrated eigenvalue density
//!   ([`entanglement::epsilon_infinite`]),
//! * near the critical points `|J/h| = 1`, through finite differences and the
//!   closed-form jump of the first derivative ([`criticality`]),
//!
//! and checked against brute-force exact diagonalization ([`ed`]).
//! The [`sweep`] module backs the `species-ent` command-line tool.

pub mod criticality;
pub mod ed;
pub mod entanglement;
mod error;
pub mod modes;
pub mod quadrature;
pub mod sweep;

pub use entanglement::{EntanglementPoint, Size};
pub use error::{Error, Result};
pub use modes::{Coupling, Mode, ModeSpectrum, MomentumGrid, Parity};
