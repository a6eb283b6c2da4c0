//! Phase-space (Weyl-Wigner) flow numerics for separable Hamiltonians
//! `H(x, k) = K(k) + V(x)`.
//!
//! The crate evaluates quantum Wigner currents and their divergence both as
//! truncated ħ-series and as resummed Hermite closed forms, builds the
//! cosh/cos Hamiltonian family whose squeezed gaussian ensemble has a
//! stationary quantum flow, and checks the zero-mode relation with a
//! pseudospectral operator on sampled wavefunctions.
//!
//! All quantities are in dimensionless units (`ħ = 1`); [`UnitsMap`] converts
//! from physical coordinates at the boundary.

pub mod camouflage;
pub mod ensemble;
pub mod error;
pub mod flow;
pub mod grid;
pub mod hamiltonian;
pub mod special;
pub mod spectral;

pub use camouflage::{CamouflageParams, LambdaOverride, StationarityCertificate};
pub use ensemble::{GaussianEnsemble, Marginal, PhysicalGaussian};
pub use error::{Error, Result};
pub use flow::{FlowDiagnostics, TruncationPolicy};
pub use grid::{Axis, PhaseSpaceGrid, ScalarField, VectorField};
pub use hamiltonian::{SeparableHamiltonian, Term, UnitsMap};
pub use special::HermiteEvaluator;
pub use spectral::{SpectralOptions, Wavefunction, WignerTransform, ZeroModeReport};
