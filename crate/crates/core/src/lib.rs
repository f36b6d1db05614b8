//! Intrinsic decoherence of a displaced harmonic oscillator.
//!
//! The crate evolves states of `H = ω a†a + λ(a + a†)` under the full Milburn
//! map `ρ̇ = γ(e^{-iH/γ} ρ e^{iH/γ} − ρ)` on a truncated Fock basis, and checks
//! the numerics against closed-form expectation values for coherent and
//! squeezed initial states.
//!
//! * [`fock`]: ladder operators, the Hamiltonian, displacement and squeeze
//!   operators, state preparation and Hermitian spectral decomposition.
//! * [`closed_form`]: analytic quadrature and photon-number tracks.
//! * [`evolution`]: the Poisson-weighted kernel series (two independent
//!   paths) and the second-order Lindblad integrator.
//! * [`harness`]: config-driven experiment runner, CSV/plot output and CLI.

pub mod closed_form;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod harness;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
