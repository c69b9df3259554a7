//! Driven-dephasing Rydberg atom chains: dense operators, Lindblad dynamics,
//! Liouvillian spectra and the fragmentation of the constrained (PXP) model.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! the file system, the environment or threads lives in the `rydfrag`
//! companion crate.
//!
//! Conventions used throughout:
//!
//! * basis states are bitstrings `s_1 … s_L` indexed with site 1 as the most
//!   significant bit, so `|000011⟩` has index 3;
//! * `Q_j = |1⟩⟨1|` on site `j`, `P_j = 1 − Q_j`;
//! * energies and rates are in units of the Rabi frequency when `omega = 1`;
//! * density matrices are stored row-major, vectorization is column-stacking
//!   (`vec(ρ)[a + D·b] = ρ[a, b]`).

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod counting;
mod error;
pub mod fragmentation;
pub mod lindblad;
pub mod meanfield;
pub mod operators;
pub mod spectrum;

pub use basis::{BasisState, ChainParams};
pub use error::{Error, Result};
pub use fragmentation::EquivalenceClass;
pub use lindblad::{DensityMatrix, IntegratorConfig, LindbladGenerator, LiouvillianMatrix, TimeSeries};
pub use operators::{MemoryBudget, OperatorMatrix};
pub use spectrum::SpectrumResult;

/// Complex scalar used by every matrix in the crate.
pub type C64 = num_complex::Complex64;
