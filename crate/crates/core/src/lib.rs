//! Two probe spins dephasing-coupled to a periodic XY chain.
//!
//! The probes `a` and `b` couple to every chain site through `σ_a^z σ_l^z` and
//! `σ_b^z σ_l^z`. Because the coupling commutes with the probes' own Hamiltonian,
//! each probe basis state `|ij⟩` selects an effective chain Hamiltonian whose
//! transverse field is shifted by `±2g ± 2h`. The reduced probe state is then
//! the initial state multiplied entrywise by a decoherence tensor built from
//! the free-fermion spectra of those four effective chains.
//!
//! Module map:
//!
//! * [`spectrum`]: effective fields, dispersion, Bogoliubov angles.
//! * [`decoherence`]: the decoherence tensor, probe density matrices, ground-state overlaps.
//! * [`entanglement`]: Wootters concurrence.
//! * [`oracle`]: brute-force per-pair evolution used to validate the closed form.
//! * [`sweep`]: parameter grids, critical-feature detection.
//! * [`cli`]: configuration parsing and the `xyprobe` subcommands.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decoherence;
pub mod entanglement;
pub mod linalg;
pub mod oracle;
pub mod spectrum;
pub mod sweep;

mod error;

pub use decoherence::{
    gamma_factor, gamma_tensor, ground_state_overlap, BranchSpectra, DecoherenceTensor, DensityMatrix4,
};
pub use entanglement::{concurrence, ConcurrenceResult};
pub use error::{Error, Result};
pub use spectrum::{BranchIndex, ChainParams, CouplingParams, ModeTable};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
