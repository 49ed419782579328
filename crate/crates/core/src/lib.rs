//! Quantum-state transfer through spin-chain channels under decoherence.
//!
//! Two environment models are covered:
//!
//! * a common spin bath coupled to the chain's total `σ^z`
//!   ([`environment`]), handled in closed form on top of the coherent
//!   transfer amplitude ([`transfer`]);
//! * independent per-site dephasing or damping ([`lindblad`]), integrated as
//!   a master equation on the zero-plus-single-excitation subspace.
//!
//! Everything is generic over the scalar ([`Real`]: `f32` or `f64`). The
//! `*64` aliases below fix it to `f64`, which is what the tolerances quoted in
//! the docs assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod environment;
pub mod error;
pub mod lindblad;
pub mod scalar;
pub mod transfer;

pub use chain::{
    build_full_hamiltonian, build_subspace_hamiltonian, mirror_couplings, ChainSpec, Family, FullHamiltonian,
    SubspaceHamiltonian,
};
pub use environment::{
    average_fidelity_common_env, decohered_target_density, distribute_entanglement, explicit_decoherence_factor,
    gaussian_decoherence_factor, wootters_concurrence, CommonEnvironment, EntanglementResult, ExplicitEnvironment,
    GaussianEnvironment, QubitDensity,
};
pub use error::{Error, Result};
pub use lindblad::{
    apply_generator, average_fidelity_bloch, integrate_master_equation, max_excitation_probability,
    reduce_to_target, state_fidelity, Channel, LindbladConfig, SubspaceDensity, Trajectory,
};
pub use scalar::Real;
pub use transfer::{
    average_fidelity_free, closed_form_mirror_amplitude, critical_chain_length, max_fidelity_search,
    transfer_amplitude, CriticalLengthResult, FidelityCurve, TimeWindow, TransferAmplitude,
};

pub type Complex64 = num_complex::Complex<f64>;

pub type ChainSpec64 = ChainSpec<f64>;
pub type SubspaceHamiltonian64 = SubspaceHamiltonian<f64>;
pub type FullHamiltonian64 = FullHamiltonian<f64>;
pub type TransferAmplitude64 = TransferAmplitude<f64>;
pub type TimeWindow64 = TimeWindow<f64>;
pub type FidelityCurve64 = FidelityCurve<f64>;
pub type CriticalLengthResult64 = CriticalLengthResult<f64>;
pub type GaussianEnvironment64 = GaussianEnvironment<f64>;
pub type ExplicitEnvironment64 = ExplicitEnvironment<f64>;
pub type QubitDensity64 = QubitDensity<f64>;
pub type EntanglementResult64 = EntanglementResult<f64>;
pub type LindbladConfig64 = LindbladConfig<f64>;
pub type SubspaceDensity64 = SubspaceDensity<f64>;
pub type Trajectory64 = Trajectory<f64>;
