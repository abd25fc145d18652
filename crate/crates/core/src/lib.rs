//! A quantum-measurement semantics engine for observables with degenerate
//! spectra.
//!
//! The crate implements both textbook projection postulates as executable
//! channels — the Lüders transition onto a full eigenspace and the
//! von Neumann description through refinement measurements — and makes
//! their relationship testable:
//!
//! * [`hilbert`]: dense complex vectors, operators, tensor products,
//!   partial traces and projectors (dimensions up to 64).
//! * [`spectral`]: Hermitian eigendecomposition with explicit grouping of
//!   near-equal eigenvalues into degenerate eigenspaces.
//! * [`measurement`]: Born probabilities, Lüders selective/non-selective
//!   channels, refinement observables, von Neumann refined measurement and
//!   the Bayes-rule consistency identity.
//! * [`reconstruct`]: rebuilding the hidden post-measurement block
//!   operators from refinement statistics alone via polarization probes,
//!   either from an exact quadratic-form oracle or from finite sampled
//!   frequencies, and comparing against the Lüders prediction.
//! * [`protocols`]: quantum teleportation and a small one-way computation,
//!   runnable under either postulate with configurable refinement bases.
//!
//! All values are immutable after construction and every operation is a
//! pure function of its inputs.

pub mod error;
pub mod hilbert;
pub mod measurement;
pub mod protocols;
pub mod random;
pub mod reconstruct;
pub mod spectral;
pub mod tol;

pub use error::{Error, Result};
pub use hilbert::{
    apply, inner, max_abs, max_abs_diff, partial_trace, projector_onto, pure_to_density, tensor,
    tensor_states, trace_distance, CMatrix, CVector, DensityOperator, Projector, StateVector,
};
pub use measurement::{
    aligned_block_basis, bayes_check, born_probabilities, build_refinement,
    diagonalizing_block_bases, luders_nonselective, luders_selective, luders_selective_density,
    pp_nondegenerate, vn_refined_nonselective, vn_refined_nonselective_density,
    vn_refined_selective, vn_refined_selective_density, BayesCheck, GammaStrategy,
    MeasurementRecord, Postulate, RefinementObservable,
};
pub use protocols::{
    bell_observable, bell_state, bob_marginal_nonselective, linear_cluster_state,
    one_way_rotation, refinement_sweep, run_linear_cluster, teleport, teleport_all,
    teleport_with_refined_outcome, BasisLabel, ClusterRun, PostulateConfig, RefinementChoice,
    SweepRow, TeleportationRun,
};
pub use reconstruct::{
    assemble_nonselective, block_support_check, reconstruct_block, verify_theorem, ExactOracle,
    OracleMode, QuadraticFormOracle, ReconstructionMode, ReconstructionReport, SampledOracle,
};
pub use spectral::{function_of, make_observable, spectral_decompose, Observable};
pub use tol::Tolerances;
