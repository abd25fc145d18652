//! Central numerical tolerances.
//!
//! Every validation threshold used by the crate lives here, so a test or a
//! caller can tighten or relax all checks through one record instead of
//! chasing magic numbers through the modules.

/// Unit-norm and unit-trace deviation bound.
///
/// Double-precision spectral algorithms on dimensions up to 64 keep norms
/// and traces correct to ~1e-14; 1e-10 leaves four digits of headroom.
pub const TOL_NORM: f64 = 1e-10;

/// Hermiticity / idempotency deviation bound (max-abs entry metric).
pub const TOL_HERM: f64 = 1e-10;

/// Positive-semidefiniteness slack: smallest eigenvalue must be ≥ −TOL_PSD.
///
/// Eigenvalues of a numerically Hermitian PSD matrix can dip a little
/// further below zero than entrywise checks suggest, hence the looser bound.
pub const TOL_PSD: f64 = 1e-9;

/// Default gap threshold for merging near-equal eigenvalues into one
/// degenerate eigenspace. Numerically computed eigenvalues of a truly
/// degenerate matrix scatter at ~1e-14; 1e-8 leaves margin without merging
/// distinct physical levels at desk scale.
pub const TOL_EIG: f64 = 1e-8;

/// Outcome probabilities at or below this threshold are treated as
/// impossible: normalizing a post-measurement state by a near-zero
/// probability amplifies noise unboundedly.
pub const TOL_PROB: f64 = 1e-12;

/// Spectral reconstruction bound: ‖Σ αᵢ Pᵢ − M‖_max for a decomposition of M.
pub const TOL_RECON: f64 = 1e-9;

/// The central tolerance record. `Tolerances::default()` reproduces the
/// crate-wide constants above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unit-norm / unit-trace deviation bound.
    pub norm: f64,
    /// Hermiticity and idempotency bound.
    pub herm: f64,
    /// PSD slack on the smallest eigenvalue.
    pub psd: f64,
    /// Eigenvalue-grouping gap threshold.
    pub eig: f64,
    /// Smallest selectable outcome probability.
    pub prob: f64,
    /// Spectral reconstruction bound.
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: TOL_NORM,
            herm: TOL_HERM,
            psd: TOL_PSD,
            eig: TOL_EIG,
            prob: TOL_PROB,
            recon: TOL_RECON,
        }
    }
}
