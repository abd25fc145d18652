//! Projection postulates as executable channels.
//!
//! Two transition rules are implemented for measuring an observable
//! A = Σᵢ αᵢ Pᵢ on a state:
//!
//! * **Lüders**: selection of αᵢ maps a pure ψ to Pᵢψ/‖Pᵢψ‖, a pure state
//!   even when the eigenspace is degenerate; without selection the state
//!   becomes Σᵢ Pᵢ ρ Pᵢ.
//! * **von Neumann refined**: the measurement is realized through a
//!   nondegenerate refinement observable D = Σᵢₙ γᵢₙ P_{eᵢₙ} with A = f(D),
//!   and the post-measurement state is the refined mixture
//!   Σₙ |⟨ψ, eᵢₙ⟩|² P_{eᵢₙ} (normalized under selection).
//!
//! Probabilities are identical under both rules; the post-measurement
//! states differ unless the refinement basis is aligned with the projected
//! state.
//!
//! Mixed-state variants (`*_density`) use the Pᵢ ρ Pᵢ / ⟨eᵢₙ|ρ|eᵢₙ⟩ forms;
//! the pure-state functions are the special case ρ = ψψ†.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    columns_to_projector, inner, max_abs, max_abs_diff, pure_to_density, CMatrix, DensityOperator,
    StateVector,
};
use crate::spectral::{complete_basis, observable_from_columns, Observable};
use crate::tol::Tolerances;

/// Which transition rule produced a measurement record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Postulate {
    Luders,
    VonNeumannRefined,
    PpNondegenerate,
}

/// Outcome value, probability, post-measurement state and provenance of a
/// single selective measurement.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: f64,
    pub probability: f64,
    pub post_state: DensityOperator,
    pub postulate: Postulate,
    /// Index of the selected outcome, when a selection was made.
    pub selection: Option<usize>,
}

/// How refined eigenvalues γᵢₙ are assigned.
///
/// Only distinctness matters physically; the default makes runs
/// reproducible and keeps the coarse-graining function trivial
/// (f = floor recovers the parent index).
#[derive(Debug, Clone)]
pub enum GammaStrategy {
    /// γᵢₙ = i + n/(2·max_rank + 2).
    IndexFraction,
    /// Caller-provided values, one list per parent block.
    Explicit(Vec<Vec<f64>>),
}

impl Default for GammaStrategy {
    fn default() -> Self {
        Self::IndexFraction
    }
}

/// A nondegenerate observable D refining a parent observable A: for each
/// parent eigenspace Hᵢ an orthonormal eigenbasis {eᵢₙ} with distinct
/// eigenvalues γᵢₙ, and the coarse-graining map (i, n) ↦ αᵢ.
#[derive(Debug, Clone)]
pub struct RefinementObservable {
    parent: Observable,
    bases: Vec<CMatrix>,
    gammas: Vec<Vec<f64>>,
}

impl RefinementObservable {
    pub fn parent(&self) -> &Observable {
        &self.parent
    }

    pub fn dim(&self) -> usize {
        self.parent.dim()
    }

    /// Eigenbasis of the parent eigenspace Hᵢ chosen by this refinement.
    pub fn basis(&self, i: usize) -> &CMatrix {
        &self.bases[i]
    }

    pub fn gamma(&self, i: usize, n: usize) -> f64 {
        self.gammas[i][n]
    }

    pub fn refined_vector(&self, i: usize, n: usize) -> StateVector {
        StateVector::normalized(self.bases[i].column(n).into_owned())
            .expect("refinement basis columns are unit vectors")
    }

    /// Dense matrix D = Σᵢ Σₙ γᵢₙ P_{eᵢₙ}.
    pub fn operator(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (basis, gammas) in self.bases.iter().zip(&self.gammas) {
            for (col, &g) in basis.column_iter().zip(gammas) {
                m += (col * col.adjoint()) * Complex64::new(g, 0.0);
            }
        }
        m
    }

    /// D as a nondegenerate [`Observable`] (eigenvalues γ ascending).
    pub fn as_observable(&self) -> Result<Observable> {
        let mut values = Vec::new();
        let mut bases = Vec::new();
        for (basis, gammas) in self.bases.iter().zip(&self.gammas) {
            for (col, &g) in basis.column_iter().zip(gammas) {
                values.push(g);
                bases.push(CMatrix::from_columns(&[col.into_owned()]));
            }
        }
        observable_from_columns(&values, bases, &Tolerances::default())
    }

    /// Parent eigenvalue αᵢ recovered from block index i.
    pub fn coarse_value(&self, i: usize) -> f64 {
        self.parent.eigenvalue(i)
    }

    /// The coarse-graining function f with f(γᵢₙ) = αᵢ, as a lookup over
    /// the stored refined eigenvalues.
    pub fn coarse_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |gamma: f64| {
            let mut best = (f64::INFINITY, 0.0);
            for (i, gammas) in self.gammas.iter().enumerate() {
                for &g in gammas {
                    let d = (g - gamma).abs();
                    if d < best.0 {
                        best = (d, self.parent.eigenvalue(i));
                    }
                }
            }
            best.1
        }
    }

    /// Check the refinement invariants: gammas pairwise distinct, each
    /// basis spans its parent eigenspace, and [A, D] = 0.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let mut all: Vec<f64> = self.gammas.iter().flatten().copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite gammas"));
        for w in all.windows(2) {
            if w[1] - w[0] <= 0.0 {
                return Err(Error::DuplicateEigenvalue { value: w[1] });
            }
        }
        for (i, basis) in self.bases.iter().enumerate() {
            let p = columns_to_projector(basis, tol)?;
            let dev = max_abs_diff(p.matrix(), self.parent.projector(i).matrix());
            if dev > tol.herm {
                return Err(Error::SpanMismatch { block: i, max_dev: dev });
            }
        }
        let a = self.parent.matrix();
        let d = self.operator();
        let comm = max_abs(&(&a * &d - &d * &a));
        if comm > tol.herm {
            return Err(Error::NotHermitian { max_dev: comm });
        }
        Ok(())
    }
}

/// Construct a refinement of `obs`, optionally with caller-chosen
/// eigenbases per eigenspace (defaults to the observable's own bases).
pub fn build_refinement(
    obs: &Observable,
    bases: Option<Vec<CMatrix>>,
    strategy: GammaStrategy,
) -> Result<RefinementObservable> {
    build_refinement_with_tol(obs, bases, strategy, &Tolerances::default())
}

pub fn build_refinement_with_tol(
    obs: &Observable,
    bases: Option<Vec<CMatrix>>,
    strategy: GammaStrategy,
    tol: &Tolerances,
) -> Result<RefinementObservable> {
    let bases = match bases {
        None => obs.blocks().iter().map(|b| b.basis.clone()).collect::<Vec<_>>(),
        Some(bases) => {
            if bases.len() != obs.outcome_count() {
                return Err(Error::DimMismatch {
                    left: bases.len(),
                    right: obs.outcome_count(),
                });
            }
            for (i, basis) in bases.iter().enumerate() {
                if basis.nrows() != obs.dim() || basis.ncols() != obs.rank(i) {
                    return Err(Error::SpanMismatch { block: i, max_dev: f64::INFINITY });
                }
                let p = columns_to_projector(basis, tol)?;
                let dev = max_abs_diff(p.matrix(), obs.projector(i).matrix());
                if dev > tol.herm {
                    return Err(Error::SpanMismatch { block: i, max_dev: dev });
                }
            }
            bases
        }
    };

    let gammas = match strategy {
        GammaStrategy::IndexFraction => {
            let max_rank = (0..obs.outcome_count()).map(|i| obs.rank(i)).max().unwrap_or(1);
            let denom = (2 * max_rank + 2) as f64;
            (0..obs.outcome_count())
                .map(|i| (0..obs.rank(i)).map(|n| i as f64 + n as f64 / denom).collect())
                .collect()
        }
        GammaStrategy::Explicit(gammas) => {
            if gammas.len() != obs.outcome_count()
                || gammas.iter().zip(0..).any(|(g, i)| g.len() != obs.rank(i))
            {
                return Err(Error::InvalidArgument(
                    "explicit gammas must match the eigenspace ranks".into(),
                ));
            }
            let mut all: Vec<f64> = gammas.iter().flatten().copied().collect();
            all.sort_by(|a, b| a.partial_cmp(b).expect("finite gammas"));
            for w in all.windows(2) {
                if w[1] - w[0] <= 0.0 {
                    return Err(Error::DuplicateEigenvalue { value: w[1] });
                }
            }
            gammas
        }
    };

    Ok(RefinementObservable { parent: obs.clone(), bases, gammas })
}

/// Refinement basis for block i whose first vector is Pᵢψ/‖Pᵢψ‖, completed
/// deterministically from the block's stored basis.
///
/// With this choice the refined selective channel reproduces the Lüders
/// post-state exactly.
pub fn aligned_block_basis(obs: &Observable, i: usize, psi: &StateVector) -> Result<CMatrix> {
    let tol = Tolerances::default();
    let projected = obs.projector(i).project(psi)?;
    let p = projected.norm_squared();
    if p <= tol.prob {
        return Err(Error::ZeroProbabilityOutcome { index: i, probability: p });
    }
    let first = CMatrix::from_columns(&[projected / Complex64::new(p.sqrt(), 0.0)]);
    complete_basis(&first, obs.basis(i), obs.rank(i))
}

/// Per-block bases diagonalizing the compressions Pᵢ ρ Pᵢ (eigenvectors
/// ordered by descending weight). For a pure ρ = ψψ† the first vector of
/// each admissible block is Pᵢψ/‖Pᵢψ‖, so this generalizes
/// [`aligned_block_basis`] to mixed states.
pub fn diagonalizing_block_bases(obs: &Observable, rho: &DensityOperator) -> Result<Vec<CMatrix>> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: obs.dim() });
    }
    let mut out = Vec::with_capacity(obs.outcome_count());
    for i in 0..obs.outcome_count() {
        let b = obs.basis(i);
        let compressed = b.adjoint() * rho.matrix() * b;
        let eig = compressed.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&x, &y| {
            eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).expect("finite eigenvalues")
        });
        let cols: Vec<_> = order
            .iter()
            .map(|&k| b * eig.eigenvectors.column(k).into_owned())
            .collect();
        out.push(crate::spectral::orthonormalize(&CMatrix::from_columns(&cols))?);
    }
    Ok(out)
}

/// Born probabilities (αᵢ, pᵢ) with pᵢ = Tr(ρ Pᵢ).
pub fn born_probabilities(obs: &Observable, rho: &DensityOperator) -> Result<Vec<(f64, f64)>> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: obs.dim() });
    }
    Ok((0..obs.outcome_count())
        .map(|i| {
            let p = (rho.matrix() * obs.projector(i).matrix()).trace().re;
            (obs.eigenvalue(i), p)
        })
        .collect())
}

/// Lüders selective transition for a pure state: outcome αᵢ with
/// probability ‖Pᵢψ‖² and post-state Pᵢψ/‖Pᵢψ‖ (always pure).
pub fn luders_selective(obs: &Observable, psi: &StateVector, i: usize) -> Result<MeasurementRecord> {
    let tol = Tolerances::default();
    let projected = obs.projector(i).project(psi)?;
    let probability = projected.norm_squared();
    if probability <= tol.prob {
        return Err(Error::ZeroProbabilityOutcome { index: i, probability });
    }
    let normalized = StateVector::normalized(projected)?;
    Ok(MeasurementRecord {
        outcome: obs.eigenvalue(i),
        probability,
        post_state: pure_to_density(&normalized),
        postulate: Postulate::Luders,
        selection: Some(i),
    })
}

/// Lüders selective transition for a mixed state: Pᵢ ρ Pᵢ / Tr(ρ Pᵢ).
pub fn luders_selective_density(
    obs: &Observable,
    rho: &DensityOperator,
    i: usize,
) -> Result<MeasurementRecord> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: obs.dim() });
    }
    let tol = Tolerances::default();
    let p_mat = obs.projector(i).matrix();
    let compressed = p_mat * rho.matrix() * p_mat;
    let probability = compressed.trace().re;
    if probability <= tol.prob {
        return Err(Error::ZeroProbabilityOutcome { index: i, probability });
    }
    let post = DensityOperator::new(compressed / Complex64::new(probability, 0.0))?;
    Ok(MeasurementRecord {
        outcome: obs.eigenvalue(i),
        probability,
        post_state: post,
        postulate: Postulate::Luders,
        selection: Some(i),
    })
}

/// Lüders channel without selection: Σᵢ Pᵢ ρ Pᵢ.
pub fn luders_nonselective(obs: &Observable, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: obs.dim() });
    }
    let mut out = CMatrix::zeros(obs.dim(), obs.dim());
    for i in 0..obs.outcome_count() {
        let p = obs.projector(i).matrix();
        out += p * rho.matrix() * p;
    }
    DensityOperator::new(out)
}

/// The nondegenerate projection postulate: one record per eigenvector eₖ
/// with probability |⟨ψ, eₖ⟩|² and post-state eₖeₖ†.
///
/// Rejects observables with any eigenspace of rank above one; for those,
/// the two postulates genuinely differ and the caller must pick a channel.
pub fn pp_nondegenerate(obs: &Observable, psi: &StateVector) -> Result<Vec<MeasurementRecord>> {
    if psi.dim() != obs.dim() {
        return Err(Error::DimMismatch { left: psi.dim(), right: obs.dim() });
    }
    for i in 0..obs.outcome_count() {
        let rank = obs.rank(i);
        if rank > 1 {
            return Err(Error::DegenerateSpectrum { index: i, rank });
        }
    }
    Ok((0..obs.outcome_count())
        .map(|k| {
            let e_k = obs.basis_vector(k, 0);
            let probability = inner(psi, &e_k).expect("dims checked").norm_sqr();
            MeasurementRecord {
                outcome: obs.eigenvalue(k),
                probability,
                post_state: pure_to_density(&e_k),
                postulate: Postulate::PpNondegenerate,
                selection: Some(k),
            }
        })
        .collect())
}

fn refined_weights_pure(d: &RefinementObservable, psi: &StateVector, i: usize) -> Vec<f64> {
    d.basis(i)
        .column_iter()
        .map(|col| psi.amplitudes().dotc(&col.into_owned()).norm_sqr())
        .collect()
}

fn refined_weights_density(d: &RefinementObservable, rho: &DensityOperator, i: usize) -> Vec<f64> {
    d.basis(i)
        .column_iter()
        .map(|col| {
            let c = col.into_owned();
            (c.adjoint() * rho.matrix() * &c)[(0, 0)].re
        })
        .collect()
}

fn weighted_block_mixture(d: &RefinementObservable, i: usize, weights: &[f64]) -> CMatrix {
    let dim = d.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (col, &w) in d.basis(i).column_iter().zip(weights) {
        let c = col.into_owned();
        out += (&c * c.adjoint()) * Complex64::new(w, 0.0);
    }
    out
}

/// Refined measurement without selection: Σᵢ Σₙ |⟨ψ, eᵢₙ⟩|² P_{eᵢₙ},
/// diagonal in the refinement eigenbasis.
pub fn vn_refined_nonselective(d: &RefinementObservable, psi: &StateVector) -> Result<DensityOperator> {
    if psi.dim() != d.dim() {
        return Err(Error::DimMismatch { left: psi.dim(), right: d.dim() });
    }
    let mut out = CMatrix::zeros(d.dim(), d.dim());
    for i in 0..d.parent().outcome_count() {
        let w = refined_weights_pure(d, psi, i);
        out += weighted_block_mixture(d, i, &w);
    }
    DensityOperator::new(out)
}

/// Mixed-state form of [`vn_refined_nonselective`] with weights ⟨eᵢₙ|ρ|eᵢₙ⟩.
pub fn vn_refined_nonselective_density(
    d: &RefinementObservable,
    rho: &DensityOperator,
) -> Result<DensityOperator> {
    if rho.dim() != d.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: d.dim() });
    }
    let mut out = CMatrix::zeros(d.dim(), d.dim());
    for i in 0..d.parent().outcome_count() {
        let w = refined_weights_density(d, rho, i);
        out += weighted_block_mixture(d, i, &w);
    }
    DensityOperator::new(out)
}

/// Refined measurement with selection of the parent outcome αᵢ: the
/// normalized refined mixture Σₙ |⟨ψ, eᵢₙ⟩|² P_{eᵢₙ} / ‖Pᵢψ‖², supported
/// on Hᵢ. Unlike the Lüders transition this is mixed in general.
pub fn vn_refined_selective(
    d: &RefinementObservable,
    psi: &StateVector,
    i: usize,
) -> Result<MeasurementRecord> {
    if psi.dim() != d.dim() {
        return Err(Error::DimMismatch { left: psi.dim(), right: d.dim() });
    }
    let weights = refined_weights_pure(d, psi, i);
    finish_refined_selection(d, i, weights)
}

/// Mixed-state form of [`vn_refined_selective`].
pub fn vn_refined_selective_density(
    d: &RefinementObservable,
    rho: &DensityOperator,
    i: usize,
) -> Result<MeasurementRecord> {
    if rho.dim() != d.dim() {
        return Err(Error::DimMismatch { left: rho.dim(), right: d.dim() });
    }
    let weights = refined_weights_density(d, rho, i);
    finish_refined_selection(d, i, weights)
}

fn finish_refined_selection(
    d: &RefinementObservable,
    i: usize,
    weights: Vec<f64>,
) -> Result<MeasurementRecord> {
    let tol = Tolerances::default();
    let probability: f64 = weights.iter().sum();
    if probability <= tol.prob {
        return Err(Error::ZeroProbabilityOutcome { index: i, probability });
    }
    let mixture = weighted_block_mixture(d, i, &weights) / Complex64::new(probability, 0.0);
    Ok(MeasurementRecord {
        outcome: d.coarse_value(i),
        probability,
        post_state: DensityOperator::new(mixture)?,
        postulate: Postulate::VonNeumannRefined,
        selection: Some(i),
    })
}

/// Both sides of the Bayes-rule consistency identity for a refinement
/// outcome vector φ ∈ Hᵢ.
#[derive(Debug, Clone, Copy)]
pub struct BayesCheck {
    /// P(D = γ_φ | ρ_ψ) = |⟨ψ, φ⟩|², the direct Born probability.
    pub lhs: f64,
    /// P(A = αᵢ | ρ_ψ) · P(D = γ_φ | Gᵢ) with Gᵢ the Lüders state.
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluate the chain rule P(D = γ_φ | ρ_ψ) = P(A = αᵢ | ρ_ψ) · P(D = γ_φ | Gᵢ)
/// for measuring A first and then a refinement D having φ among its
/// eigenvectors. The identity holding for every φ ∈ Hᵢ pins Gᵢ down to the
/// Lüders state, which is what `rhs` uses.
pub fn bayes_check(
    d: &RefinementObservable,
    psi: &StateVector,
    i: usize,
    phi: &StateVector,
) -> Result<BayesCheck> {
    let tol = Tolerances::default();
    if psi.dim() != d.dim() {
        return Err(Error::DimMismatch { left: psi.dim(), right: d.dim() });
    }
    let obs = d.parent();
    // φ must lie in the selected eigenspace
    let projected_phi = obs.projector(i).project(phi)?;
    let residual_out = (phi.amplitudes() - &projected_phi).norm();
    if residual_out > tol.norm.sqrt() {
        return Err(Error::NotInEigenspace { block: i, residual: residual_out });
    }

    let lhs = inner(psi, phi)?.norm_sqr();

    let projected_psi = obs.projector(i).project(psi)?;
    let p_i = projected_psi.norm_squared();
    if p_i <= tol.prob {
        return Err(Error::ZeroProbabilityOutcome { index: i, probability: p_i });
    }
    let luders_vec = StateVector::normalized(projected_psi)?;
    let g_i = pure_to_density(&luders_vec);
    let born_phi = (phi.amplitudes().adjoint() * g_i.matrix() * phi.amplitudes())[(0, 0)].re;
    let rhs = p_i * born_phi;

    Ok(BayesCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}
