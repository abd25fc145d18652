//! Reconstruction of post-measurement block operators from refinement
//! statistics alone.
//!
//! After a selective measurement of A = Σ αᵢ Pᵢ on ψ, the only experimental
//! handle von Neumann's description gives on the hidden post-measurement
//! operator ĝₘ is its quadratic form on unit vectors of the eigenspace Hₘ:
//! q(φ) = ⟨ĝₘ φ, φ⟩ = |⟨ψ, φ⟩|², obtainable as a refinement-measurement
//! frequency. This module rebuilds the full matrix of ĝₘ from q alone
//! through polarization probes and compares the result against the Lüders
//! prediction Pₘψ ⊗ Pₘψ.
//!
//! The oracle abstraction separates what refinement statistics provide
//! (`q(φ)` values, exact or sampled) from how the matrix is rebuilt, so the
//! sampled mode exercises the physical story — only measurement frequencies
//! are available — while the exact mode isolates the algebra.

use num_complex::Complex64;
use rand::distributions::Distribution;
use rand_distr::Binomial;

use crate::error::{Error, Result};
use crate::hilbert::{
    gram_deviation, inner, max_abs_diff, CMatrix, DensityOperator, StateVector,
};
use crate::random::{derive_stream, haar_unitary, seeded_rng};
use crate::spectral::{complete_basis, Observable};
use crate::tol::Tolerances;

/// Where a quadratic-form value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// q(φ) = |⟨ψ, φ⟩|² to machine precision.
    Exact,
    /// q(φ) is a frequency estimate from simulated refinement measurements.
    Sampled { shots: u64, seed: u64 },
}

/// Evaluator of the quadratic form φ ↦ ⟨ĝₘ φ, φ⟩ on unit vectors of one
/// eigenspace.
pub trait QuadraticFormOracle {
    fn evaluate(&mut self, probe: &StateVector) -> Result<f64>;
    fn mode(&self) -> OracleMode;
    /// Number of evaluations made so far.
    fn calls(&self) -> u64;
    /// Total simulated shots consumed (0 in exact mode).
    fn shots_used(&self) -> u64;
}

/// Exact oracle: evaluates |⟨ψ, φ⟩|² directly.
#[derive(Debug, Clone)]
pub struct ExactOracle<'a> {
    psi: &'a StateVector,
    calls: u64,
}

impl<'a> ExactOracle<'a> {
    pub fn new(psi: &'a StateVector) -> Self {
        Self { psi, calls: 0 }
    }
}

impl QuadraticFormOracle for ExactOracle<'_> {
    fn evaluate(&mut self, probe: &StateVector) -> Result<f64> {
        self.calls += 1;
        Ok(inner(self.psi, probe)?.norm_sqr())
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Exact
    }

    fn calls(&self) -> u64 {
        self.calls
    }

    fn shots_used(&self) -> u64 {
        0
    }
}

/// Sampled oracle: each call builds a refinement eigenbasis of the block
/// that contains the probe vector (a refinement measurement needs a full
/// eigenbasis), then estimates the probe-outcome frequency over `shots`
/// simulated measurements.
///
/// The per-call random stream is derived from (seed, block index, call
/// index), so results do not depend on evaluation order. The drawn count
/// is the probe-outcome marginal of the shot histogram, which is
/// Binomial(shots, |⟨ψ, φ⟩|²) — identical in law to tallying the probe
/// outcome across `shots` individual measurements.
pub struct SampledOracle<'a> {
    psi: &'a StateVector,
    obs: &'a Observable,
    block: usize,
    shots: u64,
    seed: u64,
    calls: u64,
}

impl<'a> SampledOracle<'a> {
    pub fn new(psi: &'a StateVector, obs: &'a Observable, block: usize, shots: u64, seed: u64) -> Self {
        assert!(shots >= 1, "sampled oracle needs at least one shot");
        Self { psi, obs, block, shots, seed, calls: 0 }
    }
}

impl QuadraticFormOracle for SampledOracle<'_> {
    fn evaluate(&mut self, probe: &StateVector) -> Result<f64> {
        let stream = derive_stream(self.seed, self.block as u64, self.calls);
        self.calls += 1;
        let mut rng = seeded_rng(stream);

        // Complete the probe to an orthonormal eigenbasis of the block with
        // seeded fill vectors; this is the refinement actually "measured".
        let rank = self.obs.rank(self.block);
        let prefix = CMatrix::from_columns(&[probe.amplitudes().clone()]);
        let fill = self.obs.basis(self.block) * haar_unitary(rank, &mut rng);
        let basis = complete_basis(&prefix, &fill, rank)?;

        let weights: Vec<f64> = basis
            .column_iter()
            .map(|col| self.psi.amplitudes().dotc(&col.into_owned()).norm_sqr())
            .collect();
        let p = weights[0].clamp(0.0, 1.0);

        let count = Binomial::new(self.shots, p)
            .expect("clamped probability is valid")
            .sample(&mut rng);
        Ok(count as f64 / self.shots as f64)
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Sampled { shots: self.shots, seed: self.seed }
    }

    fn calls(&self) -> u64 {
        self.calls
    }

    fn shots_used(&self) -> u64 {
        self.calls * self.shots
    }
}

/// Rebuild the matrix of ĝₘ in the coordinates of `basis_m` from quadratic
/// form values alone.
///
/// With G[n,j] = ⟨eₘₙ, ĝₘ eₘⱼ⟩ (conjugate-linear first argument):
///
/// * diagonal: G[n,n] = q(eₘₙ);
/// * real part: q((eₘₙ+eₘⱼ)/√2) = (G[n,n]+G[j,j])/2 + Re G[n,j];
/// * imaginary part: q((eₘₙ+i·eₘⱼ)/√2) = (G[n,n]+G[j,j])/2 − Im G[n,j].
///
/// Worked 2×2 example fixing the sign convention: for ψ = (1/√2, i/√2) in
/// a full 2-dimensional block, the probes give q(e₀) = q(e₁) = 1/2,
/// q((e₀+e₁)/√2) = 1/2 and q((e₀+ie₁)/√2) = 1, so G[0,1] =
/// (1/2 − 1/2) + i(1/2 − 1) = −i/2 — matching ψψ† = [[1/2, −i/2], [i/2, 1/2]].
///
/// Makes exactly d² oracle calls for a d-dimensional block (d diagonal +
/// d(d−1) polarization probes); the result is Hermitian by construction.
pub fn reconstruct_block(
    oracle: &mut dyn QuadraticFormOracle,
    basis_m: &CMatrix,
) -> Result<CMatrix> {
    let d = basis_m.ncols();
    let exact = oracle.mode() == OracleMode::Exact;
    let tol = Tolerances::default();
    let sqrt_half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);

    let mut eval = |v: nalgebra::DVector<Complex64>| -> Result<f64> {
        let probe = StateVector::normalized(v)?;
        let q = oracle.evaluate(&probe)?;
        if exact && !(-tol.norm..=1.0 + tol.norm).contains(&q) {
            return Err(Error::OracleRange { value: q });
        }
        Ok(q)
    };

    let mut diag = Vec::with_capacity(d);
    for n in 0..d {
        diag.push(eval(basis_m.column(n).into_owned())?);
    }

    let mut g = CMatrix::zeros(d, d);
    for n in 0..d {
        g[(n, n)] = Complex64::new(diag[n], 0.0);
    }
    for n in 0..d {
        for j in (n + 1)..d {
            let e_n = basis_m.column(n);
            let e_j = basis_m.column(j);
            let q_plus = eval((e_n + e_j) * sqrt_half)?;
            let q_imag = eval((e_n.into_owned() + e_j * i_unit) * sqrt_half)?;
            let mean = 0.5 * (diag[n] + diag[j]);
            let entry = Complex64::new(q_plus - mean, mean - q_imag);
            g[(n, j)] = entry;
            g[(j, n)] = entry.conj();
        }
    }
    Ok(g)
}

/// Max |⟨v, g w⟩| over pairs with at least one vector outside the block:
/// zero for any valid post-measurement operator, which maps the whole space
/// into the eigenspace.
pub fn block_support_check(g: &CMatrix, basis_m: &CMatrix, complement: &CMatrix) -> Result<f64> {
    let d_m = basis_m.ncols();
    let cols: Vec<_> = basis_m
        .column_iter()
        .chain(complement.column_iter())
        .map(|c| c.into_owned())
        .collect();
    let u = CMatrix::from_columns(&cols);
    let dev = gram_deviation(&u);
    if dev > Tolerances::default().norm {
        return Err(Error::NotOrthonormal { max_dev: dev });
    }
    let m = u.adjoint() * g * &u;
    let mut max = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r >= d_m || c >= d_m {
                max = max.max(m[(r, c)].norm());
            }
        }
    }
    Ok(max)
}

/// How `verify_theorem` sources its quadratic-form values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionMode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

/// Comparison of a reconstructed block operator against the Lüders
/// prediction Pₘψ ⊗ Pₘψ.
///
/// `reconstructed` is the unnormalized ĝₘ embedded in the full space
/// (trace ≈ ‖Pₘψ‖²); normalization to a density operator is a separate
/// step via [`ReconstructionReport::normalized_state`].
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    /// Parent block index.
    pub block: usize,
    /// Parent eigenvalue αₘ.
    pub outcome: f64,
    /// ‖Pₘψ‖².
    pub probability: f64,
    /// Reconstructed ĝₘ, full-dimension, supported on Hₘ.
    pub reconstructed: CMatrix,
    /// Pₘψ ⊗ Pₘψ, full-dimension.
    pub reference: CMatrix,
    pub max_abs_error: f64,
    pub frobenius_error: f64,
    /// Simulated shots consumed for this block (0 in exact mode).
    pub shots_used: u64,
}

impl ReconstructionReport {
    /// Ĝₘ = ĝₘ / Tr ĝₘ, the normalized post-measurement state.
    pub fn normalized_state(&self) -> Result<DensityOperator> {
        let tr = self.reconstructed.trace().re;
        if tr <= Tolerances::default().prob {
            return Err(Error::ZeroProbabilityOutcome { index: self.block, probability: tr });
        }
        let normalized = &self.reconstructed / Complex64::new(tr, 0.0);
        DensityOperator::with_tol(normalized, &self.validation_tolerances())
    }

    fn validation_tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if self.shots_used > 0 {
            // statistical noise scales as 1/√shots per oracle call
            let calls = (self.reconstructed.nrows() as f64).max(1.0);
            let eps = 50.0 * calls / (self.shots_used as f64 / calls).sqrt();
            tol.norm = tol.norm.max(eps);
            tol.herm = tol.herm.max(eps);
            tol.psd = tol.psd.max(eps);
        }
        tol
    }
}

/// Reconstruct every admissible post-measurement block (‖Pₘψ‖² above the
/// probability floor) from refinement statistics and compare with the
/// Lüders prediction.
pub fn verify_theorem(
    psi: &StateVector,
    obs: &Observable,
    mode: ReconstructionMode,
) -> Result<Vec<ReconstructionReport>> {
    if psi.dim() != obs.dim() {
        return Err(Error::DimMismatch { left: psi.dim(), right: obs.dim() });
    }
    let tol = Tolerances::default();
    let mut reports = Vec::new();
    for m in 0..obs.outcome_count() {
        let projected = obs.projector(m).project(psi)?;
        let probability = projected.norm_squared();
        if probability <= tol.prob {
            continue;
        }
        let basis = obs.basis(m);
        let (block, shots_used) = match mode {
            ReconstructionMode::Exact => {
                let mut oracle = ExactOracle::new(psi);
                (reconstruct_block(&mut oracle, basis)?, 0)
            }
            ReconstructionMode::Sampled { shots, seed } => {
                let mut oracle = SampledOracle::new(psi, obs, m, shots, seed);
                let block = reconstruct_block(&mut oracle, basis)?;
                (block, oracle.shots_used())
            }
        };
        let reconstructed = basis * block * basis.adjoint();
        let reference = &projected * projected.adjoint();
        let max_abs_error = max_abs_diff(&reconstructed, &reference);
        let frobenius_error = (&reconstructed - &reference).norm();
        reports.push(ReconstructionReport {
            block: m,
            outcome: obs.eigenvalue(m),
            probability,
            reconstructed,
            reference,
            max_abs_error,
            frobenius_error,
            shots_used,
        });
    }
    Ok(reports)
}

/// Σₘ ĝₘ: the non-selective post-measurement state assembled from the
/// per-block reconstructions. Every block with probability above the floor
/// must be covered by a report.
pub fn assemble_nonselective(
    reports: &[ReconstructionReport],
    probabilities: &[(f64, f64)],
) -> Result<DensityOperator> {
    let tol = Tolerances::default();
    let Some(first) = reports.first() else {
        return Err(Error::BlockMissing { block: 0 });
    };
    let dim = first.reconstructed.nrows();
    let mut sum = CMatrix::zeros(dim, dim);
    let mut max_shot_tol = Tolerances::default();
    for (block, (_, p)) in probabilities.iter().enumerate() {
        if *p <= tol.prob {
            continue;
        }
        let report = reports
            .iter()
            .find(|r| r.block == block)
            .ok_or(Error::BlockMissing { block })?;
        sum += &report.reconstructed;
        let t = report.validation_tolerances();
        max_shot_tol.norm = max_shot_tol.norm.max(t.norm);
        max_shot_tol.herm = max_shot_tol.herm.max(t.herm);
        max_shot_tol.psd = max_shot_tol.psd.max(t.psd);
    }
    DensityOperator::with_tol(sum, &max_shot_tol)
}
