//! Executable protocol demonstrations: quantum teleportation and a small
//! one-way (measurement-based) computation, runnable under the Lüders
//! channel or under von Neumann refined measurements with configurable
//! refinement bases.
//!
//! Both protocols measure observables with degenerate spectra — the Bell
//! observable on Alice's pair has four rank-2 eigenspaces, the cluster
//! measurements have rank-2^(m−1) eigenspaces — so the choice of postulate
//! matters: under Lüders the protocols are exact, while a von Neumann
//! refinement misaligned with the projected state degrades them into
//! mixtures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    partial_trace, pure_to_density, tensor_states, CMatrix, CVector, DensityOperator, StateVector,
};
use crate::measurement::{
    aligned_block_basis, build_refinement, diagonalizing_block_bases, luders_selective,
    luders_selective_density, vn_refined_nonselective, vn_refined_selective,
    vn_refined_selective_density, GammaStrategy, RefinementObservable,
};
use crate::random::{derive_stream, random_refinement_bases, seeded_rng};
use crate::spectral::{make_observable, Observable};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli X.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Pauli Z.
pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Hadamard.
pub fn hadamard() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(SQRT_HALF, 0.0), c(SQRT_HALF, 0.0), c(SQRT_HALF, 0.0), c(-SQRT_HALF, 0.0)],
    )
}

/// Phase gate P(φ) = diag(1, e^{iφ}); a z-rotation up to global phase.
pub fn phase_gate(phi: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, phi)],
    )
}

/// |+⟩ = (|0⟩ + |1⟩)/√2.
pub fn plus_state() -> StateVector {
    StateVector::new(CVector::from_row_slice(&[c(SQRT_HALF, 0.0), c(SQRT_HALF, 0.0)]))
        .expect("unit by construction")
}

/// The four Bell states: Φ⁺, Φ⁻, Ψ⁺, Ψ⁻ for k = 0..4.
pub fn bell_state(k: usize) -> StateVector {
    let h = c(SQRT_HALF, 0.0);
    let amps = match k {
        0 => [h, c(0.0, 0.0), c(0.0, 0.0), h],
        1 => [h, c(0.0, 0.0), c(0.0, 0.0), -h],
        2 => [c(0.0, 0.0), h, h, c(0.0, 0.0)],
        3 => [c(0.0, 0.0), h, -h, c(0.0, 0.0)],
        _ => panic!("Bell index {k} out of range"),
    };
    StateVector::new(CVector::from_row_slice(&amps)).expect("unit by construction")
}

/// Alice's Bell observable on the 3-qubit teleportation register:
/// Σₖ k · (Bₖ ⊗ I) with Bₖ the Bell projectors on qubits (0, 1). Every
/// eigenvalue has a rank-2 eigenspace.
pub fn bell_observable() -> Observable {
    let bases = (0..4)
        .map(|k| {
            (0..2)
                .map(|y| tensor_states(&bell_state(k), &StateVector::basis_state(2, y)))
                .collect()
        })
        .collect();
    make_observable(&[0.0, 1.0, 2.0, 3.0], bases).expect("Bell blocks are orthonormal")
}

/// Bob's Pauli correction for Bell outcome k: the inverse of the byproduct
/// Bob's qubit picks up (I, Z, X, ZX).
pub fn pauli_correction(k: usize) -> CMatrix {
    match k {
        0 => CMatrix::identity(2, 2),
        1 => pauli_z(),
        2 => pauli_x(),
        3 => pauli_z() * pauli_x(),
        _ => panic!("Bell index {k} out of range"),
    }
}

/// How refinement bases are chosen when running under the von Neumann
/// refined channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementChoice {
    /// The observable's own eigenbases (product form for the protocols
    /// here).
    Computational,
    /// Per-block bases diagonalizing the projected state; first vector is
    /// the normalized projection, so the channel reproduces Lüders.
    Aligned,
    /// Haar-random rotation of each block basis from the given seed.
    Seeded(u64),
}

/// Which transition rule a protocol run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostulateConfig {
    Luders,
    VnRefined(RefinementChoice),
}

fn refinement_for(
    obs: &Observable,
    psi: &StateVector,
    choice: RefinementChoice,
) -> Result<RefinementObservable> {
    let bases = match choice {
        RefinementChoice::Computational => None,
        RefinementChoice::Aligned => {
            let mut bases = Vec::with_capacity(obs.outcome_count());
            for i in 0..obs.outcome_count() {
                bases.push(aligned_block_basis(obs, i, psi)?);
            }
            Some(bases)
        }
        RefinementChoice::Seeded(seed) => {
            Some(random_refinement_bases(obs, &mut seeded_rng(seed)))
        }
    };
    build_refinement(obs, bases, GammaStrategy::IndexFraction)
}

fn refinement_for_density(
    obs: &Observable,
    rho: &DensityOperator,
    choice: RefinementChoice,
    stream: u64,
) -> Result<RefinementObservable> {
    let bases = match choice {
        RefinementChoice::Computational => None,
        RefinementChoice::Aligned => Some(diagonalizing_block_bases(obs, rho)?),
        RefinementChoice::Seeded(seed) => {
            Some(random_refinement_bases(obs, &mut seeded_rng(derive_stream(seed, stream, 0))))
        }
    };
    build_refinement(obs, bases, GammaStrategy::IndexFraction)
}

/// One teleportation run with a fixed Bell outcome.
#[derive(Debug, Clone)]
pub struct TeleportationRun {
    pub input: StateVector,
    pub config: PostulateConfig,
    /// Bell-block index 0..4 that Alice announced.
    pub outcome: usize,
    /// Probability of that outcome (1/4 for every input).
    pub probability: f64,
    /// Bob's qubit after the Pauli correction.
    pub bob_state: DensityOperator,
    /// ⟨ψᵢₙ| bob_state |ψᵢₙ⟩.
    pub fidelity: f64,
}

/// Teleport a single-qubit state, selecting Bell outcome `outcome` for
/// Alice's measurement under the configured channel.
///
/// Under Lüders the fidelity is 1 for every outcome. Under a refined
/// measurement Alice knows only the coarse Bell outcome, not the refined
/// one, so Bob receives the refined mixture; a basis misaligned with the
/// projected state drags the fidelity below 1.
pub fn teleport(
    psi_in: &StateVector,
    config: &PostulateConfig,
    outcome: usize,
) -> Result<TeleportationRun> {
    if psi_in.dim() != 2 {
        return Err(Error::DimMismatch { left: psi_in.dim(), right: 2 });
    }
    if outcome >= 4 {
        return Err(Error::InvalidArgument(format!("Bell outcome {outcome} out of range")));
    }
    let psi_total = tensor_states(psi_in, &bell_state(0));
    let obs = bell_observable();
    let record = match config {
        PostulateConfig::Luders => luders_selective(&obs, &psi_total, outcome)?,
        PostulateConfig::VnRefined(choice) => {
            let d = refinement_for(&obs, &psi_total, *choice)?;
            vn_refined_selective(&d, &psi_total, outcome)?
        }
    };
    let bob = partial_trace(&record.post_state, &[2, 2, 2], 2)?;
    let u = pauli_correction(outcome);
    let corrected = DensityOperator::new(&u * bob.matrix() * u.adjoint())?;
    let fidelity = corrected.fidelity_with_pure(psi_in)?;
    Ok(TeleportationRun {
        input: psi_in.clone(),
        config: *config,
        outcome,
        probability: record.probability,
        bob_state: corrected,
        fidelity,
    })
}

/// Teleportation runs for all four Bell outcomes.
pub fn teleport_all(psi_in: &StateVector, config: &PostulateConfig) -> Result<Vec<TeleportationRun>> {
    (0..4).map(|k| teleport(psi_in, config, k)).collect()
}

/// The other view of refined teleportation: Alice learns the refined
/// outcome (k, n) itself, so the post-state is the pure refinement
/// eigenvector. Bob's state is then pure but depends on the basis choice.
pub fn teleport_with_refined_outcome(
    psi_in: &StateVector,
    choice: RefinementChoice,
    outcome: usize,
    refined: usize,
) -> Result<TeleportationRun> {
    if psi_in.dim() != 2 {
        return Err(Error::DimMismatch { left: psi_in.dim(), right: 2 });
    }
    let psi_total = tensor_states(psi_in, &bell_state(0));
    let obs = bell_observable();
    let d = refinement_for(&obs, &psi_total, choice)?;
    let e = d.refined_vector(outcome, refined);
    let probability = crate::hilbert::inner(&psi_total, &e)?.norm_sqr();
    let bob = partial_trace(&pure_to_density(&e), &[2, 2, 2], 2)?;
    let u = pauli_correction(outcome);
    let corrected = DensityOperator::new(&u * bob.matrix() * u.adjoint())?;
    let fidelity = corrected.fidelity_with_pure(psi_in)?;
    Ok(TeleportationRun {
        input: psi_in.clone(),
        config: PostulateConfig::VnRefined(choice),
        outcome,
        probability,
        bob_state: corrected,
        fidelity,
    })
}

/// Bob's marginal before Alice's outcome is announced: the partial trace
/// of the non-selective post-measurement state onto qubit 2.
pub fn bob_marginal_nonselective(
    psi_in: &StateVector,
    config: &PostulateConfig,
) -> Result<DensityOperator> {
    let psi_total = tensor_states(psi_in, &bell_state(0));
    let obs = bell_observable();
    let post = match config {
        PostulateConfig::Luders => {
            crate::measurement::luders_nonselective(&obs, &pure_to_density(&psi_total))?
        }
        PostulateConfig::VnRefined(choice) => {
            let d = refinement_for(&obs, &psi_total, *choice)?;
            vn_refined_nonselective(&d, &psi_total)?
        }
    };
    partial_trace(&post, &[2, 2, 2], 2)
}

/// Label of a refinement-basis draw in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    Aligned,
    Random(u32),
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub basis: BasisLabel,
    pub outcome: usize,
    pub fidelity: f64,
}

/// Run teleportation under `n_bases` random refinement bases plus the
/// aligned basis, for every Bell outcome.
///
/// The aligned rows always report fidelity 1; the random rows quantify how
/// much the refinement ambiguity costs.
pub fn refinement_sweep(psi_in: &StateVector, n_bases: usize, seed: u64) -> Result<Vec<SweepRow>> {
    if n_bases == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one basis".into()));
    }
    let mut rows = Vec::with_capacity(4 * (n_bases + 1));
    for outcome in 0..4 {
        let run = teleport(psi_in, &PostulateConfig::VnRefined(RefinementChoice::Aligned), outcome)?;
        rows.push(SweepRow { basis: BasisLabel::Aligned, outcome, fidelity: run.fidelity });
    }
    for j in 0..n_bases {
        let stream = derive_stream(seed, j as u64, 0);
        let config = PostulateConfig::VnRefined(RefinementChoice::Seeded(stream));
        for outcome in 0..4 {
            let run = teleport(psi_in, &config, outcome)?;
            rows.push(SweepRow { basis: BasisLabel::Random(j as u32), outcome, fidelity: run.fidelity });
        }
    }
    Ok(rows)
}

/// Linear cluster state on n qubits: |+⟩^⊗n with CZ between neighbors.
pub fn linear_cluster_state(n: usize) -> StateVector {
    let dim = 1usize << n;
    let amp = 1.0 / (dim as f64).sqrt();
    let mut v = CVector::zeros(dim);
    for x in 0..dim {
        let mut sign = 1.0;
        for q in 0..n - 1 {
            let b0 = (x >> (n - 1 - q)) & 1;
            let b1 = (x >> (n - 2 - q)) & 1;
            if b0 == 1 && b1 == 1 {
                sign = -sign;
            }
        }
        v[x] = c(sign * amp, 0.0);
    }
    StateVector::new(v).expect("unit by construction")
}

/// Measurement basis {(|0⟩ ± e^{iθ}|1⟩)/√2} on the first qubit of an
/// m-qubit register, as an observable with outcomes 0 (+) and 1 (−), each
/// with a rank-2^(m−1) eigenspace.
fn first_qubit_observable(qubits: usize, theta: f64) -> Observable {
    let rest = 1usize << (qubits - 1);
    let h = c(SQRT_HALF, 0.0);
    let e_theta = Complex64::from_polar(SQRT_HALF, theta);
    let plus = StateVector::new(CVector::from_row_slice(&[h, e_theta])).expect("unit");
    let minus = StateVector::new(CVector::from_row_slice(&[h, -e_theta])).expect("unit");
    let bases = vec![
        (0..rest).map(|y| tensor_states(&plus, &StateVector::basis_state(rest, y))).collect(),
        (0..rest).map(|y| tensor_states(&minus, &StateVector::basis_state(rest, y))).collect(),
    ];
    make_observable(&[0.0, 1.0], bases).expect("measurement basis blocks are orthonormal")
}

/// Result of one linear-cluster computation branch.
#[derive(Debug, Clone)]
pub struct ClusterRun {
    /// Number of qubits in the chain.
    pub size: usize,
    /// Nominal measurement angle per measured qubit.
    pub angles: Vec<f64>,
    /// Measurement outcomes s₀, s₁, … (the byproduct record).
    pub byproduct: Vec<u8>,
    /// Probability of this branch.
    pub probability: f64,
    /// Output qubit after the byproduct correction.
    pub output_state: DensityOperator,
    /// The logical unitary the measurement pattern implements:
    /// Π H·P(−θⱼ), last measurement leftmost.
    pub target_unitary: CMatrix,
    /// ⟨target| output |target⟩ with |target⟩ = target_unitary |+⟩.
    pub fidelity: f64,
}

/// Run a linear-cluster measurement pattern on `angles.len() + 1` qubits
/// (3 to 5), forcing the given outcome branch.
///
/// Each measured qubit j is read in the basis {(|0⟩ ± e^{iθ}|1⟩)/√2} at the
/// adaptively signed angle (−1)^x θⱼ, where x is the current X-byproduct
/// flag; flags update as (x, z) ← (sⱼ ⊕ z, x) and the final correction
/// Z^z X^x is applied to the output qubit. Every measurement is handled by
/// the configured postulate channel; under Lüders the corrected output
/// equals the target exactly, for every branch.
pub fn run_linear_cluster(
    angles: &[f64],
    config: &PostulateConfig,
    branch: &[u8],
) -> Result<ClusterRun> {
    let n = angles.len() + 1;
    if !(3..=5).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "cluster size {n} out of the supported 3..=5 range"
        )));
    }
    if branch.len() != angles.len() {
        return Err(Error::DimMismatch { left: branch.len(), right: angles.len() });
    }
    if branch.iter().any(|&s| s > 1) {
        return Err(Error::InvalidArgument("branch outcomes must be 0 or 1".into()));
    }

    let mut rho = pure_to_density(&linear_cluster_state(n));
    let mut qubits_left = n;
    let (mut x_flag, mut z_flag) = (0u8, 0u8);
    let mut probability = 1.0;
    let mut byproduct = Vec::with_capacity(angles.len());

    for (j, (&theta, &s)) in angles.iter().zip(branch).enumerate() {
        let theta_phys = if x_flag == 1 { -theta } else { theta };
        let obs = first_qubit_observable(qubits_left, theta_phys);
        let record = match config {
            PostulateConfig::Luders => luders_selective_density(&obs, &rho, s as usize)?,
            PostulateConfig::VnRefined(choice) => {
                let d = refinement_for_density(&obs, &rho, *choice, j as u64)?;
                vn_refined_selective_density(&d, &rho, s as usize)?
            }
        };
        probability *= record.probability;
        byproduct.push(s);
        // drop the measured qubit, keep the rest as one register
        let rest = 1usize << (qubits_left - 1);
        rho = partial_trace(&record.post_state, &[2, rest], 1)?;
        let (nx, nz) = (s ^ z_flag, x_flag);
        x_flag = nx;
        z_flag = nz;
        qubits_left -= 1;
    }

    let mut correction = CMatrix::identity(2, 2);
    if x_flag == 1 {
        correction = pauli_x() * correction;
    }
    if z_flag == 1 {
        correction = pauli_z() * correction;
    }
    let output = DensityOperator::new(&correction * rho.matrix() * correction.adjoint())?;

    let mut target = CMatrix::identity(2, 2);
    for &theta in angles {
        target = hadamard() * phase_gate(-theta) * target;
    }
    let target_state = StateVector::normalized(&target * plus_state().amplitudes().clone())?;
    let fidelity = output.fidelity_with_pure(&target_state)?;

    Ok(ClusterRun {
        size: n,
        angles: angles.to_vec(),
        byproduct,
        probability,
        output_state: output,
        target_unitary: target,
        fidelity,
    })
}

/// The smallest standard one-way computation: a 3-qubit linear cluster
/// measuring qubit 0 at −β and qubit 1 at 0, which implements the
/// z-rotation P(β) on the logical |+⟩ (the two Hadamards of the wire
/// cancel).
pub fn one_way_rotation(
    beta: f64,
    config: &PostulateConfig,
    branch: &[u8],
) -> Result<ClusterRun> {
    run_linear_cluster(&[-beta, 0.0], config, branch)
}
