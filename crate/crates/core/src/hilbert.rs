//! Dense complex linear algebra for finite-dimensional Hilbert spaces.
//!
//! Vectors and operators are immutable after construction and every
//! operation is a pure function of its inputs, so values can be shared
//! freely across threads.
//!
//! Conventions fixed here and used everywhere else:
//!
//! * the inner product [`inner`] is conjugate-linear in its **first**
//!   argument: ⟨φ, ψ⟩ = Σₖ φₖ* ψₖ;
//! * tensor products are big-endian: the left factor is the most
//!   significant index, matching the usual |q₀q₁…⟩ ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector used throughout the crate.
pub type CVector = DVector<Complex64>;

pub(crate) const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry magnitude of a matrix; the ‖·‖_max metric used by the
/// Hermiticity and idempotency checks.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-abs deviation between two matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

pub(crate) fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub(crate) fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch {
            left: m.nrows(),
            right: m.ncols(),
        });
    }
    let dev = hermiticity_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues of a Hermitian matrix are finite"));
    ev
}

/// A pure state: unit-norm complex vector in a fixed computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    /// Wrap an amplitude vector, requiring ‖ψ‖² = 1 within the default norm
    /// tolerance.
    pub fn new(amps: CVector) -> Result<Self> {
        Self::with_tol(amps, &Tolerances::default())
    }

    pub fn with_tol(amps: CVector, tol: &Tolerances) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidArgument("state vector must have dim ≥ 1".into()));
        }
        let norm_sq = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm_sq - 1.0).abs() > tol.norm {
            return Err(Error::Norm { norm_sq });
        }
        Ok(Self { amps })
    }

    /// Normalize an arbitrary nonzero vector into a state.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::Norm { norm_sq: 0.0 });
        }
        Ok(Self { amps: amps / Complex64::new(norm, 0.0) })
    }

    /// Computational basis state |k⟩ in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut amps = CVector::zeros(dim);
        amps[k] = C_ONE;
        Self { amps }
    }

    /// Build from real/imaginary parts (test and IO convenience).
    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimMismatch { left: re.len(), right: im.len() });
        }
        let amps = CVector::from_iterator(
            re.len(),
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)),
        );
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }
}

/// A mixed (or pure) state: Hermitian, PSD, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mat: CMatrix,
}

impl DensityOperator {
    /// Validate Hermiticity, unit trace and positive semidefiniteness with
    /// the default tolerances.
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tol(mat, &Tolerances::default())
    }

    pub fn with_tol(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_hermitian(&mat, tol.herm)?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.norm || tr.im.abs() > tol.norm {
            return Err(Error::Trace { trace: tr.re });
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .first()
            .copied()
            .unwrap_or(f64::INFINITY);
        if min_eig < -tol.psd {
            return Err(Error::NotPositive { min_eig });
        }
        Ok(Self { mat })
    }

    /// Maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Real eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Fidelity ⟨ψ|ρ|ψ⟩ against a pure target.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimMismatch { left: psi.dim(), right: self.dim() });
        }
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.mat * v)[(0, 0)].re)
    }
}

/// Trace distance (1/2)‖ρ − σ‖₁ between two density operators.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { left: a.dim(), right: b.dim() });
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

/// An orthogonal projector: Hermitian, idempotent, with rank = round(Tr P).
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    mat: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tol(mat, &Tolerances::default())
    }

    pub fn with_tol(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_hermitian(&mat, tol.herm)?;
        let dev = max_abs_diff(&(&mat * &mat), &mat);
        if dev > tol.herm {
            return Err(Error::NotIdempotent { max_dev: dev });
        }
        let rank = mat.trace().re.round();
        if rank < 0.0 {
            return Err(Error::NotPositive { min_eig: rank });
        }
        Ok(Self { mat, rank: rank as usize })
    }

    /// Identity projector onto the whole space.
    pub fn identity(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim), rank: dim }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Pψ, unnormalized.
    pub fn project(&self, psi: &StateVector) -> Result<CVector> {
        apply(&self.mat, psi)
    }
}

/// ρ_ψ = ψψ†: the rank-1 density operator induced by a pure state.
pub fn pure_to_density(psi: &StateVector) -> DensityOperator {
    let v = psi.amplitudes();
    // Outer product of a validated unit vector; the invariants hold by
    // construction, so skip re-validation.
    DensityOperator { mat: v * v.adjoint() }
}

/// Inner product ⟨φ, ψ⟩, conjugate-linear in the first argument.
pub fn inner(phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimMismatch { left: phi.dim(), right: psi.dim() });
    }
    Ok(phi.amplitudes().dotc(psi.amplitudes()))
}

/// Matrix-vector product, with no normalization of the result.
pub fn apply(op: &CMatrix, psi: &StateVector) -> Result<CVector> {
    if op.ncols() != psi.dim() {
        return Err(Error::DimMismatch { left: op.ncols(), right: psi.dim() });
    }
    Ok(op * psi.amplitudes())
}

/// Kronecker product of operators; the left factor is most significant.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of states: |a⟩ ⊗ |b⟩, left factor most significant.
pub fn tensor_states(a: &StateVector, b: &StateVector) -> StateVector {
    let amps = a.amplitudes().kronecker(b.amplitudes());
    // Product of unit vectors is a unit vector.
    StateVector { amps }
}

/// Reduced density operator keeping subsystem `keep` of a tensor-product
/// factorization with the given factor dimensions.
pub fn partial_trace(
    rho: &DensityOperator,
    dims: &[usize],
    keep: usize,
) -> Result<DensityOperator> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimMismatch { left: total, right: rho.dim() });
    }
    if keep >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "keep index {keep} out of range for {} factors",
            dims.len()
        )));
    }
    // stride of the kept factor under big-endian index packing
    let stride: usize = dims[keep + 1..].iter().product();
    let d_keep = dims[keep];

    let mut out = CMatrix::zeros(d_keep, d_keep);
    let m = rho.matrix();
    for r in 0..total {
        let kr = (r / stride) % d_keep;
        let key_r = r - kr * stride;
        for c in 0..total {
            let kc = (c / stride) % d_keep;
            let key_c = c - kc * stride;
            if key_r == key_c {
                out[(kr, kc)] += m[(r, c)];
            }
        }
    }
    // Trace is preserved exactly up to summation order, so the result is a
    // valid density operator whenever the input was.
    Ok(DensityOperator { mat: out })
}

pub(crate) fn gram_deviation(columns: &CMatrix) -> f64 {
    let gram = columns.adjoint() * columns;
    let k = columns.ncols();
    max_abs_diff(&gram, &CMatrix::identity(k, k))
}

/// Σₖ vₖvₖ† for an orthonormal set of vectors; rank = the number of vectors.
pub fn projector_onto(vectors: &[StateVector]) -> Result<Projector> {
    projector_onto_with_tol(vectors, &Tolerances::default())
}

pub fn projector_onto_with_tol(vectors: &[StateVector], tol: &Tolerances) -> Result<Projector> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidArgument("projector needs at least one vector".into()));
    };
    let dim = first.dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimMismatch { left: dim, right: v.dim() });
        }
    }
    let cols = CMatrix::from_columns(
        &vectors.iter().map(|v| v.amplitudes().clone()).collect::<Vec<_>>(),
    );
    columns_to_projector(&cols, tol)
}

/// Projector from a dim×rank matrix of orthonormal columns.
pub(crate) fn columns_to_projector(cols: &CMatrix, tol: &Tolerances) -> Result<Projector> {
    let dev = gram_deviation(cols);
    if dev > tol.norm {
        return Err(Error::NotOrthonormal { max_dev: dev });
    }
    Ok(Projector { mat: cols * cols.adjoint(), rank: cols.ncols() })
}
