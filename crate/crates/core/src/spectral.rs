//! Spectral decomposition of Hermitian operators with explicit grouping of
//! near-equal eigenvalues into degenerate eigenspaces.
//!
//! An [`Observable`] is stored as spectral data: distinct eigenvalues αᵢ
//! (ascending) together with the orthogonal projectors Pᵢ and an orthonormal
//! basis of each eigenspace Hᵢ, so that A = Σᵢ αᵢ Pᵢ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_hermitian, columns_to_projector, max_abs, max_abs_diff, CMatrix, Projector, StateVector,
};
use crate::tol::Tolerances;

/// One eigenvalue of an observable together with its eigenspace.
#[derive(Debug, Clone)]
pub struct EigenBlock {
    /// The (distinct) eigenvalue αᵢ.
    pub value: f64,
    /// dim×rank matrix of orthonormal columns spanning Hᵢ.
    pub basis: CMatrix,
    /// Projector onto Hᵢ.
    pub projector: Projector,
}

/// A Hermitian operator in spectral form.
#[derive(Debug, Clone)]
pub struct Observable {
    dim: usize,
    blocks: Vec<EigenBlock>,
}

impl Observable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct eigenvalues.
    pub fn outcome_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[EigenBlock] {
        &self.blocks
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.blocks[i].value
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.value).collect()
    }

    pub fn projector(&self, i: usize) -> &Projector {
        &self.blocks[i].projector
    }

    /// Orthonormal eigenbasis of Hᵢ as a dim×rank column matrix.
    pub fn basis(&self, i: usize) -> &CMatrix {
        &self.blocks[i].basis
    }

    pub fn basis_vector(&self, i: usize, n: usize) -> StateVector {
        StateVector::normalized(self.blocks[i].basis.column(n).into_owned())
            .expect("eigenbasis columns are unit vectors")
    }

    pub fn rank(&self, i: usize) -> usize {
        self.blocks[i].projector.rank()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.blocks.iter().all(|b| b.projector.rank() == 1)
    }

    /// Dense matrix Σᵢ αᵢ Pᵢ.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            m += b.projector.matrix() * Complex64::new(b.value, 0.0);
        }
        m
    }

    /// ‖Pᵢψ‖², the Born probability of outcome i for a pure state.
    pub fn projection_norm_sq(&self, i: usize, psi: &StateVector) -> Result<f64> {
        Ok(self.blocks[i].projector.project(psi)?.norm_squared())
    }

    /// Orthonormal columns spanning the orthogonal complement of Hᵢ,
    /// concatenated from the other eigenspaces.
    pub fn complement_basis(&self, i: usize) -> CMatrix {
        let cols: Vec<_> = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, b)| b.basis.column_iter().map(|c| c.into_owned()))
            .collect();
        if cols.is_empty() {
            CMatrix::zeros(self.dim, 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    }

    /// Check the full set of spectral invariants: distinct eigenvalues,
    /// completeness Σ Pᵢ = I, mutual orthogonality, and rank accounting.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        for w in self.blocks.windows(2) {
            let gap = w[1].value - w[0].value;
            if gap <= 2.0 * tol.eig {
                return Err(Error::DuplicateEigenvalue { value: w[1].value });
            }
        }
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        let mut rank_sum = 0;
        for b in &self.blocks {
            sum += b.projector.matrix();
            rank_sum += b.projector.rank();
        }
        let dev = max_abs_diff(&sum, &CMatrix::identity(self.dim, self.dim));
        if dev > tol.herm {
            return Err(Error::NotOrthonormal { max_dev: dev });
        }
        if rank_sum != self.dim {
            return Err(Error::DimMismatch { left: rank_sum, right: self.dim });
        }
        for (i, a) in self.blocks.iter().enumerate() {
            for b in self.blocks.iter().skip(i + 1) {
                let cross = max_abs(&(a.projector.matrix() * b.projector.matrix()));
                if cross > tol.herm {
                    return Err(Error::NotOrthonormal { max_dev: cross });
                }
            }
        }
        Ok(())
    }

    /// ‖Σᵢ αᵢ Pᵢ − m‖_max, the round-trip error against a source matrix.
    pub fn reconstruction_error(&self, m: &CMatrix) -> f64 {
        max_abs_diff(&self.matrix(), m)
    }
}

/// Modified Gram-Schmidt with a second stabilization pass.
///
/// Backend eigenvector routines do not guarantee orthonormality within a
/// degenerate cluster, so every eigenspace basis goes through this once.
pub(crate) fn orthonormalize(cols: &CMatrix) -> Result<CMatrix> {
    let mut out: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(cols.ncols());
    for col in cols.column_iter() {
        let mut v = col.into_owned();
        for _ in 0..2 {
            for u in &out {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        if norm < 1e-10 {
            return Err(Error::NotOrthonormal { max_dev: norm });
        }
        out.push(v / Complex64::new(norm, 0.0));
    }
    Ok(CMatrix::from_columns(&out))
}

/// Extend `prefix` (orthonormal columns) to `target` orthonormal columns,
/// drawing fill vectors from `candidates` in order and discarding the ones
/// that are linearly dependent on what is already placed.
pub(crate) fn complete_basis(prefix: &CMatrix, candidates: &CMatrix, target: usize) -> Result<CMatrix> {
    let mut out: Vec<nalgebra::DVector<Complex64>> =
        prefix.column_iter().map(|c| c.into_owned()).collect();
    for cand in candidates.column_iter() {
        if out.len() == target {
            break;
        }
        let mut v = cand.into_owned();
        for _ in 0..2 {
            for u in &out {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / Complex64::new(norm, 0.0));
        }
    }
    if out.len() != target {
        return Err(Error::NotOrthonormal { max_dev: out.len() as f64 - target as f64 });
    }
    Ok(CMatrix::from_columns(&out))
}

/// Decompose a Hermitian matrix, merging eigenvalues closer than `tol_eig`
/// into a single degenerate eigenspace.
///
/// Eigenvalues come out ascending; each merged group's reported eigenvalue
/// is the mean of its members. A consecutive gap strictly between `tol_eig`
/// and `2·tol_eig` makes the grouping unstable and is rejected rather than
/// silently resolved either way.
pub fn spectral_decompose(matrix: &CMatrix, tol_eig: f64) -> Result<Observable> {
    spectral_decompose_with_tol(matrix, tol_eig, &Tolerances::default())
}

pub fn spectral_decompose_with_tol(
    matrix: &CMatrix,
    tol_eig: f64,
    tol: &Tolerances,
) -> Result<Observable> {
    check_hermitian(matrix, tol.herm)?;
    let dim = matrix.nrows();
    let eig = matrix.clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("Hermitian eigenvalues are finite")
    });

    // chain-merge sorted eigenvalues by gap
    let mut groups: Vec<Vec<usize>> = vec![vec![order[0]]];
    for w in order.windows(2) {
        let gap = eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]];
        if gap <= tol_eig {
            groups.last_mut().unwrap().push(w[1]);
        } else if gap < 2.0 * tol_eig {
            return Err(Error::GroupingAmbiguous { gap, tol: tol_eig });
        } else {
            groups.push(vec![w[1]]);
        }
    }

    let mut blocks = Vec::with_capacity(groups.len());
    for group in groups {
        let value = group.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / group.len() as f64;
        let cols: Vec<_> = group
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect();
        let basis = orthonormalize(&CMatrix::from_columns(&cols))?;
        let projector = columns_to_projector(&basis, tol)?;
        blocks.push(EigenBlock { value, basis, projector });
    }
    Ok(Observable { dim, blocks })
}

/// Build an observable directly from eigenvalues and grouped eigenbases.
///
/// The bases must be jointly orthonormal and must cover the whole space;
/// eigenvalues must be pairwise distinct. Blocks are reordered so that
/// eigenvalues ascend.
pub fn make_observable(eigenvalues: &[f64], eigenbases: Vec<Vec<StateVector>>) -> Result<Observable> {
    make_observable_with_tol(eigenvalues, eigenbases, &Tolerances::default())
}

pub fn make_observable_with_tol(
    eigenvalues: &[f64],
    eigenbases: Vec<Vec<StateVector>>,
    tol: &Tolerances,
) -> Result<Observable> {
    if eigenvalues.len() != eigenbases.len() {
        return Err(Error::DimMismatch { left: eigenvalues.len(), right: eigenbases.len() });
    }
    if eigenvalues.is_empty() || eigenbases.iter().any(|b| b.is_empty()) {
        return Err(Error::InvalidArgument("every eigenvalue needs eigenvectors".into()));
    }
    let dim = eigenbases[0][0].dim();
    let count: usize = eigenbases.iter().map(|b| b.len()).sum();
    if count != dim {
        return Err(Error::DimMismatch { left: count, right: dim });
    }
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in eigenvalues.iter().skip(i + 1) {
            if (a - b).abs() <= 2.0 * tol.eig {
                return Err(Error::DuplicateEigenvalue { value: *b });
            }
        }
    }
    // joint orthonormality across all supplied vectors
    let all: Vec<_> = eigenbases
        .iter()
        .flat_map(|b| b.iter().map(|v| v.amplitudes().clone()))
        .collect();
    let joint = CMatrix::from_columns(&all);
    let dev = crate::hilbert::gram_deviation(&joint);
    if dev > tol.norm {
        return Err(Error::NotOrthonormal { max_dev: dev });
    }

    let mut blocks = Vec::with_capacity(eigenvalues.len());
    for (value, basis_vecs) in eigenvalues.iter().zip(eigenbases) {
        let cols: Vec<_> = basis_vecs.iter().map(|v| v.amplitudes().clone()).collect();
        let basis = CMatrix::from_columns(&cols);
        let projector = columns_to_projector(&basis, tol)?;
        blocks.push(EigenBlock { value: *value, basis, projector });
    }
    blocks.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite eigenvalues"));
    Ok(Observable { dim, blocks })
}

pub(crate) fn observable_from_columns(
    eigenvalues: &[f64],
    bases: Vec<CMatrix>,
    tol: &Tolerances,
) -> Result<Observable> {
    let vecs = bases
        .into_iter()
        .map(|m| {
            m.column_iter()
                .map(|c| StateVector::normalized(c.into_owned()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    make_observable_with_tol(eigenvalues, vecs, tol)
}

/// The observable f(A) = Σᵢ f(αᵢ) Pᵢ, with eigenspaces merged wherever f
/// collides on distinct eigenvalues.
pub fn function_of(obs: &Observable, f: impl Fn(f64) -> f64) -> Observable {
    function_of_with_tol(obs, f, &Tolerances::default())
}

pub fn function_of_with_tol(
    obs: &Observable,
    f: impl Fn(f64) -> f64,
    tol: &Tolerances,
) -> Observable {
    let mut mapped: Vec<(f64, usize)> = obs
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (f(b.value), i))
        .collect();
    mapped.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("f must produce finite values"));

    let mut groups: Vec<Vec<(f64, usize)>> = vec![vec![mapped[0]]];
    for w in mapped.windows(2) {
        if w[1].0 - w[0].0 <= tol.eig {
            groups.last_mut().unwrap().push(w[1]);
        } else {
            groups.push(vec![w[1]]);
        }
    }

    let blocks = groups
        .into_iter()
        .map(|group| {
            let value = group.iter().map(|(v, _)| v).sum::<f64>() / group.len() as f64;
            let cols: Vec<_> = group
                .iter()
                .flat_map(|&(_, i)| obs.blocks[i].basis.column_iter().map(|c| c.into_owned()))
                .collect();
            let basis = CMatrix::from_columns(&cols);
            let rank = basis.ncols();
            let projector_mat = &basis * basis.adjoint();
            // blocks of a valid observable are mutually orthogonal, so the
            // concatenated columns stay orthonormal
            let projector = Projector::with_tol(projector_mat, tol)
                .expect("merged eigenprojector stays idempotent");
            debug_assert_eq!(projector.rank(), rank);
            EigenBlock { value, basis, projector }
        })
        .collect();
    Observable { dim: obs.dim, blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::tensor;
    use approx::assert_abs_diff_eq;

    fn cm(dim: usize, entries: &[f64]) -> CMatrix {
        CMatrix::from_iterator(dim, dim, entries.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn diag(entries: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    #[test]
    fn decompose_diagonal_with_degeneracy() {
        let obs = spectral_decompose(&diag(&[1.0, 1.0, 2.0]), 1e-8).unwrap();
        assert_eq!(obs.eigenvalues(), vec![1.0, 2.0]);
        assert_eq!(obs.rank(0), 2);
        assert_eq!(obs.rank(1), 1);
        let p1 = obs.projector(0).matrix();
        assert!(max_abs_diff(p1, &diag(&[1.0, 1.0, 0.0])) < 1e-12);
        obs.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn decompose_z_tensor_i() {
        let z = diag(&[1.0, -1.0]);
        let zi = tensor(&z, &CMatrix::identity(2, 2));
        let obs = spectral_decompose(&zi, 1e-8).unwrap();
        assert_eq!(obs.eigenvalues(), vec![-1.0, 1.0]);
        assert_eq!(obs.rank(0), 2);
        assert_eq!(obs.rank(1), 2);
        assert!(obs.reconstruction_error(&zi) < 1e-12);
    }

    #[test]
    fn decompose_conjugated_spectrum_round_trip() {
        // H = U diag(3,3,5,7) U† for a fixed unitary U
        let mut rng = crate::random::seeded_rng(17);
        let u = crate::random::haar_unitary(4, &mut rng);
        let h = &u * diag(&[3.0, 3.0, 5.0, 7.0]) * u.adjoint();
        let obs = spectral_decompose(&h, 1e-8).unwrap();
        let vals = obs.eigenvalues();
        assert_abs_diff_eq!(vals[0], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(vals[1], 5.0, epsilon = 1e-10);
        assert_abs_diff_eq!(vals[2], 7.0, epsilon = 1e-10);
        assert_eq!(
            obs.blocks().iter().map(|b| b.projector.rank()).collect::<Vec<_>>(),
            vec![2, 1, 1]
        );
        assert!(obs.reconstruction_error(&h) < 1e-9);
        obs.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let m = cm(2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(spectral_decompose(&m, 1e-8), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn decompose_flags_ambiguous_gap() {
        let tol = 1e-4;
        let m = diag(&[0.0, 1.5e-4, 1.0]);
        assert!(matches!(
            spectral_decompose(&m, tol),
            Err(Error::GroupingAmbiguous { .. })
        ));
    }

    #[test]
    fn make_observable_two_level() {
        let obs = make_observable(
            &[0.0, 1.0],
            vec![
                vec![StateVector::basis_state(2, 0)],
                vec![StateVector::basis_state(2, 1)],
            ],
        )
        .unwrap();
        assert!(max_abs_diff(&obs.matrix(), &diag(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn make_observable_parity_blocks() {
        // degenerate parity-like observable on 2 qubits
        let obs = make_observable(
            &[-1.0, 1.0],
            vec![
                vec![StateVector::basis_state(4, 1), StateVector::basis_state(4, 2)],
                vec![StateVector::basis_state(4, 0), StateVector::basis_state(4, 3)],
            ],
        )
        .unwrap();
        assert_eq!(obs.rank(0), 2);
        assert_eq!(obs.rank(1), 2);
        obs.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn make_observable_scalar_operator() {
        let basis = (0..3).map(|k| StateVector::basis_state(3, k)).collect();
        let obs = make_observable(&[5.0], vec![basis]).unwrap();
        assert_eq!(obs.outcome_count(), 1);
        assert_eq!(obs.rank(0), 3);
        assert!(max_abs_diff(&obs.matrix(), &diag(&[5.0, 5.0, 5.0])) < 1e-15);
    }

    #[test]
    fn make_observable_rejects_duplicates_and_bad_bases() {
        let e0 = vec![StateVector::basis_state(2, 0)];
        let e1 = vec![StateVector::basis_state(2, 1)];
        assert!(matches!(
            make_observable(&[1.0, 1.0], vec![e0.clone(), e1.clone()]),
            Err(Error::DuplicateEigenvalue { .. })
        ));
        assert!(matches!(
            make_observable(&[0.0, 1.0], vec![e0.clone(), e0.clone()]),
            Err(Error::NotOrthonormal { .. })
        ));
        // incomplete basis does not cover the space
        assert!(make_observable(&[0.0], vec![e0]).is_err());
    }

    #[test]
    fn function_identity_keeps_observable() {
        let obs = spectral_decompose(&diag(&[1.0, 2.0, 3.0]), 1e-8).unwrap();
        let same = function_of(&obs, |x| x);
        assert_eq!(same.eigenvalues(), obs.eigenvalues());
        assert!(max_abs_diff(&same.matrix(), &obs.matrix()) < 1e-12);
    }

    #[test]
    fn function_monotone_squares_eigenvalues() {
        let obs = spectral_decompose(&diag(&[1.0, 2.0, 3.0]), 1e-8).unwrap();
        let sq = function_of(&obs, |x| x * x);
        assert_eq!(sq.eigenvalues(), vec![1.0, 4.0, 9.0]);
        for i in 0..3 {
            assert!(max_abs_diff(sq.projector(i).matrix(), obs.projector(i).matrix()) < 1e-12);
        }
    }

    #[test]
    fn function_collision_merges_eigenspaces() {
        let obs = spectral_decompose(&diag(&[-1.0, 0.0, 1.0]), 1e-8).unwrap();
        let sq = function_of(&obs, |x| x * x);
        assert_eq!(sq.eigenvalues(), vec![0.0, 1.0]);
        assert_eq!(sq.rank(0), 1);
        assert_eq!(sq.rank(1), 2);
        sq.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn function_composition_matches_composed_function() {
        let mut rng = crate::random::seeded_rng(3);
        let h = crate::random::random_hermitian(5, &mut rng);
        let obs = spectral_decompose(&h, 1e-8).unwrap();
        let f = |x: f64| x.abs();
        let g = |x: f64| x * x;
        let two_step = function_of(&function_of(&obs, f), g);
        let composed = function_of(&obs, |x| g(f(x)));
        assert_eq!(two_step.outcome_count(), composed.outcome_count());
        assert!(max_abs_diff(&two_step.matrix(), &composed.matrix()) < 1e-9);
    }
}
