//! Seeded random generation of states, unitaries and observables.
//!
//! Everything here is deterministic given a seed, so sweeps and reports are
//! reproducible run to run.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::hilbert::{CMatrix, CVector, DensityOperator, StateVector};
use crate::spectral::{observable_from_columns, Observable};
use crate::tol::Tolerances;

/// Deterministic RNG from a seed; all randomized paths go through this.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix (seed, a, b) into an independent stream seed.
///
/// Used to give each oracle call its own random stream derived from
/// (seed, block index, call index), so concurrent evaluation order cannot
/// change results.
pub fn derive_stream(seed: u64, a: u64, b: u64) -> u64 {
    // splitmix64 steps over the three words
    let mut z = seed;
    for w in [a.wrapping_add(0x9e37_79b9_7f4a_7c15), b.wrapping_add(0x2545_f491_4f6c_dd1d)] {
        z = z.wrapping_add(w);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random pure state of the given dimension.
pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> StateVector {
    let v = CVector::from_iterator(dim, (0..dim).map(|_| gaussian_complex(rng)));
    StateVector::normalized(v).expect("Gaussian vector is nonzero almost surely")
}

/// Complex Ginibre matrix with iid standard-normal entries.
fn ginibre<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_iterator(dim, dim, (0..dim * dim).map(|_| gaussian_complex(rng)))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, rng).qr();
    let r_diag: Vec<Complex64> = (0..dim).map(|k| qr.r()[(k, k)]).collect();
    let mut q = qr.q();
    for (k, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Random Hermitian matrix (GUE-style, unnormalized).
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random full-rank density operator, GG†/Tr(GG†).
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(dim, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityOperator::new(w / Complex64::new(tr, 0.0)).expect("Wishart matrix is PSD with unit trace")
}

/// Random observable with the given eigenspace ranks and a Haar-random
/// joint eigenbasis. Eigenvalues are planted at i + U(−0.25, 0.25), which
/// keeps them separated by at least 0.5.
pub fn random_observable<R: Rng>(dim: usize, ranks: &[usize], rng: &mut R) -> Result<Observable> {
    assert_eq!(ranks.iter().sum::<usize>(), dim, "ranks must partition the dimension");
    let u = haar_unitary(dim, rng);
    let mut bases = Vec::with_capacity(ranks.len());
    let mut values = Vec::with_capacity(ranks.len());
    let mut offset = 0;
    for (i, &r) in ranks.iter().enumerate() {
        let cols: Vec<DVector<Complex64>> =
            (offset..offset + r).map(|k| u.column(k).into_owned()).collect();
        bases.push(CMatrix::from_columns(&cols));
        values.push(i as f64 + rng.gen_range(-0.25..0.25));
        offset += r;
    }
    observable_from_columns(&values, bases, &Tolerances::default())
}

/// Haar-random rotation of each eigenspace basis of an observable,
/// suitable for `build_refinement`.
pub fn random_refinement_bases<R: Rng>(obs: &Observable, rng: &mut R) -> Vec<CMatrix> {
    (0..obs.outcome_count())
        .map(|i| {
            let rank = obs.rank(i);
            obs.basis(i) * haar_unitary(rank, rng)
        })
        .collect()
}

/// Random partition of `dim` into parts of size at most `max_rank`.
pub fn random_ranks<R: Rng>(dim: usize, max_rank: usize, rng: &mut R) -> Vec<usize> {
    let mut ranks = Vec::new();
    let mut left = dim;
    while left > 0 {
        let r = rng.gen_range(1..=max_rank.min(left));
        ranks.push(r);
        left -= r;
    }
    ranks
}
