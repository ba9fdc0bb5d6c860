//! Seeded random matrices for oracle checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, C64};

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Entries i.i.d. complex Gaussian with unit variance per component.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

/// Haar-ish unitary from the Q factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n);
    a.qr().q()
}

/// A random density matrix `G G† / tr(G G†)` of the given rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace();
    m.map(|z| z / tr)
}
