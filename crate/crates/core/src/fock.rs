//! Truncated single-oscillator ladder operators.
//!
//! The oscillator keeps levels `|0⟩ … |n_max⟩`. Below the top level the
//! truncated operators satisfy `[a, a†] = 1` exactly; the whole defect sits
//! on `|n_max⟩`.

use crate::linalg::{commutator, identity, ComplexMatrix, ComplexVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedOscillator {
    pub n_max: usize,
}

impl TruncatedOscillator {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn annihilation(&self) -> ComplexMatrix {
        annihilation(self.n_max)
    }

    pub fn creation(&self) -> ComplexMatrix {
        creation(self.n_max)
    }

    pub fn number(&self) -> ComplexMatrix {
        number(self.n_max)
    }

    /// `|n⟩`.
    pub fn ket(&self, n: usize) -> ComplexVector {
        let mut v = ComplexVector::zeros(self.dim());
        v[n] = C64::from(1.0);
        v
    }
}

/// `a[n-1, n] = √n` for `1 ≤ n ≤ n_max`.
pub fn annihilation(n_max: usize) -> ComplexMatrix {
    let dim = n_max + 1;
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    a
}

pub fn creation(n_max: usize) -> ComplexMatrix {
    annihilation(n_max).adjoint()
}

/// `diag(0, 1, …, n_max)`.
pub fn number(n_max: usize) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n_max + 1,
        (0..=n_max).map(|n| C64::from(n as f64)),
    ))
}

/// `[a, a†] − 1`; zero except `−(n_max + 1)` at the top level.
pub fn commutator_defect(n_max: usize) -> ComplexMatrix {
    let a = annihilation(n_max);
    commutator(&a, &a.adjoint()) - identity(n_max + 1)
}
