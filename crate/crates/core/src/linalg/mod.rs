//! Dense complex linear algebra.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. The spectral
//! routines assume Hermitian input and are deterministic for fixed input
//! bits: the eigensolver is a Householder tridiagonalisation followed by
//! implicit QR, with no randomised pivoting.

pub mod random;
pub mod space;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LabError, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Hermiticity tolerance, scaled by `max(1, ‖M‖_max)`.
pub const TOL_HERM: f64 = 1e-12;
/// Eigenvalues in `[-TOL_PSD, 0)` are treated as roundoff and clamped.
pub const TOL_PSD: f64 = 1e-10;
/// Below this `|t√x|` the sinc series branch is used.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-4;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LabError::validation("matrix entries must be finite", f64::NAN))
    }
}

/// `max |M - M†|`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    m.is_square() && hermiticity_defect(m) <= TOL_HERM * max_abs(m).max(1.0)
}

fn require_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(LabError::validation(
            format!("matrix must be square, got {}x{}", m.nrows(), m.ncols()),
            (m.nrows() as f64 - m.ncols() as f64).abs(),
        ));
    }
    check_finite(m)?;
    let defect = hermiticity_defect(m);
    if defect > TOL_HERM * max_abs(m).max(1.0) {
        return Err(LabError::validation("matrix must be Hermitian", defect));
    }
    Ok(())
}

/// Eigendecomposition `M = V diag(λ) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fl;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(C64::from)
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    require_hermitian(m)?;
    let n = m.nrows();
    // Symmetrise so both triangles carry identical information.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.eigenvalues)
}

/// `f(M)` for a positive semidefinite `M`. Eigenvalues in `[-TOL_PSD, 0)`
/// are clamped to zero before `f` is applied.
pub fn matrix_function_psd<F: Fn(f64) -> f64>(m: &ComplexMatrix, f: F) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -TOL_PSD {
            return Err(LabError::Positivity {
                eigenvalue: lowest,
                tolerance: TOL_PSD,
            });
        }
    }
    Ok(eig.map(|x| C64::from(f(x.max(0.0)))))
}

/// `sin(t√x)/(t√x)`, equal to 1 at the removable singularity.
pub fn sinc_scaled(x: f64, t: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(LabError::Domain(format!("sinc_scaled needs x >= 0, got {x}")));
    }
    Ok(sinc(t * x.sqrt()))
}

pub(crate) fn sinc(u: f64) -> f64 {
    if u.abs() < SINC_SERIES_THRESHOLD {
        let u2 = u * u;
        1.0 - u2 / 6.0 * (1.0 - u2 / 20.0)
    } else {
        u.sin() / u
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Left-to-right Kronecker product of a sequence; the empty product is `[1]`.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(identity(1), |acc, m| acc.kronecker(m))
}

pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

/// Cached spectral decomposition of a Hermitian generator, for evaluating
/// `e^{-iHt}` at many times.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eig: HermitianEigen,
}

impl SpectralPropagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            eig: hermitian_eig(h)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.eig.eigenvalues.len()
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        self.eig.map(|lambda| C64::from_polar(1.0, -lambda * t))
    }

    /// `e^{-iHt} ψ` without forming the full propagator.
    pub fn apply(&self, t: f64, psi: &ComplexVector) -> ComplexVector {
        let v = &self.eig.eigenvectors;
        let mut coeffs = v.adjoint() * psi;
        for (c, &lambda) in coeffs.iter_mut().zip(&self.eig.eigenvalues) {
            *c *= C64::from_polar(1.0, -lambda * t);
        }
        v * coeffs
    }
}

/// `e^{-iHt}` for Hermitian `H`.
pub fn expm_generator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(SpectralPropagator::new(h)?.at(t))
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, random_matrix, seeded};
    use std::f64::consts::PI;

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            values.len(),
            values.iter().map(|&x| C64::from(x)),
        ))
    }

    #[test]
    fn eig_of_diagonal_is_sorted_permutation() {
        let eig = hermitian_eig(&diag(&[2.0, 0.0, 1.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0, 1.0, 2.0]);
        for c in 0..3 {
            let ones = eig
                .eigenvectors
                .column(c)
                .iter()
                .filter(|z| (z.norm() - 1.0).abs() < 1e-14)
                .count();
            assert_eq!(ones, 1);
        }
        assert!(max_abs_diff(&eig.reconstruct(), &diag(&[2.0, 0.0, 1.0])) < 1e-14);
    }

    #[test]
    fn eig_of_identity() {
        let eig = hermitian_eig(&identity(3)).unwrap();
        for l in eig.eigenvalues {
            assert!((l - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eig_residual_random_hermitian() {
        let mut rng = seeded(11);
        let h = random_hermitian(&mut rng, 8);
        let eig = hermitian_eig(&h).unwrap();
        assert!(max_abs_diff(&eig.reconstruct(), &h) <= 1e-10);
        assert!(unitarity_defect(&eig.eigenvectors) <= 1e-10);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(LabError::Validation { .. })));
        let mut m = identity(2);
        m[(0, 1)] = C64::new(0.5, 0.0);
        match hermitian_eig(&m) {
            Err(LabError::Validation { magnitude, .. }) => assert!((magnitude - 0.5).abs() < 1e-15),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn psd_function_diagonal() {
        let m = diag(&[0.0, 4.0]);
        let f = matrix_function_psd(&m, |x| ((PI / 2.0) * x.sqrt()).cos()).unwrap();
        assert!(max_abs_diff(&f, &diag(&[1.0, -1.0])) < 1e-14);
    }

    #[test]
    fn psd_function_constant_and_identity() {
        let mut rng = seeded(5);
        let a = random_matrix(&mut rng, 4, 6);
        let m = &a * a.adjoint();
        let one = matrix_function_psd(&m, |_| 1.0).unwrap();
        assert!(max_abs_diff(&one, &identity(4)) < 1e-12);
        let same = matrix_function_psd(&m, |x| x).unwrap();
        assert!(max_abs_diff(&same, &m) <= 1e-10);
    }

    #[test]
    fn psd_function_rejects_negative() {
        let m = diag(&[1.0, -1e-6]);
        assert!(matches!(
            matrix_function_psd(&m, |x| x),
            Err(LabError::Positivity { .. })
        ));
        // Roundoff-sized negatives are clamped.
        let m = diag(&[1.0, -1e-12]);
        let r = matrix_function_psd(&m, |x| x.sqrt()).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
    }

    #[test]
    fn sinc_values() {
        assert_eq!(sinc_scaled(0.0, 3.7).unwrap(), 1.0);
        assert!(sinc_scaled(1.0, PI).unwrap().abs() < 1e-15);
        let expected = 0.5f64.sin() / 0.5;
        assert!((sinc_scaled(0.25, 1.0).unwrap() - expected).abs() < 1e-16);
        assert!(matches!(sinc_scaled(-1.0, 1.0), Err(LabError::Domain(_))));
    }

    #[test]
    fn sinc_branches_agree_at_crossover() {
        let u = SINC_SERIES_THRESHOLD;
        let below = sinc(u * (1.0 - 1e-12));
        let direct = u.sin() / u;
        assert!((below - direct).abs() < 1e-14);
    }

    #[test]
    fn kron_identities_and_blocks() {
        assert_eq!(kron(&identity(2), &identity(3)), identity(6));
        let mut rng = seeded(3);
        let m = random_matrix(&mut rng, 2, 2);
        let mut e11 = ComplexMatrix::zeros(2, 2);
        e11[(0, 0)] = ONE;
        let k = kron(&e11, &m);
        assert_eq!(k.view((0, 0), (2, 2)), m.view((0, 0), (2, 2)));
        assert!(max_abs(&k.view((2, 2), (2, 2)).into_owned()) == 0.0);
    }

    #[test]
    fn kron_associative() {
        let mut rng = seeded(17);
        let (a, b, c) = (
            random_matrix(&mut rng, 2, 2),
            random_matrix(&mut rng, 2, 2),
            random_matrix(&mut rng, 2, 2),
        );
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        assert!(max_abs_diff(&left, &right) <= 1e-12);
        assert_eq!(kron_all([&a, &b, &c]), left);
    }

    #[test]
    fn expm_trivial_cases() {
        let u = expm_generator(&ComplexMatrix::zeros(3, 3), 1.3).unwrap();
        assert!(max_abs_diff(&u, &identity(3)) < 1e-15);
        let u = expm_generator(&diag(&[1.0, -1.0]), PI).unwrap();
        assert!(max_abs_diff(&u, &(-identity(2))) < 1e-15);
    }

    #[test]
    fn expm_unitary_and_rejects_non_hermitian() {
        let mut rng = seeded(23);
        let h = random_hermitian(&mut rng, 6);
        let u = expm_generator(&h, 0.7).unwrap();
        assert!(unitarity_defect(&u) <= 1e-10);
        let a = random_matrix(&mut rng, 3, 3);
        assert!(expm_generator(&a, 0.7).is_err());
    }

    #[test]
    fn propagator_apply_matches_matrix() {
        let mut rng = seeded(29);
        let h = random_hermitian(&mut rng, 5);
        let psi = random_matrix(&mut rng, 5, 1).column(0).into_owned();
        let prop = SpectralPropagator::new(&h).unwrap();
        let direct = prop.at(0.4) * &psi;
        let applied = prop.apply(0.4, &psi);
        assert!((direct - applied).camax() < 1e-13);
    }
}
