//! Labelled tensor-product spaces, states and density matrices.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{
    hermitian_eigenvalues, hermiticity_defect, kron, kron_vec, max_abs, ComplexMatrix,
    ComplexVector, C64, TOL_HERM, TOL_PSD,
};
use crate::error::{LabError, Result};

/// Tolerance on `|ψ| = 1` for normalized states and on `tr ρ = 1`.
pub const TOL_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factors. Flat indices are row-major: the last factor varies
/// fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertFactorization {
    factors: Vec<Factor>,
}

impl HilbertFactorization {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        let mut seen = HashSet::new();
        for f in &factors {
            if f.dim == 0 {
                return Err(LabError::Label(format!("factor '{}' has dimension 0", f.label)));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(LabError::Label(format!("duplicate factor label '{}'", f.label)));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| LabError::Label(format!("no factor labelled '{label}'")))
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &HilbertFactorization) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .chain(&other.factors)
                .map(|f| (f.label.clone(), f.dim)),
        )
    }

    /// Reordered factorization: position `j` of the result holds factor
    /// `order[j]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        check_order(order, self.len())?;
        Ok(Self {
            factors: order.iter().map(|&i| self.factors[i].clone()).collect(),
        })
    }

    /// Embeds a single-factor operator at `label`, identity elsewhere.
    pub fn embed(&self, label: &str, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        let at = self.index_of(label)?;
        if op.nrows() != self.factors[at].dim || op.ncols() != self.factors[at].dim {
            return Err(LabError::Dimension {
                expected: self.factors[at].dim,
                found: op.nrows(),
            });
        }
        let before: usize = self.factors[..at].iter().map(|f| f.dim).product();
        let after: usize = self.factors[at + 1..].iter().map(|f| f.dim).product();
        Ok(kron(&kron(&super::identity(before), op), &super::identity(after)))
    }
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(LabError::Label(format!(
            "permutation of length {} for {n} factors",
            order.len()
        )));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(LabError::Label(format!("invalid factor permutation {order:?}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// For each flat index of the permuted space, the flat index it came from.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let mut old_strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let old: usize = (0..n).map(|j| digits[j] * old_strides[order[j]]).sum();
        map.push(old);
        for j in (0..n).rev() {
            digits[j] += 1;
            if digits[j] < new_dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    map
}

/// Reorders the tensor factors of an operator.
pub fn permute_operator(
    m: &ComplexMatrix,
    factorization: &HilbertFactorization,
    order: &[usize],
) -> Result<(ComplexMatrix, HilbertFactorization)> {
    let target = factorization.permuted(order)?;
    let d = factorization.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(LabError::Dimension {
            expected: d,
            found: m.nrows(),
        });
    }
    let map = permutation_map(&factorization.dims(), order);
    Ok((ComplexMatrix::from_fn(d, d, |r, c| m[(map[r], map[c])]), target))
}

pub fn permute_vector(
    v: &ComplexVector,
    factorization: &HilbertFactorization,
    order: &[usize],
) -> Result<(ComplexVector, HilbertFactorization)> {
    let target = factorization.permuted(order)?;
    if v.len() != factorization.dim() {
        return Err(LabError::Dimension {
            expected: factorization.dim(),
            found: v.len(),
        });
    }
    let map = permutation_map(&factorization.dims(), order);
    Ok((ComplexVector::from_fn(v.len(), |r, _| v[map[r]]), target))
}

/// A pure state on a labelled space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: ComplexVector,
    factorization: HilbertFactorization,
}

impl StateVector {
    pub fn new(amplitudes: ComplexVector, factorization: HilbertFactorization) -> Result<Self> {
        if amplitudes.len() != factorization.dim() {
            return Err(LabError::Dimension {
                expected: factorization.dim(),
                found: amplitudes.len(),
            });
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LabError::validation("state amplitudes must be finite", f64::NAN));
        }
        Ok(Self {
            amplitudes,
            factorization,
        })
    }

    /// Basis ket with a single unit amplitude.
    pub fn basis(index: usize, factorization: HilbertFactorization) -> Result<Self> {
        let d = factorization.dim();
        if index >= d {
            return Err(LabError::Dimension {
                expected: d,
                found: index,
            });
        }
        let mut v = ComplexVector::zeros(d);
        v[index] = C64::from(1.0);
        Self::new(v, factorization)
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn factorization(&self) -> &HilbertFactorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= TOL_NORM
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(LabError::Domain("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(n),
            factorization: self.factorization.clone(),
        })
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        Self::new(
            kron_vec(&self.amplitudes, &other.amplitudes),
            self.factorization.tensor(&other.factorization)?,
        )
    }

    pub fn apply(&self, op: &ComplexMatrix) -> Result<Self> {
        if op.ncols() != self.dim() || op.nrows() != self.dim() {
            return Err(LabError::Dimension {
                expected: self.dim(),
                found: op.ncols(),
            });
        }
        Self::new(op * &self.amplitudes, self.factorization.clone())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }

    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let (amplitudes, factorization) =
            permute_vector(&self.amplitudes, &self.factorization, order)?;
        Ok(Self {
            amplitudes,
            factorization,
        })
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        if !self.is_normalized() {
            return Err(LabError::validation(
                "density of an unnormalized state",
                (self.norm() - 1.0).abs(),
            ));
        }
        DensityMatrix::new(
            &self.amplitudes * self.amplitudes.adjoint(),
            self.factorization.clone(),
        )
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on a labelled space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    factorization: HilbertFactorization,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, factorization: HilbertFactorization) -> Result<Self> {
        let d = factorization.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(LabError::Dimension {
                expected: d,
                found: matrix.nrows(),
            });
        }
        super::check_finite(&matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > TOL_HERM * max_abs(&matrix).max(1.0) {
            return Err(LabError::validation("density matrix must be Hermitian", defect));
        }
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TOL_NORM {
            return Err(LabError::validation("density matrix trace must be 1", (trace - 1.0).abs()));
        }
        let lowest = hermitian_eigenvalues(&matrix)?[0];
        if lowest < -TOL_PSD {
            return Err(LabError::Positivity {
                eigenvalue: lowest,
                tolerance: TOL_PSD,
            });
        }
        Ok(Self {
            matrix,
            factorization,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn factorization(&self) -> &HilbertFactorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Self::new(
            kron(&self.matrix, &other.matrix),
            self.factorization.tensor(&other.factorization)?,
        )
    }

    /// Eigenvalues with roundoff negatives clamped to zero, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
            .expect("validated density matrix is Hermitian")
            .into_iter()
            .map(|x| x.max(0.0))
            .collect()
    }

    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let (matrix, factorization) = permute_operator(&self.matrix, &self.factorization, order)?;
        Ok(Self {
            matrix,
            factorization,
        })
    }

    /// Convex combination `p·self + (1−p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self> {
        if self.factorization != other.factorization {
            return Err(LabError::Label("mixing density matrices on different spaces".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(LabError::Domain(format!("mixing weight {p} outside [0, 1]")));
        }
        Self::new(
            self.matrix.scale(p) + other.matrix.scale(1.0 - p),
            self.factorization.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_matrix, seeded};
    use crate::linalg::{max_abs_diff, ONE};

    fn fact(dims: &[usize]) -> HilbertFactorization {
        HilbertFactorization::new(dims.iter().enumerate().map(|(i, &d)| (format!("f{i}"), d)))
            .unwrap()
    }

    #[test]
    fn factorization_rejects_duplicates_and_zero_dims() {
        assert!(HilbertFactorization::new([("a", 2), ("a", 3)]).is_err());
        assert!(HilbertFactorization::new([("a", 0)]).is_err());
        let f = HilbertFactorization::new([("a", 2), ("b", 3)]).unwrap();
        assert_eq!(f.dim(), 6);
        assert_eq!(f.index_of("b").unwrap(), 1);
        assert!(f.index_of("c").is_err());
    }

    #[test]
    fn permute_swaps_kron_factors() {
        let mut rng = seeded(1);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let c = random_matrix(&mut rng, 2, 2);
        let f = fact(&[2, 3, 2]);
        let abc = kron(&kron(&a, &b), &c);
        let (perm, pf) = permute_operator(&abc, &f, &[2, 0, 1]).unwrap();
        assert_eq!(pf.dims(), vec![2, 2, 3]);
        assert!(max_abs_diff(&perm, &kron(&kron(&c, &a), &b)) < 1e-13);
    }

    #[test]
    fn permute_vector_matches_kron() {
        let mut rng = seeded(2);
        let u = random_matrix(&mut rng, 2, 1).column(0).into_owned();
        let v = random_matrix(&mut rng, 3, 1).column(0).into_owned();
        let (p, _) = permute_vector(&kron_vec(&u, &v), &fact(&[2, 3]), &[1, 0]).unwrap();
        assert!((p - kron_vec(&v, &u)).camax() < 1e-15);
    }

    #[test]
    fn embed_places_operator() {
        let f = fact(&[2, 3]);
        let mut x = ComplexMatrix::zeros(3, 3);
        x[(0, 1)] = ONE;
        let e = f.embed("f1", &x).unwrap();
        assert_eq!(e, kron(&super::super::identity(2), &x));
    }

    #[test]
    fn density_validation() {
        let f = fact(&[2]);
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = C64::from(0.5);
        assert!(matches!(
            DensityMatrix::new(m.clone(), f.clone()),
            Err(LabError::Validation { .. })
        ));
        m[(1, 1)] = C64::from(0.5);
        assert!(DensityMatrix::new(m.clone(), f.clone()).is_ok());
        m[(0, 0)] = C64::from(1.5);
        m[(1, 1)] = C64::from(-0.5);
        assert!(matches!(
            DensityMatrix::new(m, f),
            Err(LabError::Positivity { .. })
        ));
    }

    #[test]
    fn state_density_requires_normalization() {
        let f = fact(&[2]);
        let v = ComplexVector::from_vec(vec![ONE, ONE]);
        let s = StateVector::new(v, f).unwrap();
        assert!(s.density().is_err());
        let d = s.normalized().unwrap().density().unwrap();
        assert!((d.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);
    }
}
