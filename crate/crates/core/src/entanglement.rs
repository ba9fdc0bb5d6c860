//! Bipartite entanglement and distance measures.
//!
//! Entropies are in nats. All measures take an explicit [`Bipartition`]
//! of a labelled factorization; nothing here guesses which subsystems a
//! state "really" has.

use serde::{Deserialize, Serialize};

use crate::dynamics::AtomicDensity;
use crate::error::{LabError, Result};
use crate::linalg::space::{DensityMatrix, HilbertFactorization, StateVector};
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, ComplexMatrix, C64};

/// Density-matrix eigenvalues at or below this are treated as exact zeros
/// when forming `√ρ` for the concurrence. Roundoff in a rank-deficient `ρ`
/// otherwise feeds `O(√ε)` into the spin-flip singular values.
pub const CONCURRENCE_RANK_TOL: f64 = 1e-14;

/// Factors to keep; everything else is traced out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub keep: Vec<String>,
}

/// Factor positions of a bipartition resolved against a factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedBipartition {
    pub keep: Vec<usize>,
    pub discard: Vec<usize>,
}

impl ResolvedBipartition {
    /// Kept factors first, each side in original order.
    pub fn order(&self) -> Vec<usize> {
        self.keep.iter().chain(&self.discard).copied().collect()
    }
}

impl Bipartition {
    pub fn keep(labels: &[&str]) -> Self {
        Self {
            keep: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn resolve(&self, factorization: &HilbertFactorization) -> Result<ResolvedBipartition> {
        if self.keep.is_empty() {
            return Err(LabError::Label("bipartition must keep at least one factor".into()));
        }
        let mut keep = Vec::with_capacity(self.keep.len());
        for label in &self.keep {
            let i = factorization.index_of(label)?;
            if keep.contains(&i) {
                return Err(LabError::Label(format!("factor '{label}' listed twice")));
            }
            keep.push(i);
        }
        keep.sort_unstable();
        let discard = (0..factorization.len()).filter(|i| !keep.contains(i)).collect();
        Ok(ResolvedBipartition { keep, discard })
    }
}

fn side_dims(factorization: &HilbertFactorization, r: &ResolvedBipartition) -> (usize, usize) {
    let dims = factorization.dims();
    (
        r.keep.iter().map(|&i| dims[i]).product(),
        r.discard.iter().map(|&i| dims[i]).product(),
    )
}

/// `tr_discard ρ`, on the kept factors in their original order.
pub fn partial_trace(rho: &DensityMatrix, bipartition: &Bipartition) -> Result<DensityMatrix> {
    let resolved = bipartition.resolve(rho.factorization())?;
    let (dk, dd) = side_dims(rho.factorization(), &resolved);
    let permuted = rho.permuted(&resolved.order())?;
    let m = permuted.matrix();
    let reduced = ComplexMatrix::from_fn(dk, dk, |a, b| {
        (0..dd).map(|e| m[(a * dd + e, b * dd + e)]).sum::<C64>()
    });
    let labels = resolved
        .keep
        .iter()
        .map(|&i| rho.factorization().factors()[i].clone());
    let factorization = HilbertFactorization::new(labels.map(|f| (f.label, f.dim)))?;
    DensityMatrix::new(reduced, factorization)
}

/// Amplitude matrix `Ψ[kept, discarded]` of a bipartite pure state.
fn amplitude_matrix(psi: &StateVector, resolved: &ResolvedBipartition) -> Result<ComplexMatrix> {
    let (dk, dd) = side_dims(psi.factorization(), resolved);
    let permuted = psi.permuted(&resolved.order())?;
    let v = permuted.amplitudes();
    Ok(ComplexMatrix::from_fn(dk, dd, |a, e| v[a * dd + e]))
}

fn sorted_singular_values(m: ComplexMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Schmidt coefficients, nonincreasing; `min(d_keep, d_discard)` of them.
pub fn schmidt_coefficients(psi: &StateVector, bipartition: &Bipartition) -> Result<Vec<f64>> {
    if !psi.is_normalized() {
        return Err(LabError::validation(
            "Schmidt decomposition needs a normalized state",
            (psi.norm() - 1.0).abs(),
        ));
    }
    let resolved = bipartition.resolve(psi.factorization())?;
    if resolved.discard.is_empty() {
        return Ok(vec![1.0]);
    }
    Ok(sorted_singular_values(amplitude_matrix(psi, &resolved)?))
}

fn entropy_of(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// `−Σ p ln p` over the clamped spectrum.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.spectrum())
}

/// Entropy of the kept marginal of a pure state.
pub fn entanglement_entropy(psi: &StateVector, bipartition: &Bipartition) -> Result<f64> {
    Ok(von_neumann_entropy(&partial_trace(&psi.density()?, bipartition)?))
}

/// `σ_y ⊗ σ_y` in the two-qubit basis.
fn spin_flip() -> ComplexMatrix {
    let mut y = ComplexMatrix::zeros(4, 4);
    y[(0, 3)] = C64::from(-1.0);
    y[(1, 2)] = C64::from(1.0);
    y[(2, 1)] = C64::from(1.0);
    y[(3, 0)] = C64::from(-1.0);
    y
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The `λᵢ` are the square roots of the eigenvalues of `ρ ρ̃` with
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`, obtained here as the singular values of
/// `√ρ (σ_y⊗σ_y) √ρ*`.
pub fn concurrence(rho: &AtomicDensity) -> f64 {
    let eig = hermitian_eig(rho.matrix()).expect("validated density matrix is Hermitian");
    let sqrt_rho = eig.map(|p| {
        if p <= CONCURRENCE_RANK_TOL {
            C64::from(0.0)
        } else {
            C64::from(p.sqrt())
        }
    });
    let b = &sqrt_rho * spin_flip() * sqrt_rho.map(|z| z.conj());
    let lambda = sorted_singular_values(b);
    (lambda[0] - lambda[1..].iter().sum::<f64>()).clamp(0.0, 1.0)
}

/// `½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(LabError::Dimension {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Operator-Schmidt coefficients of `U` across a bipartition, normalized so
/// their squares sum to one. A product operator `A ⊗ B` has exactly one
/// nonzero coefficient.
pub fn operator_schmidt_coefficients(
    u: &ComplexMatrix,
    factorization: &HilbertFactorization,
    bipartition: &Bipartition,
) -> Result<Vec<f64>> {
    let resolved = bipartition.resolve(factorization)?;
    let (dk, dd) = side_dims(factorization, &resolved);
    let (p, _) = crate::linalg::space::permute_operator(u, factorization, &resolved.order())?;
    // Realign U[(a,e),(b,f)] into R[(a,b),(e,f)].
    let realigned = ComplexMatrix::from_fn(dk * dk, dd * dd, |ab, ef| {
        let (a, b) = (ab / dk, ab % dk);
        let (e, f) = (ef / dd, ef % dd);
        p[(a * dd + e, b * dd + f)]
    });
    let frob = p.norm();
    if frob == 0.0 {
        return Err(LabError::Domain("operator is zero".into()));
    }
    Ok(sorted_singular_values(realigned)
        .into_iter()
        .map(|s| s / frob)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rho_atoms_irreducible;
    use crate::linalg::random::{random_density, random_unitary, seeded};
    use crate::linalg::{kron, max_abs_diff, ComplexVector};
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn two_qubits() -> HilbertFactorization {
        HilbertFactorization::new([("A", 2), ("B", 2)]).unwrap()
    }

    fn state(amps: &[f64]) -> StateVector {
        StateVector::new(
            ComplexVector::from_iterator(amps.len(), amps.iter().map(|&x| C64::from(x))),
            two_qubits(),
        )
        .unwrap()
    }

    #[test]
    fn bipartition_validation() {
        let f = two_qubits();
        assert!(Bipartition::keep(&[]).resolve(&f).is_err());
        assert!(Bipartition::keep(&["C"]).resolve(&f).is_err());
        assert!(Bipartition::keep(&["A", "A"]).resolve(&f).is_err());
        let r = Bipartition::keep(&["B"]).resolve(&f).unwrap();
        assert_eq!((r.keep, r.discard), (vec![1], vec![0]));
    }

    #[test]
    fn product_state_marginal() {
        let mut rng = seeded(7);
        let a = DensityMatrix::new(random_density(&mut rng, 2, 2), HilbertFactorization::single("A", 2).unwrap()).unwrap();
        let b = DensityMatrix::new(random_density(&mut rng, 3, 2), HilbertFactorization::single("B", 3).unwrap()).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ra = partial_trace(&ab, &Bipartition::keep(&["A"])).unwrap();
        assert!(max_abs_diff(ra.matrix(), a.matrix()) <= 1e-12);
        let rb = partial_trace(&ab, &Bipartition::keep(&["B"])).unwrap();
        assert!(max_abs_diff(rb.matrix(), b.matrix()) <= 1e-12);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = FRAC_1_SQRT_2;
        let bell = state(&[s, 0.0, 0.0, s]);
        let ra = partial_trace(&bell.density().unwrap(), &Bipartition::keep(&["A"])).unwrap();
        assert!(max_abs_diff(ra.matrix(), &crate::linalg::identity(2).scale(0.5)) <= 1e-12);
        assert!((von_neumann_entropy(&ra) - LN_2).abs() <= 1e-12);
    }

    #[test]
    fn schmidt_cases() {
        let s = FRAC_1_SQRT_2;
        let w = state(&[0.0, s, s, 0.0]);
        let c = schmidt_coefficients(&w, &Bipartition::keep(&["A"])).unwrap();
        assert!((c[0] - s).abs() < 1e-15 && (c[1] - s).abs() < 1e-15);
        let p = state(&[0.6, 0.8, 0.0, 0.0]);
        let c = schmidt_coefficients(&p, &Bipartition::keep(&["A"])).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && c[1] < 1e-15);
        let unnorm = state(&[1.0, 1.0, 0.0, 0.0]);
        assert!(schmidt_coefficients(&unnorm, &Bipartition::keep(&["A"])).is_err());
    }

    #[test]
    fn entropy_pure_and_mixed() {
        let p = state(&[0.6, 0.8, 0.0, 0.0]);
        assert!(von_neumann_entropy(&p.density().unwrap()).abs() <= 1e-12);
        let s = FRAC_1_SQRT_2;
        let w = state(&[0.0, s, s, 0.0]);
        assert!((entanglement_entropy(&w, &Bipartition::keep(&["B"])).unwrap() - LN_2).abs() <= 1e-12);
    }

    #[test]
    fn concurrence_cases() {
        let bell = rho_atoms_irreducible(std::f64::consts::FRAC_PI_2);
        assert!((concurrence(&bell) - 1.0).abs() <= 1e-10);
        let ground = rho_atoms_irreducible(0.0);
        assert_eq!(concurrence(&ground), 0.0);
        for &t in &[0.1, 0.4, 0.8, 1.1, 1.4, 2.0, 3.0] {
            let c = concurrence(&rho_atoms_irreducible(t));
            assert!((c - t.sin().powi(2)).abs() <= 1e-8, "t = {t}: {c}");
        }
        let mixed = AtomicDensity::new(crate::linalg::identity(4).scale(0.25)).unwrap();
        assert_eq!(concurrence(&mixed), 0.0);
    }

    #[test]
    fn trace_distance_cases() {
        let a = state(&[1.0, 0.0, 0.0, 0.0]).density().unwrap();
        let b = state(&[0.0, 1.0, 0.0, 0.0]).density().unwrap();
        assert!(trace_distance(&a, &a).unwrap().abs() < 1e-15);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        let c = DensityMatrix::new(crate::linalg::identity(2).scale(0.5), HilbertFactorization::single("x", 2).unwrap()).unwrap();
        assert!(trace_distance(&a, &c).is_err());
    }

    #[test]
    fn operator_schmidt_product_and_entangling() {
        let mut rng = seeded(9);
        let f = two_qubits();
        let u = kron(&random_unitary(&mut rng, 2), &random_unitary(&mut rng, 2));
        let c = operator_schmidt_coefficients(&u, &f, &Bipartition::keep(&["A"])).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1] < 1e-12);
        // SWAP has four equal operator-Schmidt coefficients.
        let mut swap = ComplexMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = C64::from(1.0);
        }
        let c = operator_schmidt_coefficients(&swap, &f, &Bipartition::keep(&["A"])).unwrap();
        for x in c {
            assert!((x - 0.5).abs() < 1e-12);
        }
    }
}
