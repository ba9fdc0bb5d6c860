//! Jaynes–Cummings dynamics of two atoms coupled to two field modes.
//!
//! Atomic basis: index 0 is the excited state `|+⟩`, index 1 the ground
//! state `|−⟩`, and `R = |−⟩⟨+|`. Two-atom operators act on
//! `atom1 ⊗ atom2`, whose basis order is `|++⟩, |+−⟩, |−+⟩, |−−⟩`.
//! Coupling constant and ħ are 1.

use std::ops::Deref;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::linalg::space::{DensityMatrix, HilbertFactorization, StateVector};
use crate::linalg::{
    commutator, identity, kron, kron_vec, matrix_function_psd, max_abs, sinc, ComplexMatrix, ComplexVector,
    SpectralPropagator, C64, I, ONE,
};
use crate::representations::RepresentationInstance;
use crate::weights::{CompensatedSum, JointWeights, SUM_SLACK};

pub const EXCITED: usize = 0;
pub const GROUND: usize = 1;

/// Flat indices in the two-atom basis.
pub const PP: usize = 0;
pub const PM: usize = 1;
pub const MP: usize = 2;
pub const MM: usize = 3;

/// Largest `N` accepted by the closed-form reducible density matrix.
pub const MAX_OSCILLATORS: u64 = 1_000_000;

/// Weights below this fraction of the row maximum are dropped from the
/// double sum over `(s, s')`.
const WEIGHT_CUTOFF: f64 = 1e-30;

/// Atomic lowering operator `R`, with `R|+⟩ = |−⟩`.
pub fn atomic_lowering() -> ComplexMatrix {
    let mut r = ComplexMatrix::zeros(2, 2);
    r[(GROUND, EXCITED)] = ONE;
    r
}

pub fn atomic_ket(excited: bool) -> ComplexVector {
    let mut v = ComplexVector::zeros(2);
    v[if excited { EXCITED } else { GROUND }] = ONE;
    v
}

pub fn atoms_factorization() -> HilbertFactorization {
    HilbertFactorization::new([("atom1", 2), ("atom2", 2)]).expect("static labels")
}

/// `atom1 ⊗ atom2 ⊗ field`.
pub fn full_factorization(rep: &RepresentationInstance) -> Result<HilbertFactorization> {
    atoms_factorization().tensor(rep.factorization())
}

/// `R_k` on the two-atom space: `R ⊗ 1` for atom 1, `1 ⊗ R` for atom 2.
fn atom_lowering_on_pair(atom: usize) -> Result<ComplexMatrix> {
    let r = atomic_lowering();
    match atom {
        1 => Ok(kron(&r, &identity(2))),
        2 => Ok(kron(&identity(2), &r)),
        other => Err(LabError::Config(format!("atom index {other} not in {{1, 2}}"))),
    }
}

/// Two-atom density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDensity(DensityMatrix);

impl AtomicDensity {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Ok(Self(DensityMatrix::new(matrix, atoms_factorization())?))
    }

    pub fn from_density(rho: DensityMatrix) -> Result<Self> {
        if rho.factorization().dims() != [2, 2] {
            return Err(LabError::Dimension {
                expected: 4,
                found: rho.dim(),
            });
        }
        Self::new(rho.matrix().clone())
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0.matrix()[(row, col)]
    }

    /// `⟨+−|ρ|−+⟩`.
    pub fn coherence(&self) -> C64 {
        self.entry(PM, MP)
    }
}

impl Deref for AtomicDensity {
    type Target = DensityMatrix;

    fn deref(&self) -> &DensityMatrix {
        &self.0
    }
}

/// `e^{−iHt}` for `H = R† ⊗ A + R ⊗ A†` in closed form:
///
/// ```text
/// R†R ⊗ cos(t√(AA†)) + RR† ⊗ cos(t√(A†A))
///   − it R† ⊗ sinc(t√(AA†)) A − it R ⊗ sinc(t√(A†A)) A†
/// ```
///
/// The result acts on `atom ⊗ space(A)`.
pub fn closed_form_evolution(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    closed_form_evolution_signed(a, t, 1.0)
}

/// Closed form with the sign of the off-diagonal blocks scaled by
/// `off_diagonal_sign`; only `1.0` gives the true propagator. Exists so that
/// validation can demonstrate that a sign error is caught.
#[doc(hidden)]
pub fn closed_form_evolution_signed(
    a: &ComplexMatrix,
    t: f64,
    off_diagonal_sign: f64,
) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(LabError::validation(
            "closed-form propagator needs square A",
            (a.nrows() as f64 - a.ncols() as f64).abs(),
        ));
    }
    crate::linalg::check_finite(a)?;
    let ad = a.adjoint();
    let aad = a * &ad;
    let ada = &ad * a;
    let cos_aad = matrix_function_psd(&aad, |x| (t * x.sqrt()).cos())?;
    let cos_ada = matrix_function_psd(&ada, |x| (t * x.sqrt()).cos())?;
    let sinc_aad = matrix_function_psd(&aad, |x| sinc(t * x.sqrt()))?;
    let sinc_ada = matrix_function_psd(&ada, |x| sinc(t * x.sqrt()))?;

    let r = atomic_lowering();
    let rd = r.adjoint();
    let coeff = -I * t * off_diagonal_sign;
    Ok(kron(&(&rd * &r), &cos_aad)
        + kron(&(&r * &rd), &cos_ada)
        + kron(&rd, &(sinc_aad * a)) * coeff
        + kron(&r, &(sinc_ada * ad)) * coeff)
}

/// `H = R† ⊗ A + R ⊗ A†` on `atom ⊗ space(A)`.
pub fn two_block_generator(a: &ComplexMatrix) -> ComplexMatrix {
    let r = atomic_lowering();
    kron(&r.adjoint(), a) + kron(&r, &a.adjoint())
}

/// `H_k = R_k† ⊗ i a_k − R_k ⊗ i a_k†` for one atom–mode pair, on the full
/// `atom1 ⊗ atom2 ⊗ field` space.
pub fn jc_term(rep: &RepresentationInstance, mode: &str, atom: usize) -> Result<ComplexMatrix> {
    let r = atom_lowering_on_pair(atom)?;
    let a = &rep.mode(mode)?.annihilation;
    Ok(kron(&r.adjoint(), &(a * I)) - kron(&r, &(a.adjoint() * I)))
}

/// `H = Σ_k H_k`, each atom coupled to exactly one mode.
pub fn jc_hamiltonian(
    rep: &RepresentationInstance,
    mode_atom_pairs: &[(&str, usize)],
) -> Result<ComplexMatrix> {
    let mut atoms_seen = Vec::new();
    let dim = 4 * rep.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for &(mode, atom) in mode_atom_pairs {
        if atoms_seen.contains(&atom) {
            return Err(LabError::Config(format!("atom {atom} coupled to more than one mode")));
        }
        atoms_seen.push(atom);
        h += jc_term(rep, mode, atom)?;
    }
    Ok(h)
}

/// Atomic excitations plus photon number on `atom1 ⊗ atom2 ⊗ field`.
pub fn excitation_number(rep: &RepresentationInstance) -> ComplexMatrix {
    let r = atomic_lowering();
    let excited = r.adjoint() * &r;
    let atoms = kron(&excited, &identity(2)) + kron(&identity(2), &excited);
    kron(&atoms, &identity(rep.dim())) + kron(&identity(4), rep.photon_number())
}

/// `‖[H, N_exc]‖_max`.
pub fn excitation_conservation_defect(rep: &RepresentationInstance, h: &ComplexMatrix) -> f64 {
    max_abs(&commutator(h, &excitation_number(rep)))
}

/// Normalized `|−⟩|−⟩ ⊗ (Σ_k a_k†)|0⟩` over the listed modes.
pub fn ground_atoms_with_photon(
    rep: &RepresentationInstance,
    modes: &[&str],
) -> Result<StateVector> {
    let c = C64::from(1.0 / (modes.len() as f64).sqrt());
    let coeffs: Vec<(&str, C64)> = modes.iter().map(|&m| (m, c)).collect();
    let photon = rep.create_on_vacuum(&coeffs)?.normalized()?;
    let atoms = StateVector::new(
        kron_vec(&atomic_ket(false), &atomic_ket(false)),
        atoms_factorization(),
    )?;
    atoms.tensor(&photon)
}

fn effective_generator(rep: &RepresentationInstance, h: &ComplexMatrix, renormalize: bool) -> ComplexMatrix {
    if renormalize {
        h.unscale(rep.renormalization_constant().sqrt())
    } else {
        h.clone()
    }
}

/// `e^{−iH_eff t} ψ₀` with `H_eff = H/√Z` when `renormalize` is set.
pub fn evolve(
    rep: &RepresentationInstance,
    h: &ComplexMatrix,
    psi0: &StateVector,
    t: f64,
    renormalize: bool,
) -> Result<StateVector> {
    Ok(evolve_grid(rep, h, psi0, &[t], renormalize)?.remove(0))
}

/// [`evolve`] at several times, sharing one eigendecomposition.
pub fn evolve_grid(
    rep: &RepresentationInstance,
    h: &ComplexMatrix,
    psi0: &StateVector,
    times: &[f64],
    renormalize: bool,
) -> Result<Vec<StateVector>> {
    let dim = 4 * rep.dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(LabError::Dimension {
            expected: dim,
            found: h.nrows(),
        });
    }
    if psi0.dim() != dim {
        return Err(LabError::Dimension {
            expected: dim,
            found: psi0.dim(),
        });
    }
    if !psi0.is_normalized() {
        return Err(LabError::validation(
            "initial state must be normalized",
            (psi0.norm() - 1.0).abs(),
        ));
    }
    let prop = SpectralPropagator::new(&effective_generator(rep, h, renormalize))?;
    times
        .iter()
        .map(|&t| {
            StateVector::new(
                prop.apply(t, psi0.amplitudes()),
                psi0.factorization().clone(),
            )
        })
        .collect()
}

fn atomic_from_entries(entries: &[(usize, usize, f64)]) -> Result<AtomicDensity> {
    let mut m = ComplexMatrix::zeros(4, 4);
    for &(r, c, v) in entries {
        m[(r, c)] += C64::from(v);
    }
    AtomicDensity::new(m)
}

/// `ρ = cos²t |−−⟩⟨−−| + ½ sin²t (|+−⟩ + |−+⟩)(⟨+−| + ⟨−+|)`.
pub fn rho_atoms_irreducible(t: f64) -> AtomicDensity {
    let c2 = t.cos().powi(2);
    let s2 = t.sin().powi(2) / 2.0;
    atomic_from_entries(&[
        (MM, MM, c2),
        (PM, PM, s2),
        (MP, MP, s2),
        (PM, MP, s2),
        (MP, PM, s2),
    ])
    .expect("closed form is a valid density matrix")
}

fn check_profile_args(z1: f64, z2: f64, z: f64) -> Result<()> {
    for (name, v) in [("Z1", z1), ("Z2", z2), ("Z", z)] {
        if !(v.is_finite() && v > 0.0 && v <= 1.0) {
            return Err(LabError::Domain(format!("{name} = {v} must lie in (0, 1]")));
        }
    }
    if z1 + z2 > 1.0 + SUM_SLACK {
        return Err(LabError::Domain(format!("Z1 + Z2 = {} exceeds 1", z1 + z2)));
    }
    if z < z1.max(z2) - SUM_SLACK {
        return Err(LabError::Domain(format!(
            "Z = {z} is below max(Z1, Z2) = {}",
            z1.max(z2)
        )));
    }
    Ok(())
}

/// Finite-`N` atomic density matrix of the reducible representation,
/// generated by `H/√Z` from the normalized single-photon state.
///
/// Diagonal entries are single-mode binomial averages over the spectrum
/// `s/N` of `Ī_k`; the atom–atom coherence is the joint multinomial average
/// of `sin(t√(s/NZ))√(s/N) · sin(t√(s'/NZ))√(s'/N)`.
pub fn rho_atoms_reducible(t: f64, n: u64, z1: f64, z2: f64, z: f64) -> Result<AtomicDensity> {
    check_profile_args(z1, z2, z)?;
    if n == 0 || n > MAX_OSCILLATORS {
        return Err(LabError::Domain(format!("N = {n} outside 1..={MAX_OSCILLATORS}")));
    }
    if !t.is_finite() {
        return Err(LabError::Domain(format!("t = {t} is not finite")));
    }
    let nf = n as f64;
    let phase = |s: u64| t * (s as f64 / (nf * z)).sqrt();
    let fraction = |s: u64| s as f64 / nf;
    // g(s) = sin(t√(s/NZ)) √(s/N)
    let g: Vec<f64> = (0..=n).map(|s| phase(s).sin() * fraction(s).sqrt()).collect();

    let mut ground = CompensatedSum::default();
    let mut excited1 = CompensatedSum::default();
    let mut excited2 = CompensatedSum::default();
    for s in 0..=n {
        let b1 = crate::weights::binomial_mass(s, n, z1, 1.0 - z1);
        let b2 = crate::weights::binomial_mass(s, n, z2, 1.0 - z2);
        let (c2, s2) = (phase(s).cos().powi(2), phase(s).sin().powi(2));
        ground.add(c2 * fraction(s) * b1);
        ground.add(c2 * fraction(s) * b2);
        excited1.add(s2 * fraction(s) * b1);
        excited2.add(s2 * fraction(s) * b2);
    }

    let coherence = joint_average(n, z1, z2, &g);
    let norm = 1.0 / (z1 + z2);
    atomic_from_entries(&[
        (MM, MM, norm * ground.value()),
        (PM, PM, norm * excited1.value()),
        (MP, MP, norm * excited2.value()),
        (PM, MP, norm * coherence),
        (MP, PM, norm * coherence),
    ])
}

/// `Σ_{s,s'} w(s, s') g(s) g(s')` over the trinomial weights, skipping
/// negligible tails. Rows are summed in parallel and merged in row order.
fn joint_average(n: u64, z1: f64, z2: f64, g: &[f64]) -> f64 {
    let joint = JointWeights::new(n, z1, z2);
    let marginals: Vec<f64> = (0..=n).map(|s| joint.marginal(s)).collect();
    let peak = marginals.iter().copied().fold(0.0, f64::max);
    let rows: Vec<u64> = (0..=n)
        .filter(|&s| marginals[s as usize] >= WEIGHT_CUTOFF * peak && g[s as usize] != 0.0)
        .collect();
    let row_sums: Vec<f64> = rows
        .par_iter()
        .map(|&s| {
            let marginal = marginals[s as usize];
            let mode = joint.conditional_mode(s);
            let mode_weight = joint.conditional(s, mode);
            let mut acc = CompensatedSum::default();
            let mut visit = |sp: u64| -> bool {
                let c = joint.conditional(s, sp);
                acc.add(c * g[sp as usize]);
                c >= WEIGHT_CUTOFF * mode_weight
            };
            for sp in mode..=(n - s) {
                if !visit(sp) {
                    break;
                }
            }
            for sp in (0..mode).rev() {
                if !visit(sp) {
                    break;
                }
            }
            marginal * g[s as usize] * acc.value()
        })
        .collect();
    let mut total = CompensatedSum::default();
    for v in row_sums {
        total.add(v);
    }
    total.value()
}

/// `N → ∞` limit: binomial averages collapse onto `s/N = Z_k`.
pub fn rho_atoms_limit(t: f64, z1: f64, z2: f64, z: f64) -> Result<AtomicDensity> {
    check_profile_args(z1, z2, z)?;
    if !t.is_finite() {
        return Err(LabError::Domain(format!("t = {t} is not finite")));
    }
    let sum = z1 + z2;
    let (w1, w2) = (z1 / sum, z2 / sum);
    let (p1, p2) = (t * (z1 / z).sqrt(), t * (z2 / z).sqrt());
    let cross = w1.sqrt() * p1.sin() * w2.sqrt() * p2.sin();
    atomic_from_entries(&[
        (MM, MM, w1 * p1.cos().powi(2) + w2 * p2.cos().powi(2)),
        (PM, PM, w1 * p1.sin().powi(2)),
        (MP, MP, w2 * p2.sin().powi(2)),
        (PM, MP, cross),
        (MP, PM, cross),
    ])
}

/// `𝒩` with `|𝒩|²(Z₁ + Z₂)/2 = 1`.
pub fn normalization_constant(z1: f64, z2: f64) -> Result<f64> {
    let sum = z1 + z2;
    if !(sum.is_finite() && sum > 0.0) {
        return Err(LabError::Domain(format!("Z1 + Z2 = {sum} must be positive")));
    }
    Ok((2.0 / sum).sqrt())
}

/// A two-atom density matrix as nested `[re, im]` pairs, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixEntries(pub Vec<Vec<[f64; 2]>>);

impl From<&DensityMatrix> for MatrixEntries {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        MatrixEntries(
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect(),
        )
    }
}
