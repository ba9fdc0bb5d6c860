//! Concrete CCR representations and the central-element spectral machinery.
//!
//! Each builder returns a [`RepresentationInstance`]: annihilation operators
//! `a_k` and central elements `I_k` for the selected modes, a vacuum vector
//! and the tensor factorization of the field space.
//!
//! * [`build_infinity_two_mode`]: two independent truncated oscillators,
//!   `a₁ = a ⊗ 1`, `a₂ = 1 ⊗ a`, `I_k = 1`.
//! * [`build_berezin`]: one field factor spanned by occupation tuples
//!   `|n₁ … n_d⟩` with `Σ nᵢ ≤ cutoff` over an orthonormal one-particle basis.
//! * [`build_reducible`]: `N` oscillators, each carrying every wave-vector
//!   label; `ā_k = N^{-1/2} Σₙ (|k⟩⟨k| ⊗ a)⁽ⁿ⁾`, `Ī_k = N^{-1} Σₙ (|k⟩⟨k| ⊗ 1)⁽ⁿ⁾`.

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fock;
use crate::linalg::space::{HilbertFactorization, StateVector};
use crate::linalg::{commutator, identity, kron, kron_all, ComplexMatrix, ComplexVector, C64};
use crate::weights;

/// Default brute-force ceiling on the field dimension.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Tolerance on `Σ_k Z_k = 1`.
pub const PROFILE_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceLimits {
    pub max_dim: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl BruteForceLimits {
    fn check(&self, dim: Option<usize>) -> Result<usize> {
        match dim {
            Some(d) if d <= self.max_dim => Ok(d),
            Some(d) => Err(LabError::Size {
                dim: d,
                ceiling: self.max_dim,
            }),
            None => Err(LabError::Size {
                dim: usize::MAX,
                ceiling: self.max_dim,
            }),
        }
    }
}

/// Vacuum amplitudes `O_k` and probabilities `Z_k = |O_k|²` over wave-vector
/// labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuumProfile {
    labels: Vec<String>,
    amplitudes: Vec<C64>,
    probabilities: Vec<f64>,
}

/// Plateau of height one over `[plateau_start, plateau_end]` (1-based,
/// inclusive) with `exp(−rolloff · distance)` tails on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauSpec {
    pub count: usize,
    pub plateau_start: usize,
    pub plateau_end: usize,
    pub rolloff: f64,
}

fn default_labels(count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("k{i}")).collect()
}

impl VacuumProfile {
    /// Amplitudes are taken as the nonnegative roots `√Z_k`.
    pub fn from_probabilities(labels: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.is_empty() || labels.len() != probabilities.len() {
            return Err(LabError::Config(format!(
                "profile needs matching nonempty labels and probabilities ({} vs {})",
                labels.len(),
                probabilities.len()
            )));
        }
        if labels.iter().unique().count() != labels.len() {
            return Err(LabError::Config("profile labels must be unique".into()));
        }
        if let Some(z) = probabilities.iter().find(|z| !(z.is_finite() && **z >= 0.0)) {
            return Err(LabError::Domain(format!("vacuum probability {z} is not >= 0")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROFILE_SUM_TOL {
            return Err(LabError::Domain(format!(
                "vacuum probabilities sum to {total}, not 1"
            )));
        }
        let amplitudes = probabilities.iter().map(|z| C64::from(z.sqrt())).collect();
        Ok(Self {
            labels,
            amplitudes,
            probabilities,
        })
    }

    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(LabError::Config("profile needs at least one label".into()));
        }
        Self::from_probabilities(default_labels(count), vec![1.0 / count as f64; count])
    }

    pub fn plateau(spec: &PlateauSpec) -> Result<Self> {
        let PlateauSpec {
            count,
            plateau_start,
            plateau_end,
            rolloff,
        } = *spec;
        if count == 0 || plateau_start == 0 || plateau_start > plateau_end || plateau_end > count {
            return Err(LabError::Config(format!(
                "plateau window [{plateau_start}, {plateau_end}] invalid for {count} labels"
            )));
        }
        if !(rolloff.is_finite() && rolloff >= 0.0) {
            return Err(LabError::Config(format!("plateau rolloff {rolloff} must be >= 0")));
        }
        let shape: Vec<f64> = (1..=count)
            .map(|i| {
                let distance = plateau_start.saturating_sub(i) + i.saturating_sub(plateau_end);
                (-rolloff * distance as f64).exp()
            })
            .collect();
        let norm: f64 = shape.iter().sum();
        let mut probabilities: Vec<f64> = shape.iter().map(|g| g / norm).collect();
        // Push the rounding residue onto the largest entry so the sum is 1.
        let residue = 1.0 - probabilities.iter().sum::<f64>();
        let top = probabilities
            .iter()
            .position_max_by(|a, b| a.total_cmp(b))
            .unwrap_or(0);
        probabilities[top] += residue;
        Self::from_probabilities(default_labels(count), probabilities)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| LabError::Config(format!("profile has no label '{label}'")))
    }

    pub fn probability(&self, label: &str) -> Result<f64> {
        Ok(self.probabilities[self.index_of(label)?])
    }

    /// `Z = max_k Z_k`.
    pub fn z_max(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepresentationKind {
    Infinity,
    Berezin,
    Reducible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RepresentationParams {
    Infinity {
        n_max: usize,
    },
    Berezin {
        modes: usize,
        total_cutoff: usize,
    },
    Reducible {
        oscillators: usize,
        n_max: usize,
        profile: VacuumProfile,
    },
}

#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub label: String,
    pub annihilation: ComplexMatrix,
    pub central: ComplexMatrix,
}

impl ModeOperators {
    pub fn creation(&self) -> ComplexMatrix {
        self.annihilation.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct RepresentationInstance {
    kind: RepresentationKind,
    params: RepresentationParams,
    modes: Vec<ModeOperators>,
    vacuum: StateVector,
    factorization: HilbertFactorization,
    photon_number: ComplexMatrix,
    /// Basis indices on which no oscillator sits at its truncation level,
    /// where the truncated CCR hold exactly.
    safe_subspace: Vec<usize>,
}

impl RepresentationInstance {
    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    pub fn params(&self) -> &RepresentationParams {
        &self.params
    }

    pub fn modes(&self) -> &[ModeOperators] {
        &self.modes
    }

    pub fn mode(&self, label: &str) -> Result<&ModeOperators> {
        self.modes
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| LabError::Config(format!("representation has no mode '{label}'")))
    }

    pub fn vacuum(&self) -> &StateVector {
        &self.vacuum
    }

    pub fn factorization(&self) -> &HilbertFactorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.factorization.dim()
    }

    /// Total photon number on the field space.
    pub fn photon_number(&self) -> &ComplexMatrix {
        &self.photon_number
    }

    pub fn safe_subspace(&self) -> &[usize] {
        &self.safe_subspace
    }

    /// `Z` for the reducible representation, 1 for irreducible ones.
    pub fn renormalization_constant(&self) -> f64 {
        match &self.params {
            RepresentationParams::Reducible { profile, .. } => profile.z_max(),
            _ => 1.0,
        }
    }

    /// Applies `Σ_k c_k a_k†` to the vacuum.
    pub fn create_on_vacuum(&self, coefficients: &[(&str, C64)]) -> Result<StateVector> {
        let mut op = ComplexMatrix::zeros(self.dim(), self.dim());
        for &(label, c) in coefficients {
            op += self.mode(label)?.creation() * c;
        }
        self.vacuum.apply(&op)
    }
}

/// Two-mode reduction of the infinite tensor product representation.
pub fn build_infinity_two_mode(n_max: usize) -> Result<RepresentationInstance> {
    if n_max < 1 {
        return Err(LabError::Domain("infinity representation needs n_max >= 1".into()));
    }
    let d = n_max + 1;
    let a = fock::annihilation(n_max);
    let id = identity(d);
    let factorization = HilbertFactorization::new([("mode1", d), ("mode2", d)])?;
    let full_id = identity(d * d);
    let modes = vec![
        ModeOperators {
            label: "k1".into(),
            annihilation: kron(&a, &id),
            central: full_id.clone(),
        },
        ModeOperators {
            label: "k2".into(),
            annihilation: kron(&id, &a),
            central: full_id,
        },
    ];
    let num = fock::number(n_max);
    let photon_number = kron(&num, &id) + kron(&id, &num);
    let vacuum = StateVector::basis(0, factorization.clone())?;
    let safe_subspace = (0..d * d)
        .filter(|i| i / d < n_max && i % d < n_max)
        .collect();
    Ok(RepresentationInstance {
        kind: RepresentationKind::Infinity,
        params: RepresentationParams::Infinity { n_max },
        modes,
        vacuum,
        factorization,
        photon_number,
        safe_subspace,
    })
}

/// Occupation tuples with total at most `cutoff`, ordered by total then
/// descending lexicographic order (so `|1,0⟩` precedes `|0,1⟩`).
fn occupation_tuples(modes: usize, cutoff: usize) -> Vec<Vec<usize>> {
    fn fill(prefix: &mut Vec<usize>, remaining_slots: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
        if remaining_slots == 0 {
            out.push(prefix.clone());
            return;
        }
        for n in (0..=budget).rev() {
            prefix.push(n);
            fill(prefix, remaining_slots - 1, budget - n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(&mut Vec::new(), modes, cutoff, &mut out);
    out.sort_by_key(|t| t.iter().sum::<usize>());
    out
}

fn binomial_count(n: usize, k: usize) -> Option<usize> {
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > usize::MAX as u128 {
            return None;
        }
    }
    usize::try_from(c).ok()
}

pub fn build_berezin(
    d: usize,
    total_cutoff: usize,
    selected_modes: &[usize],
) -> Result<RepresentationInstance> {
    build_berezin_with_limits(d, total_cutoff, selected_modes, BruteForceLimits::default())
}

/// Occupation-number Fock space over `d` orthonormal one-particle modes
/// `f₁ … f_d`. Selected modes are 1-based and labelled `f<n>`.
pub fn build_berezin_with_limits(
    d: usize,
    total_cutoff: usize,
    selected_modes: &[usize],
    limits: BruteForceLimits,
) -> Result<RepresentationInstance> {
    if d == 0 || total_cutoff == 0 {
        return Err(LabError::Config("Berezin representation needs d >= 1 and cutoff >= 1".into()));
    }
    if let Some(&bad) = selected_modes.iter().find(|&&m| m == 0 || m > d) {
        return Err(LabError::Config(format!("selected mode {bad} outside 1..={d}")));
    }
    if selected_modes.iter().unique().count() != selected_modes.len() {
        return Err(LabError::Config("selected modes must be distinct".into()));
    }
    let dim = limits.check(binomial_count(d + total_cutoff, total_cutoff))?;
    let tuples = occupation_tuples(d, total_cutoff);
    debug_assert_eq!(tuples.len(), dim);
    let index: HashMap<&[usize], usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_slice(), i))
        .collect();

    let modes = selected_modes
        .iter()
        .map(|&m| {
            let slot = m - 1;
            let mut a = ComplexMatrix::zeros(dim, dim);
            for (col, t) in tuples.iter().enumerate() {
                if t[slot] == 0 {
                    continue;
                }
                let mut lowered = t.clone();
                lowered[slot] -= 1;
                let row = index[lowered.as_slice()];
                a[(row, col)] = C64::from((t[slot] as f64).sqrt());
            }
            ModeOperators {
                label: format!("f{m}"),
                annihilation: a,
                central: identity(dim),
            }
        })
        .collect();

    let totals: Vec<usize> = tuples.iter().map(|t| t.iter().sum()).collect();
    let photon_number = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        dim,
        totals.iter().map(|&n| C64::from(n as f64)),
    ));
    let safe_subspace = (0..dim).filter(|&i| totals[i] < total_cutoff).collect();
    let factorization = HilbertFactorization::single("field", dim)?;
    let vacuum = StateVector::basis(index[vec![0; d].as_slice()], factorization.clone())?;
    Ok(RepresentationInstance {
        kind: RepresentationKind::Berezin,
        params: RepresentationParams::Berezin {
            modes: d,
            total_cutoff,
        },
        modes,
        vacuum,
        factorization,
        photon_number,
        safe_subspace,
    })
}

pub fn build_reducible(
    oscillators: usize,
    profile: &VacuumProfile,
    n_max: usize,
    selected_modes: &[&str],
) -> Result<RepresentationInstance> {
    build_reducible_with_limits(
        oscillators,
        profile,
        n_max,
        selected_modes,
        BruteForceLimits::default(),
    )
}

/// Reducible `N`-oscillator representation. Each oscillator factor has basis
/// `|k, n⟩` at index `k·(n_max+1) + n`.
pub fn build_reducible_with_limits(
    oscillators: usize,
    profile: &VacuumProfile,
    n_max: usize,
    selected_modes: &[&str],
    limits: BruteForceLimits,
) -> Result<RepresentationInstance> {
    if oscillators == 0 {
        return Err(LabError::Config("reducible representation needs N >= 1".into()));
    }
    let labels = profile.len();
    if selected_modes.len() > labels {
        return Err(LabError::Config(format!(
            "{} selected modes but only {labels} profile labels",
            selected_modes.len()
        )));
    }
    if selected_modes.iter().unique().count() != selected_modes.len() {
        return Err(LabError::Config("selected modes must be distinct".into()));
    }
    let levels = n_max + 1;
    let local_dim = labels * levels;
    let dim = limits.check(
        u32::try_from(oscillators)
            .ok()
            .and_then(|n| local_dim.checked_pow(n)),
    )?;

    let factorization = HilbertFactorization::new(
        (1..=oscillators).map(|n| (format!("osc{n}"), local_dim)),
    )?;
    let a = fock::annihilation(n_max);
    let projector = |k: usize| {
        let mut p = ComplexMatrix::zeros(labels, labels);
        p[(k, k)] = C64::from(1.0);
        p
    };
    let collective = |local: &ComplexMatrix, scale: f64| -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for n in 0..oscillators {
            let before = identity(local_dim.pow(n as u32));
            let after = identity(local_dim.pow((oscillators - n - 1) as u32));
            sum += kron(&kron(&before, local), &after);
        }
        sum.scale(scale)
    };

    let mut modes = Vec::with_capacity(selected_modes.len());
    for &label in selected_modes {
        let k = profile.index_of(label)?;
        let p = projector(k);
        modes.push(ModeOperators {
            label: label.to_string(),
            annihilation: collective(&kron(&p, &a), 1.0 / (oscillators as f64).sqrt()),
            central: collective(&kron(&p, &identity(levels)), 1.0 / oscillators as f64),
        });
    }

    let photon_number = collective(&kron(&identity(labels), &fock::number(n_max)), 1.0);

    let mut single = ComplexVector::zeros(local_dim);
    for (k, &o) in profile.amplitudes().iter().enumerate() {
        single[k * levels] = o;
    }
    let mut vacuum = ComplexVector::from_element(1, C64::from(1.0));
    for _ in 0..oscillators {
        vacuum = vacuum.kronecker(&single);
    }
    let vacuum = StateVector::new(vacuum, factorization.clone())?;

    let safe_subspace = (0..dim)
        .filter(|&i| {
            let mut rest = i;
            (0..oscillators).all(|_| {
                let digit = rest % local_dim;
                rest /= local_dim;
                digit % levels < n_max
            })
        })
        .collect();

    Ok(RepresentationInstance {
        kind: RepresentationKind::Reducible,
        params: RepresentationParams::Reducible {
            oscillators,
            n_max,
            profile: profile.clone(),
        },
        modes,
        vacuum,
        factorization,
        photon_number,
        safe_subspace,
    })
}

/// Spectral projectors `E_k(s)`, `s = 0 … N`, of the central element `Ī_k`.
#[derive(Debug, Clone)]
pub struct CentralSpectrum {
    pub mode: String,
    pub oscillators: usize,
    pub projectors: Vec<ComplexMatrix>,
    pub eigenvalues: Vec<f64>,
}

impl CentralSpectrum {
    /// `Σ_s (s/N) E_k(s)`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.projectors[0].nrows();
        self.projectors
            .iter()
            .zip(&self.eigenvalues)
            .fold(ComplexMatrix::zeros(d, d), |acc, (e, &l)| acc + e.scale(l))
    }

    pub fn resolution_of_identity(&self) -> ComplexMatrix {
        let d = self.projectors[0].nrows();
        self.projectors
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e)
    }
}

/// `E_k(s) = Σ_{|S|=s} ∏_{n∈S} P_k⁽ⁿ⁾ ∏_{n∉S} (1 − P_k⁽ⁿ⁾)` with
/// `P_k = |k⟩⟨k| ⊗ 1` on one oscillator.
pub fn central_spectral_projectors(
    rep: &RepresentationInstance,
    mode: &str,
) -> Result<CentralSpectrum> {
    let RepresentationParams::Reducible {
        oscillators,
        n_max,
        profile,
    } = rep.params()
    else {
        return Err(LabError::Config(
            "central spectral projectors need a reducible representation".into(),
        ));
    };
    rep.mode(mode)?;
    let k = profile.index_of(mode)?;
    let levels = n_max + 1;
    let local_dim = profile.len() * levels;
    let mut p = ComplexMatrix::zeros(local_dim, local_dim);
    for n in 0..levels {
        p[(k * levels + n, k * levels + n)] = C64::from(1.0);
    }
    let q = identity(local_dim) - &p;
    let n = *oscillators;
    let dim = rep.dim();
    let projectors = (0..=n)
        .map(|s| {
            let mut e = ComplexMatrix::zeros(dim, dim);
            for subset in (0..n).combinations(s) {
                let factors: Vec<&ComplexMatrix> = (0..n)
                    .map(|i| if subset.contains(&i) { &p } else { &q })
                    .collect();
                e += kron_all(factors);
            }
            e
        })
        .collect();
    Ok(CentralSpectrum {
        mode: mode.to_string(),
        oscillators: n,
        projectors,
        eigenvalues: (0..=n).map(|s| s as f64 / n as f64).collect(),
    })
}

/// Vacuum weight of the central spectral projectors: the single-mode
/// binomial `C(N,s) Z₁^s (1−Z₁)^(N−s)` when `s_prime`/`z2` are absent,
/// otherwise the joint multinomial, zero when `s + s' > N`.
pub fn vacuum_weight(
    n: u64,
    s: u64,
    s_prime: Option<u64>,
    z1: f64,
    z2: Option<f64>,
) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Domain("vacuum weight needs N >= 1".into()));
    }
    match (s_prime, z2) {
        (None, None) => weights::binomial_weight(n, s, z1),
        (Some(sp), Some(z2)) => weights::multinomial_weight(n, s, sp, z1, z2),
        _ => Err(LabError::Domain(
            "joint vacuum weight needs both s' and Z2".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CcrEntry {
    pub relation: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CcrReport {
    pub entries: Vec<CcrEntry>,
}

impl CcrReport {
    pub fn max_deviation(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.deviation))
    }
}

/// Largest entry of `m` in the columns listed by `cols`.
fn restricted_max(m: &ComplexMatrix, cols: &[usize]) -> f64 {
    cols.iter()
        .flat_map(|&c| m.column(c).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Deviations from `[a_m, a_n†] = δ_mn I_m` on the safe subspace, from
/// centrality of each `I_m`, and from `a_m |0⟩ = 0`.
pub fn ccr_check(rep: &RepresentationInstance) -> CcrReport {
    let safe = rep.safe_subspace();
    let mut entries = Vec::new();
    for m in rep.modes() {
        for n in rep.modes() {
            let mut c = commutator(&m.annihilation, &n.creation());
            if m.label == n.label {
                c -= &m.central;
            }
            entries.push(CcrEntry {
                relation: format!("[a_{}, a_{}^+]", m.label, n.label),
                deviation: restricted_max(&c, safe),
            });
            let central_a = crate::linalg::max_abs(&commutator(&m.central, &n.annihilation));
            let central_ad = crate::linalg::max_abs(&commutator(&m.central, &n.creation()));
            entries.push(CcrEntry {
                relation: format!("[I_{}, a_{}], [I_{}, a_{}^+]", m.label, n.label, m.label, n.label),
                deviation: central_a.max(central_ad),
            });
        }
        entries.push(CcrEntry {
            relation: format!("a_{} |0>", m.label),
            deviation: (&m.annihilation * rep.vacuum().amplitudes()).norm(),
        });
    }
    CcrReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, max_abs, max_abs_diff};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn half_half() -> VacuumProfile {
        VacuumProfile::uniform(2).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(VacuumProfile::from_probabilities(vec!["a".into()], vec![0.5]).is_err());
        assert!(VacuumProfile::from_probabilities(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
        assert!(VacuumProfile::from_probabilities(vec!["a".into(), "b".into()], vec![1.5, -0.5]).is_err());
        let p = VacuumProfile::from_probabilities(vec!["a".into(), "b".into()], vec![0.75, 0.25]).unwrap();
        assert_eq!(p.z_max(), 0.75);
        assert!((p.amplitudes()[1].re - 0.5).abs() < 1e-16);
    }

    #[test]
    fn plateau_profile_shape() {
        let p = VacuumProfile::plateau(&PlateauSpec {
            count: 9,
            plateau_start: 3,
            plateau_end: 6,
            rolloff: 1.0,
        })
        .unwrap();
        let z = p.probabilities();
        assert!((z.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        assert!((z[2] - z[5]).abs() < 1e-15);
        assert!((z[1] / z[2] - (-1.0f64).exp()).abs() < 1e-12);
        assert!((z[8] / z[5] - (-3.0f64).exp()).abs() < 1e-12);
        assert!((p.z_max() - z[3]).abs() < 1e-15);
        assert!(VacuumProfile::plateau(&PlateauSpec {
            count: 3,
            plateau_start: 2,
            plateau_end: 4,
            rolloff: 1.0
        })
        .is_err());
    }

    #[test]
    fn infinity_superposition_and_single_excitation() {
        let rep = build_infinity_two_mode(1).unwrap();
        let s = FRAC_1_SQRT_2;
        let psi = rep
            .create_on_vacuum(&[("k1", C64::from(s)), ("k2", C64::from(s))])
            .unwrap();
        // |1⟩|0⟩ is index 2, |0⟩|1⟩ is index 1.
        let amps = psi.amplitudes();
        assert!((amps[2].re - s).abs() < 1e-15 && (amps[1].re - s).abs() < 1e-15);
        assert!(amps[0].norm() == 0.0 && amps[3].norm() == 0.0);
        let one = rep.create_on_vacuum(&[("k1", C64::from(1.0))]).unwrap();
        assert_eq!(one.amplitudes()[2], C64::from(1.0));
        let c = commutator(&rep.mode("k1").unwrap().annihilation, &rep.mode("k2").unwrap().creation());
        assert_eq!(max_abs(&c), 0.0);
        assert!(build_infinity_two_mode(0).is_err());
    }

    #[test]
    fn berezin_counting_and_state() {
        let rep = build_berezin(2, 1, &[1, 2]).unwrap();
        assert_eq!(rep.dim(), 3);
        let s = FRAC_1_SQRT_2;
        let psi = rep
            .create_on_vacuum(&[("f1", C64::from(s)), ("f2", C64::from(s))])
            .unwrap();
        assert_eq!(psi.factorization().len(), 1);
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert_eq!(psi.amplitudes()[0], C64::from(0.0));
        assert!((psi.amplitudes()[1].re - s).abs() < 1e-15);
        assert!((psi.amplitudes()[2].re - s).abs() < 1e-15);
        assert_eq!(build_berezin(4, 3, &[1]).unwrap().dim(), 35);
        assert!(matches!(build_berezin(2, 1, &[3]), Err(LabError::Config(_))));
    }

    #[test]
    fn berezin_ccr_in_low_sector() {
        let rep = build_berezin(2, 1, &[1, 2]).unwrap();
        let a = &rep.mode("f1").unwrap().annihilation;
        let c = commutator(a, &a.adjoint());
        // Vacuum and one-photon block are indices 0..3; only the vacuum
        // column is below the cutoff, where the identity must hold.
        assert!((c[(0, 0)] - C64::from(1.0)).norm() < 1e-15);
        let rep = build_berezin(2, 2, &[1, 2]).unwrap();
        assert!(ccr_check(&rep).max_deviation() <= 1e-12);
        let a = &rep.mode("f1").unwrap().annihilation;
        let c = commutator(a, &a.adjoint());
        let block = c.view((0, 0), (3, 3)).into_owned();
        assert!(max_abs_diff(&block, &identity(3)) <= 1e-12);
    }

    #[test]
    fn berezin_size_ceiling() {
        let err = build_berezin_with_limits(10, 5, &[1], BruteForceLimits { max_dim: 1000 });
        assert!(matches!(err, Err(LabError::Size { dim: 3003, .. })));
    }

    #[test]
    fn reducible_vacuum_expectation() {
        let rep = build_reducible(1, &half_half(), 1, &["k1", "k2"]).unwrap();
        let i1 = &rep.mode("k1").unwrap().central;
        assert!((rep.vacuum().expectation(i1).re - 0.5).abs() <= 1e-12);
        let c = commutator(&rep.mode("k1").unwrap().annihilation, &rep.mode("k2").unwrap().creation());
        assert!(max_abs(&c) <= 1e-12);
    }

    #[test]
    fn reducible_central_eigenvalues() {
        let rep = build_reducible(2, &half_half(), 1, &["k1", "k2"]).unwrap();
        let ev = hermitian_eigenvalues(&rep.mode("k1").unwrap().central).unwrap();
        let mut distinct: Vec<f64> = Vec::new();
        for e in ev {
            if !distinct.iter().any(|d| (d - e).abs() < 1e-10) {
                distinct.push(e);
            }
        }
        distinct.sort_by(f64::total_cmp);
        assert_eq!(distinct.len(), 3);
        for (d, want) in distinct.iter().zip([0.0, 0.5, 1.0]) {
            assert!((d - want).abs() < 1e-10);
        }
    }

    #[test]
    fn reducible_normalization_block() {
        let profile =
            VacuumProfile::from_probabilities(vec!["k1".into(), "k2".into(), "k3".into()], vec![0.2, 0.3, 0.5])
                .unwrap();
        for n in 1..=3 {
            let rep = build_reducible(n, &profile, 1, &["k1", "k2"]).unwrap();
            for (label, z) in [("k1", 0.2), ("k2", 0.3)] {
                let m = rep.mode(label).unwrap();
                let aad = &m.annihilation * m.creation();
                assert!((rep.vacuum().expectation(&aad).re - z).abs() <= 1e-12);
                assert!((rep.vacuum().expectation(&m.central).re - z).abs() <= 1e-12);
            }
            assert!(ccr_check(&rep).max_deviation() <= 1e-12);
        }
    }

    #[test]
    fn reducible_size_ceiling_and_labels() {
        let p = half_half();
        assert!(matches!(
            build_reducible(7, &p, 1, &["k1"]),
            Err(LabError::Size { dim: 16384, .. })
        ));
        assert!(matches!(build_reducible(1, &p, 1, &["k9"]), Err(LabError::Config(_))));
        assert!(matches!(
            build_reducible(1, &p, 1, &["k1", "k2", "k1"]),
            Err(LabError::Config(_))
        ));
    }

    #[test]
    fn spectral_projectors_single_oscillator() {
        let rep = build_reducible(1, &half_half(), 1, &["k1", "k2"]).unwrap();
        let spec = central_spectral_projectors(&rep, "k1").unwrap();
        let p = &rep.mode("k1").unwrap().central; // N = 1: Ī = P
        assert!(max_abs_diff(&spec.projectors[1], p) < 1e-15);
        assert!(max_abs_diff(&spec.projectors[0], &(identity(4) - p)) < 1e-15);
    }

    #[test]
    fn spectral_projector_binomial_weight() {
        let profile = VacuumProfile::uniform(4).unwrap();
        let rep = build_reducible(3, &profile, 1, &["k1"]).unwrap();
        let spec = central_spectral_projectors(&rep, "k1").unwrap();
        let w = rep.vacuum().expectation(&spec.projectors[1]).re;
        assert!((w - 0.421875).abs() <= 1e-12);
        assert!(max_abs_diff(&spec.resolution_of_identity(), &identity(rep.dim())) <= 1e-12);
        assert!(max_abs_diff(&spec.reconstruct(), &rep.mode("k1").unwrap().central) <= 1e-10);
        for (s, e) in spec.projectors.iter().enumerate() {
            for (t, f) in spec.projectors.iter().enumerate() {
                let prod = e * f;
                let want = if s == t { e.clone() } else { ComplexMatrix::zeros(rep.dim(), rep.dim()) };
                assert!(max_abs_diff(&prod, &want) <= 1e-10);
            }
        }
    }

    #[test]
    fn spectral_projectors_need_reducible() {
        let rep = build_infinity_two_mode(1).unwrap();
        assert!(central_spectral_projectors(&rep, "k1").is_err());
    }

    #[test]
    fn vacuum_weight_cases() {
        assert_eq!(vacuum_weight(1, 1, None, 0.3, None).unwrap(), 0.3);
        assert_eq!(vacuum_weight(1, 1, Some(1), 0.5, Some(0.5)).unwrap(), 0.0);
        assert!(vacuum_weight(2, 1, Some(1), 0.5, None).is_err());
        assert!(vacuum_weight(0, 0, None, 0.5, None).is_err());
    }

    #[test]
    fn ccr_checks_infinity() {
        let rep = build_infinity_two_mode(1).unwrap();
        assert!(ccr_check(&rep).max_deviation() <= 1e-12);
        // Without the restriction the truncation defect is visible.
        let a = &rep.mode("k1").unwrap().annihilation;
        let c = commutator(a, &a.adjoint()) - identity(4);
        assert!(max_abs(&c) > 1.0);
    }
}
