use std::f64::consts::FRAC_PI_2;

use super::config::{ScenarioConfig, ScenarioName};
use super::report::{Assertion, ScenarioReport, Status};
use super::run::{convergence_sweep, run_scenario};
use crate::dynamics::{closed_form_evolution, rho_atoms_irreducible, two_block_generator, AtomicDensity};
use crate::entanglement::{
    concurrence, entanglement_entropy, partial_trace, schmidt_coefficients, trace_distance, Bipartition,
};
use crate::error::Result;
use crate::fock;
use crate::linalg::random::{random_density, random_hermitian, random_matrix, random_unitary, seeded, LabRng};
use crate::linalg::space::{DensityMatrix, HilbertFactorization, StateVector};
use crate::linalg::{
    expm_generator, hermitian_eig, identity, kron, matrix_function_psd, max_abs, max_abs_diff, unitarity_defect,
    ComplexMatrix, C64,
};
use crate::representations::{
    build_berezin, build_infinity_two_mode, build_reducible, ccr_check, VacuumProfile,
};
use crate::weights::{binomial_weight, CompensatedSum};

pub type Propagator = fn(&ComplexMatrix, f64) -> Result<ComplexMatrix>;

/// Replaceable pieces of the validation suite, for mutation testing.
#[derive(Clone, Copy)]
pub struct ValidationHooks {
    pub propagator: Propagator,
}

impl Default for ValidationHooks {
    fn default() -> Self {
        Self {
            propagator: closed_form_evolution,
        }
    }
}

/// Random matrices drawn per oracle check.
pub const ORACLE_SAMPLES: usize = 100;
pub const ORACLE_TIMES: [f64; 3] = [0.3, 0.9, FRAC_PI_2];
pub const ORACLE_TOL: f64 = 1e-10;

/// Worst `‖closed form − expm‖_max` over seeded random `A` of dimension 2–8.
pub fn master_oracle(seed: u64, propagator: Propagator) -> Result<(f64, String)> {
    let mut rng = seeded(seed);
    let mut worst = (0.0f64, String::new());
    for i in 0..ORACLE_SAMPLES {
        let dim = 2 + i % 7;
        let a = random_matrix(&mut rng, dim, dim);
        let h = two_block_generator(&a);
        for t in ORACLE_TIMES {
            let err = max_abs_diff(&propagator(&a, t)?, &expm_generator(&h, t)?);
            if err > worst.0 || worst.1.is_empty() {
                worst = (err, format!("sample {i}, dim {dim}, t={t}"));
            }
        }
    }
    Ok(worst)
}

pub fn validate(seed: u64) -> ScenarioReport {
    validate_with(seed, ValidationHooks::default())
}

/// Full invariant suite. Never errors: anything that cannot be evaluated
/// becomes a failed row.
pub fn validate_with(seed: u64, hooks: ValidationHooks) -> ScenarioReport {
    let config = ScenarioConfig {
        seed,
        ..ScenarioConfig::default()
    };
    let mut report = ScenarioReport::new("validate", &config);
    let mut rng = seeded(seed);

    guard(&mut report, "master propagator oracle", ORACLE_TOL, |r| {
        let (err, detail) = master_oracle(seed, hooks.propagator)?;
        r.assert(Assertion::at_most("master propagator oracle", err, ORACLE_TOL).with_detail(format!("worst at {detail}")));
        Ok(())
    });
    guard(&mut report, "linear algebra", 1e-10, |r| linear_algebra(r, &mut rng));
    guard(&mut report, "truncated ladder", 1e-12, fock_checks);
    guard(&mut report, "commutation relations", 1e-12, ccr_checks);
    guard(&mut report, "weight normalization", 1e-12, weight_sums);
    guard(&mut report, "entanglement measures", 1e-10, |r| entanglement_checks(r, &mut rng));

    for name in ScenarioName::ALL {
        let cfg = ScenarioConfig {
            seed,
            ..ScenarioConfig::for_scenario(name)
        };
        merge(&mut report, name.as_str(), run_scenario(&cfg));
    }
    let sweep_cfg = ScenarioConfig {
        seed,
        profile: super::config::ProfileSpec::Uniform { count: 4 },
        ..ScenarioConfig::default()
    };
    merge(&mut report, "sweep Z=0.25", convergence_sweep(&sweep_cfg));
    report
}

fn guard(
    report: &mut ScenarioReport,
    name: &str,
    tol: f64,
    body: impl FnOnce(&mut ScenarioReport) -> Result<()>,
) {
    if let Err(e) = body(report) {
        report.assert(Assertion::errored(name, tol, e.to_string()));
    }
}

fn merge(report: &mut ScenarioReport, prefix: &str, outcome: Result<ScenarioReport>) {
    match outcome {
        Ok(sub) => {
            for mut a in sub.assertions {
                if !a.name.starts_with(&format!("{prefix}:")) {
                    a.name = format!("{prefix}: {}", a.name);
                }
                report.assert(a);
            }
        }
        Err(e) => report.assert(Assertion::errored(prefix, 0.0, e.to_string())),
    }
}

fn linear_algebra(report: &mut ScenarioReport, rng: &mut LabRng) -> Result<()> {
    let (mut eig_residual, mut eig_orth, mut composition, mut group, mut kron_unitary) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for dim in 2..=8 {
        let m = random_hermitian(rng, dim);
        let eig = hermitian_eig(&m)?;
        let v = &eig.eigenvectors;
        let lambda = ComplexMatrix::from_diagonal(&crate::linalg::ComplexVector::from_iterator(dim, eig.eigenvalues.iter().map(|&l| C64::from(l))));
        eig_residual = eig_residual.max(max_abs_diff(&(&m * v), &(v * lambda)) / max_abs(&m).max(1.0));
        eig_orth = eig_orth.max(unitarity_defect(v));

        // √(P²) = P for a well-conditioned positive P.
        let p = random_density(rng, dim, dim) + identity(dim).scale(0.1);
        let root = matrix_function_psd(&(&p * &p), f64::sqrt)?;
        composition = composition.max(max_abs_diff(&root, &p));

        let (s, t) = (0.37, 1.21);
        let lhs = expm_generator(&m, s)? * expm_generator(&m, t)?;
        group = group.max(max_abs_diff(&lhs, &expm_generator(&m, s + t)?));

        let u = random_unitary(rng, dim);
        let w = random_unitary(rng, 2);
        kron_unitary = kron_unitary.max(unitarity_defect(&kron(&u, &w)));
    }
    report.assert(Assertion::at_most("eigendecomposition residual", eig_residual, 1e-10));
    report.assert(Assertion::at_most("eigenvectors orthonormal", eig_orth, 1e-10));
    report.assert(Assertion::at_most("matrix function composition", composition, 1e-10));
    report.assert(Assertion::at_most("propagator group property", group, 1e-10));
    report.assert(Assertion::at_most("Kronecker product of unitaries is unitary", kron_unitary, 1e-10));
    Ok(())
}

fn fock_checks(report: &mut ScenarioReport) -> Result<()> {
    let mut worst = 0.0f64;
    for n_max in 0..=5 {
        let mut expected = ComplexMatrix::zeros(n_max + 1, n_max + 1);
        expected[(n_max, n_max)] = C64::from(-((n_max + 1) as f64));
        worst = worst.max(max_abs_diff(&fock::commutator_defect(n_max), &expected));
    }
    report.assert(Assertion::at_most("truncation defect confined to top level", worst, 1e-12));
    Ok(())
}

fn ccr_checks(report: &mut ScenarioReport) -> Result<()> {
    let profile = VacuumProfile::uniform(2)?;
    let reps = [
        ("infinity", build_infinity_two_mode(2)?),
        ("berezin", build_berezin(3, 2, &[1, 2])?),
        ("reducible N=2", build_reducible(2, &profile, 1, &["k1", "k2"])?),
    ];
    for (name, rep) in reps {
        report.assert(Assertion::at_most(
            format!("commutation relations: {name}"),
            ccr_check(&rep).max_deviation(),
            1e-12,
        ));
    }
    Ok(())
}

fn weight_sums(report: &mut ScenarioReport) -> Result<()> {
    let mut worst = (0.0f64, String::new());
    for n in [1u64, 10, 1_000, 1_000_000] {
        for z in [0.1, 0.25, 0.5] {
            let mut sum = CompensatedSum::default();
            for s in 0..=n {
                sum.add(binomial_weight(n, s, z)?);
            }
            let err = (sum.value() - 1.0).abs();
            if err >= worst.0 {
                worst = (err, format!("N={n}, Z={z}"));
            }
        }
    }
    report.assert(
        Assertion::at_most("binomial weights sum to one", worst.0, 1e-12).with_detail(format!("worst at {}", worst.1)),
    );
    Ok(())
}

fn random_state(rng: &mut LabRng, fact: &HilbertFactorization) -> Result<StateVector> {
    let v = random_matrix(rng, fact.dim(), 1);
    StateVector::new(v.column(0).into_owned(), fact.clone())?.normalized()
}

fn entanglement_checks(report: &mut ScenarioReport, rng: &mut LabRng) -> Result<()> {
    let fact = HilbertFactorization::new([("A", 3), ("B", 4)])?;
    let (keep_a, keep_b) = (Bipartition::keep(&["A"]), Bipartition::keep(&["B"]));
    let (mut symmetry, mut schmidt_vs_marginal) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let psi = random_state(rng, &fact)?;
        let (sa, sb) = (entanglement_entropy(&psi, &keep_a)?, entanglement_entropy(&psi, &keep_b)?);
        symmetry = symmetry.max((sa - sb).abs());
        let mut squares: Vec<f64> = schmidt_coefficients(&psi, &keep_a)?.iter().map(|l| l * l).collect();
        let mut marginal = partial_trace(&psi.density()?, &keep_a)?.spectrum();
        squares.sort_by(f64::total_cmp);
        marginal.sort_by(f64::total_cmp);
        for (x, y) in squares.iter().zip(&marginal) {
            schmidt_vs_marginal = schmidt_vs_marginal.max((x - y).abs());
        }
    }
    report.assert(Assertion::at_most("pure-state marginal entropies agree", symmetry, 1e-10));
    report.assert(Assertion::at_most("Schmidt squares equal marginal spectrum", schmidt_vs_marginal, 1e-10));

    let mut invariance = 0.0f64;
    for _ in 0..5 {
        let rho = AtomicDensity::new(random_density(rng, 4, 2))?;
        let local = kron(&random_unitary(rng, 2), &random_unitary(rng, 2));
        let rotated = AtomicDensity::new(&local * rho.matrix() * local.adjoint())?;
        invariance = invariance.max((concurrence(&rho) - concurrence(&rotated)).abs());
    }
    let bell = rho_atoms_irreducible(FRAC_PI_2);
    invariance = invariance.max((concurrence(&bell) - 1.0).abs());
    report.assert(Assertion::at_most("concurrence invariant under local unitaries", invariance, 1e-8));

    let rho = DensityMatrix::new(random_density(rng, 12, 3), HilbertFactorization::new([("A", 3), ("B", 4)])?)?;
    let sigma = DensityMatrix::new(random_density(rng, 12, 12), rho.factorization().clone())?;
    let tau = DensityMatrix::new(random_density(rng, 12, 5), rho.factorization().clone())?;
    let p = 0.3;
    let mixed = partial_trace(&rho.mix(&sigma, p)?, &keep_a)?;
    let separate = partial_trace(&rho, &keep_a)?.mix(&partial_trace(&sigma, &keep_a)?, p)?;
    report.assert(Assertion::at_most(
        "partial trace is affine",
        max_abs_diff(mixed.matrix(), separate.matrix()),
        1e-12,
    ));
    let excess = trace_distance(&rho, &tau)? - trace_distance(&rho, &sigma)? - trace_distance(&sigma, &tau)?;
    report.assert(Assertion::at_most("trace distance triangle inequality", excess, 1e-12));
    Ok(())
}

/// Verdict vector, for comparing runs across seeds.
pub fn verdicts(report: &ScenarioReport) -> Vec<(String, Status)> {
    report.assertions.iter().map(|a| (a.name.clone(), a.status)).collect()
}
