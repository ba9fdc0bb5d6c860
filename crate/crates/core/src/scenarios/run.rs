use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, LN_2};

use rayon::prelude::*;

use super::config::{ScenarioConfig, ScenarioName};
use super::report::{Assertion, Comparison, Record, ScenarioReport, SweepRow};
use crate::dynamics::{
    closed_form_evolution, excitation_conservation_defect, excitation_number, full_factorization,
    ground_atoms_with_photon, jc_hamiltonian, normalization_constant, rho_atoms_irreducible,
    rho_atoms_limit, rho_atoms_reducible, AtomicDensity, MAX_OSCILLATORS, MM, MP, PM,
};
use crate::entanglement::{
    concurrence, entanglement_entropy, operator_schmidt_coefficients, partial_trace,
    schmidt_coefficients, trace_distance, von_neumann_entropy, Bipartition,
};
use crate::error::{LabError, Result};
use crate::fock;
use crate::linalg::space::{permute_operator, StateVector};
use crate::linalg::{kron, max_abs_diff, unitarity_defect, SpectralPropagator, C64, I};
use crate::representations::{
    build_berezin_with_limits, build_infinity_two_mode, build_reducible_with_limits,
    central_spectral_projectors, ccr_check, vacuum_weight, RepresentationInstance, VacuumProfile,
};

/// Times equal to `π/2` up to this slack count as the maximal-entanglement point.
const TIME_MATCH: f64 = 1e-12;

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    match config.scenario_name()? {
        ScenarioName::Infinity => infinity(config),
        ScenarioName::Berezin => berezin(config),
        ScenarioName::ReducibleBrute => reducible_brute(config),
        ScenarioName::ReducibleLimit => reducible_limit(config),
        ScenarioName::SingleMode => single_mode(config),
    }
}

fn fmt_t(t: f64) -> String {
    format!("{t:.6}")
}

fn atoms_only() -> Bipartition {
    Bipartition::keep(&["atom1", "atom2"])
}

fn atomic_reduction(psi: &StateVector) -> Result<AtomicDensity> {
    AtomicDensity::from_density(partial_trace(&psi.density()?, &atoms_only())?)
}

/// Evolved states and their atomic reductions over the config time grid,
/// with excitation-number bookkeeping asserted into `report`.
struct Trajectory {
    states: Vec<StateVector>,
    atoms: Vec<AtomicDensity>,
}

fn trajectory(
    rep: &RepresentationInstance,
    modes: &[&str],
    cfg: &ScenarioConfig,
    renormalize: bool,
    label: &str,
    report: &mut ScenarioReport,
) -> Result<Trajectory> {
    let pairs: Vec<(&str, usize)> = modes.iter().copied().zip([1, 2]).collect();
    let h = jc_hamiltonian(rep, &pairs)?;
    report.assert(Assertion::at_most(
        format!("{label}: [H, N_exc] vanishes"),
        excitation_conservation_defect(rep, &h),
        cfg.tolerance("commutator"),
    ));
    let psi0 = ground_atoms_with_photon(rep, modes)?;
    let states = crate::dynamics::evolve_grid(rep, &h, &psi0, &cfg.times, renormalize)?;
    let n_exc = excitation_number(rep);
    let n0 = psi0.expectation(&n_exc).re;
    let (mut drift, mut norm_defect) = (0.0f64, 0.0f64);
    for psi in &states {
        drift = drift.max((psi.expectation(&n_exc).re - n0).abs());
        norm_defect = norm_defect.max((psi.norm() - 1.0).abs());
    }
    report.assert(Assertion::at_most(
        format!("{label}: excitation number conserved"),
        drift,
        cfg.tolerance("conservation"),
    ));
    report.assert(Assertion::at_most(
        format!("{label}: norm preserved"),
        norm_defect,
        cfg.tolerance("norm"),
    ));
    let atoms = states.iter().map(atomic_reduction).collect::<Result<_>>()?;
    Ok(Trajectory { states, atoms })
}

/// Concurrence and closed-form distance rows shared by the irreducible scenarios.
fn irreducible_records(
    cfg: &ScenarioConfig,
    variant: &str,
    atoms: &[AtomicDensity],
    report: &mut ScenarioReport,
) -> Result<()> {
    let mut worst_distance = 0.0f64;
    let mut worst_curve = 0.0f64;
    let mut at_half_pi = None;
    for (&t, rho) in cfg.times.iter().zip(atoms) {
        let exact = rho_atoms_irreducible(t);
        let d = trace_distance(rho, &exact)?;
        let c = concurrence(rho);
        worst_distance = worst_distance.max(d);
        worst_curve = worst_curve.max((c - t.sin().powi(2)).abs());
        if (t - FRAC_PI_2).abs() <= TIME_MATCH {
            at_half_pi = Some(c);
        }
        report.record(
            Record::new(variant, Some(t))
                .with("concurrence", c)
                .with("trace_distance_closed_form", d)
                .with("entropy_atom1", von_neumann_entropy(&partial_trace(rho, &Bipartition::keep(&["atom1"]))?))
                .with("entropy_atoms", von_neumann_entropy(rho))
                .with_rho(rho),
        );
    }
    report.assert(Assertion::at_most(
        format!("{variant}: atomic state matches closed form"),
        worst_distance,
        cfg.tolerance("rho_distance"),
    ));
    report.assert(Assertion::at_most(
        format!("{variant}: concurrence follows sin^2 t"),
        worst_curve,
        cfg.tolerance("concurrence_curve"),
    ));
    let name = format!("{variant}: concurrence is 1 at pi/2");
    let tol = cfg.tolerance("concurrence_bell");
    report.assert(match at_half_pi {
        Some(c) => Assertion::at_most(name, (c - 1.0).abs(), tol),
        None => Assertion::skipped(name, tol, "pi/2 not in time grid"),
    });
    Ok(())
}

fn ccr_assertion(rep: &RepresentationInstance, cfg: &ScenarioConfig, label: &str) -> Assertion {
    Assertion::at_most(
        format!("{label}: commutation relations"),
        ccr_check(rep).max_deviation(),
        cfg.tolerance("ccr"),
    )
}

fn infinity(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::Infinity.as_str(), cfg);
    let rep = build_infinity_two_mode(cfg.n_max)?;
    report.assert(ccr_assertion(&rep, cfg, "infinity"));

    let c = C64::from(FRAC_1_SQRT_2);
    let photon = rep.create_on_vacuum(&[("k1", c), ("k2", c)])?.normalized()?;
    let modes_cut = Bipartition::keep(&["mode1"]);
    let entropy = entanglement_entropy(&photon, &modes_cut)?;
    let schmidt = schmidt_coefficients(&photon, &modes_cut)?;
    report.record(
        Record::new("initial photon", None)
            .with("mode_entropy", entropy)
            .with("schmidt_1", schmidt[0])
            .with("schmidt_2", schmidt.get(1).copied().unwrap_or(0.0)),
    );
    report.assert(Assertion::at_most(
        "infinity: initial photon mode entropy is ln 2",
        (entropy - LN_2).abs(),
        cfg.tolerance("entropy"),
    ));

    let traj = trajectory(&rep, &["k1", "k2"], cfg, false, "infinity", &mut report)?;
    irreducible_records(cfg, "infinity", &traj.atoms, &mut report)?;

    // U = U₁ ⊗ U₂ once factors are ordered atom1, mode1, atom2, mode2.
    let h = jc_hamiltonian(&rep, &[("k1", 1), ("k2", 2)])?;
    let prop = SpectralPropagator::new(&h)?;
    let fact = full_factorization(&rep)?;
    let local_a = fock::annihilation(cfg.n_max) * I;
    let split = Bipartition::keep(&["atom1", "mode1"]);
    let (mut worst_product, mut worst_schmidt, mut worst_unitary) = (0.0f64, 0.0f64, 0.0f64);
    for &t in &cfg.times {
        let u = prop.at(t);
        worst_unitary = worst_unitary.max(unitarity_defect(&u));
        let (reordered, _) = permute_operator(&u, &fact, &[0, 2, 1, 3])?;
        let local = closed_form_evolution(&local_a, t)?;
        worst_product = worst_product.max(max_abs_diff(&reordered, &kron(&local, &local)));
        let os = operator_schmidt_coefficients(&u, &fact, &split)?;
        worst_schmidt = worst_schmidt.max(os.get(1).copied().unwrap_or(0.0));
    }
    let tol = cfg.tolerance("locality");
    report.assert(Assertion::at_most("infinity: propagator unitary", worst_unitary, tol));
    report.assert(Assertion::at_most(
        "infinity: propagator is a product of local propagators",
        worst_product,
        tol,
    ));
    report.assert(Assertion::at_most(
        "infinity: propagator operator-Schmidt rank 1 across atom1+mode1",
        worst_schmidt,
        tol,
    ));
    Ok(report)
}

fn berezin(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::Berezin.as_str(), cfg);
    if cfg.d < 2 {
        return Err(LabError::Config(format!("berezin scenario needs d >= 2, got {}", cfg.d)));
    }
    let rep = build_berezin_with_limits(cfg.d, cfg.cutoff, &[1, 2], cfg.limits())?;
    report.assert(ccr_assertion(&rep, cfg, "berezin"));

    let psi0 = ground_atoms_with_photon(&rep, &["f1", "f2"])?;
    let field_cut = Bipartition::keep(&["atom1", "atom2"]);
    let schmidt = schmidt_coefficients(&psi0, &field_cut)?;
    let second = schmidt.get(1).copied().unwrap_or(0.0);
    report.record(
        Record::new("initial state", None)
            .with("schmidt_1", schmidt[0])
            .with("schmidt_2", second)
            .with("field_factors", rep.factorization().len() as f64),
    );
    report.assert(Assertion::at_most(
        "berezin: initial state is a product across atoms|field",
        second,
        cfg.tolerance("schmidt"),
    ));

    let traj = trajectory(&rep, &["f1", "f2"], cfg, false, "berezin", &mut report)?;
    irreducible_records(cfg, "berezin", &traj.atoms, &mut report)?;

    // Same dynamics in the ∞-representation.
    let inf = build_infinity_two_mode(1)?;
    let mut scratch = ScenarioReport::new("scratch", cfg);
    let inf_traj = trajectory(&inf, &["k1", "k2"], cfg, false, "infinity", &mut scratch)?;
    let mut agreement = 0.0f64;
    for (a, b) in traj.atoms.iter().zip(&inf_traj.atoms) {
        agreement = agreement.max(trace_distance(a, b)?);
    }
    report.assert(Assertion::at_most(
        "berezin: atomic state agrees with infinity representation",
        agreement,
        cfg.tolerance("rho_distance"),
    ));

    let h = jc_hamiltonian(&rep, &[("f1", 1), ("f2", 2)])?;
    let prop = SpectralPropagator::new(&h)?;
    let fact = full_factorization(&rep)?;
    let threshold = cfg.tolerance("nonproduct_min");
    for &t in &cfg.times {
        for atom in ["atom1", "atom2"] {
            let name = format!("berezin: propagator entangles {atom} with the rest at t={}", fmt_t(t));
            if t == 0.0 {
                report.assert(Assertion::skipped(name, threshold, "identity at t = 0").comparing(Comparison::AtLeast));
                continue;
            }
            let os = operator_schmidt_coefficients(&prop.at(t), &fact, &Bipartition::keep(&[atom]))?;
            report.assert(Assertion::check(
                name,
                os.get(1).copied().unwrap_or(0.0),
                Comparison::AtLeast,
                threshold,
            ));
        }
    }

    let name = "berezin: Bell pair times vacuum at pi/2";
    let tol = cfg.tolerance("rho_distance");
    match cfg.times.iter().position(|t| (t - FRAC_PI_2).abs() <= TIME_MATCH) {
        Some(i) => {
            let bell_atoms = {
                let mut v = crate::linalg::ComplexVector::zeros(4);
                v[PM] = C64::from(FRAC_1_SQRT_2);
                v[MP] = C64::from(FRAC_1_SQRT_2);
                v
            };
            let target = crate::linalg::kron_vec(&bell_atoms, rep.vacuum().amplitudes());
            let overlap = target.dotc(traj.states[i].amplitudes()).norm_sqr();
            report.assert(Assertion::at_most(name, (1.0 - overlap).abs(), tol));
        }
        None => report.assert(Assertion::skipped(name, tol, "pi/2 not in time grid")),
    }
    Ok(report)
}

/// Profile, coupled labels and `(Z₁, Z₂, Z)` for the reducible scenarios.
struct ProfileChoice {
    profile: VacuumProfile,
    modes: Vec<String>,
    z1: f64,
    z2: f64,
    z: f64,
}

impl ProfileChoice {
    fn from_config(cfg: &ScenarioConfig, count: usize) -> Result<Self> {
        let profile = cfg.profile.build()?;
        let modes = cfg.selected_modes(&profile, count)?;
        let z1 = profile.probability(&modes[0])?;
        let z2 = match modes.get(1) {
            Some(m) => profile.probability(m)?,
            None => 0.0,
        };
        let z = profile.z_max();
        Ok(Self {
            profile,
            modes,
            z1,
            z2,
            z,
        })
    }

    fn mode_refs(&self) -> Vec<&str> {
        self.modes.iter().map(String::as_str).collect()
    }
}

fn reducible_brute(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::ReducibleBrute.as_str(), cfg);
    let choice = ProfileChoice::from_config(cfg, 2)?;
    let modes = choice.mode_refs();
    let (z1, z2, z) = (choice.z1, choice.z2, choice.z);
    let mut built_any = false;
    let mut ceiling = None;
    for n in cfg.oscillator_counts(ScenarioName::ReducibleBrute) {
        let label = format!("N={n}");
        let rep = match build_reducible_with_limits(n as usize, &choice.profile, cfg.n_max, &modes, cfg.limits()) {
            Ok(rep) => rep,
            Err(LabError::Size { dim, ceiling: c }) => {
                ceiling = Some(LabError::Size { dim, ceiling: c });
                report.assert(Assertion::skipped(
                    format!("{label}: brute-force reduction"),
                    cfg.tolerance("reducible_distance"),
                    format!("dimension {dim} exceeds ceiling {c}"),
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        built_any = true;
        report.assert(ccr_assertion(&rep, cfg, &label));
        vacuum_structure(&rep, &choice, cfg, &label, &mut report)?;

        let traj = trajectory(&rep, &modes, cfg, true, &label, &mut report)?;
        let (mut worst, mut worst_coherence, mut worst_concurrence) = (0.0f64, 0.0f64, 0.0f64);
        for (&t, rho) in cfg.times.iter().zip(&traj.atoms) {
            let exact = rho_atoms_reducible(t, n, z1, z2, z)?;
            let d = trace_distance(rho, &exact)?;
            worst = worst.max(d);
            let c = concurrence(rho);
            let c_exact = concurrence(&exact);
            if n == 1 {
                worst_coherence = worst_coherence.max(rho.coherence().norm());
                worst_concurrence = worst_concurrence.max(c);
                report.assert(Assertion::at_most(
                    format!("{label}: closed-form coherence vanishes at t={}", fmt_t(t)),
                    exact.coherence().norm(),
                    0.0,
                ));
            }
            report.record(
                Record::new(label.as_str(), Some(t))
                    .with("concurrence", c)
                    .with("concurrence_closed_form", c_exact)
                    .with("coherence_abs", rho.coherence().norm())
                    .with("population_ground", rho.entry(MM, MM).re)
                    .with("trace_distance_closed_form", d)
                    .with_rho(rho),
            );
        }
        report.assert(Assertion::at_most(
            format!("{label}: atomic state matches finite-N closed form"),
            worst,
            cfg.tolerance("reducible_distance"),
        ));
        if n == 1 {
            report.assert(Assertion::at_most(
                format!("{label}: simulated coherence vanishes"),
                worst_coherence,
                cfg.tolerance("coherence"),
            ));
            report.assert(Assertion::at_most(
                format!("{label}: concurrence vanishes"),
                worst_concurrence,
                cfg.tolerance("coherence"),
            ));
        }
    }
    if !built_any {
        return Err(ceiling.unwrap_or_else(|| LabError::Config("no oscillator counts given".into())));
    }
    Ok(report)
}

/// Vacuum weights of the central projectors, spectral decomposition of
/// `Ī_k`, and the normalization of the one-photon state.
fn vacuum_structure(
    rep: &RepresentationInstance,
    choice: &ProfileChoice,
    cfg: &ScenarioConfig,
    label: &str,
    report: &mut ScenarioReport,
) -> Result<()> {
    let n = match rep.params() {
        crate::representations::RepresentationParams::Reducible { oscillators, .. } => *oscillators as u64,
        _ => unreachable!("reducible scenario builds reducible representations"),
    };
    let e1 = central_spectral_projectors(rep, &choice.modes[0])?;
    let e2 = central_spectral_projectors(rep, &choice.modes[1])?;
    let id = crate::linalg::identity(rep.dim());
    let mut spectral = 0.0f64;
    for (spec, m) in [(&e1, &choice.modes[0]), (&e2, &choice.modes[1])] {
        spectral = spectral.max(max_abs_diff(&spec.resolution_of_identity(), &id));
        spectral = spectral.max(max_abs_diff(&spec.reconstruct(), &rep.mode(m)?.central));
    }
    report.assert(Assertion::at_most(
        format!("{label}: central element spectral decomposition"),
        spectral,
        cfg.tolerance("spectral"),
    ));
    let vac = rep.vacuum();
    let mut worst = 0.0f64;
    for (s, p1) in e1.projectors.iter().enumerate() {
        for (sp, p2) in e2.projectors.iter().enumerate() {
            let brute = vac.expectation(&(p1 * p2)).re;
            let exact = vacuum_weight(n, s as u64, Some(sp as u64), choice.z1, Some(choice.z2))?;
            worst = worst.max((brute - exact).abs());
        }
    }
    report.assert(Assertion::at_most(
        format!("{label}: vacuum weights are multinomial"),
        worst,
        cfg.tolerance("weights"),
    ));
    let c = C64::from(FRAC_1_SQRT_2);
    let unnormalized = rep.create_on_vacuum(&[(&choice.modes[0], c), (&choice.modes[1], c)])?;
    let scale = normalization_constant(choice.z1, choice.z2)?;
    report.assert(Assertion::at_most(
        format!("{label}: one-photon normalization"),
        (unnormalized.norm() * scale - 1.0).abs(),
        cfg.tolerance("norm"),
    ));
    Ok(())
}

/// `D(N, t)` over the config grid, evaluated in parallel and returned in
/// `(N, t)` order.
fn sweep_rows(cfg: &ScenarioConfig, ns: &[u64], choice: &ProfileChoice) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = ns.iter().find(|&&n| n > MAX_OSCILLATORS) {
        return Err(LabError::Domain(format!("N = {bad} exceeds {MAX_OSCILLATORS}")));
    }
    let (z1, z2, z) = (choice.z1, choice.z2, choice.z);
    let points: Vec<(u64, f64)> = ns
        .iter()
        .flat_map(|&n| cfg.times.iter().map(move |&t| (n, t)))
        .collect();
    points
        .par_iter()
        .map(|&(n, t)| {
            let finite = rho_atoms_reducible(t, n, z1, z2, z)?;
            let limit = rho_atoms_limit(t, z1, z2, z)?;
            Ok(SweepRow {
                n,
                t,
                z1,
                z2,
                z,
                d: trace_distance(&finite, &limit)?,
            })
        })
        .collect()
}

fn sweep_into(cfg: &ScenarioConfig, report: &mut ScenarioReport) -> Result<ProfileChoice> {
    let choice = ProfileChoice::from_config(cfg, 2)?;
    let ns = cfg.oscillator_counts(ScenarioName::ReducibleLimit);
    let rows = sweep_rows(cfg, &ns, &choice)?;
    let (n_min, n_max) = (
        *ns.iter().min().expect("validated nonempty"),
        *ns.iter().max().expect("validated nonempty"),
    );
    let d_at = |n: u64, t: f64| {
        rows.iter()
            .find(|r| r.n == n && r.t == t)
            .map(|r| r.d)
            .expect("row exists for every grid point")
    };
    let identity_tol = cfg.tolerance("limit_identity");
    for &t in &cfg.times {
        if t == 0.0 {
            let worst = ns.iter().map(|&n| d_at(n, t)).fold(0.0, f64::max);
            report.assert(Assertion::at_most("D vanishes at t=0", worst, identity_tol));
            continue;
        }
        let name = format!("D(N_max) < D(N_min) at t={}", fmt_t(t));
        if n_min == n_max {
            report.assert(Assertion::skipped(name, 0.0, "single N value").comparing(Comparison::Below));
        } else {
            report.assert(
                Assertion::check(name, d_at(n_max, t), Comparison::Below, d_at(n_min, t))
                    .with_detail(format!("N_min={n_min}, N_max={n_max}")),
            );
        }
        report.assert(Assertion::at_most(
            format!("D(N={n_max}) small at t={}", fmt_t(t)),
            d_at(n_max, t),
            cfg.tolerance("limit_distance"),
        ));
    }
    if choice.z1 == choice.z && choice.z2 == choice.z {
        let mut worst = 0.0f64;
        for &t in &cfg.times {
            let limit = rho_atoms_limit(t, choice.z1, choice.z2, choice.z)?;
            worst = worst.max(max_abs_diff(limit.matrix(), rho_atoms_irreducible(t).matrix()));
        }
        report.assert(Assertion::at_most(
            "limit equals irreducible closed form when Z1 = Z2 = Z",
            worst,
            identity_tol,
        ));
    }
    report.sweep = rows;
    Ok(choice)
}

/// Trace distance between the finite-`N` and limiting atomic states over an
/// `N × t` grid.
pub fn convergence_sweep(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let mut report = ScenarioReport::new("sweep", config);
    sweep_into(config, &mut report)?;
    Ok(report)
}

fn reducible_limit(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::ReducibleLimit.as_str(), cfg);
    let choice = sweep_into(cfg, &mut report)?;
    let mut ns = cfg.oscillator_counts(ScenarioName::ReducibleLimit);
    ns.sort_unstable();
    ns.dedup();
    for &t in &cfg.times {
        let limit = rho_atoms_limit(t, choice.z1, choice.z2, choice.z)?;
        report.record(
            Record::new("limit", Some(t))
                .with("concurrence", concurrence(&limit))
                .with("coherence_abs", limit.coherence().norm())
                .with_rho(&limit),
        );
    }
    for &n in &ns {
        for &t in &cfg.times {
            let rho = rho_atoms_reducible(t, n, choice.z1, choice.z2, choice.z)?;
            let d = report
                .sweep
                .iter()
                .find(|r| r.n == n && r.t == t)
                .map(|r| r.d)
                .expect("sweep covers grid");
            report.record(
                Record::new(format!("N={n}"), Some(t))
                    .with("concurrence", concurrence(&rho))
                    .with("coherence_abs", rho.coherence().norm())
                    .with("trace_distance_limit", d),
            );
        }
    }
    for &t in cfg.times.iter().filter(|&&t| t > 0.0) {
        let ds: Vec<f64> = ns
            .iter()
            .map(|&n| report.sweep.iter().find(|r| r.n == n && r.t == t).expect("sweep covers grid").d)
            .collect();
        let name = format!("D strictly decreasing in N at t={}", fmt_t(t));
        if ds.len() < 2 {
            report.assert(Assertion::skipped(name, 0.0, "single N value").comparing(Comparison::Above));
            continue;
        }
        // Smallest gap D(N_i) − D(N_{i+1}); positive means strictly decreasing.
        let gap = ds.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        report.assert(Assertion::check(name, gap, Comparison::Above, 0.0));
    }
    Ok(report)
}

fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

fn single_mode(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::SingleMode.as_str(), cfg);
    let choice = ProfileChoice::from_config(cfg, 1)?;
    let mode = choice.modes[0].as_str();
    let entropy_tol = cfg.tolerance("entropy");
    let mut built_any = false;
    let mut ceiling = None;
    for n in cfg.oscillator_counts(ScenarioName::SingleMode) {
        let label = format!("N={n}");
        let rep = match build_reducible_with_limits(n as usize, &choice.profile, cfg.n_max, &[mode], cfg.limits()) {
            Ok(rep) => rep,
            Err(LabError::Size { dim, ceiling: c }) => {
                ceiling = Some(LabError::Size { dim, ceiling: c });
                report.assert(Assertion::skipped(
                    format!("{label}: single-mode entropy"),
                    entropy_tol,
                    format!("dimension {dim} exceeds ceiling {c}"),
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        built_any = true;
        let raw = rep.create_on_vacuum(&[(mode, C64::from(1.0))])?;
        report.assert(Assertion::at_most(
            format!("{label}: squared norm of a^+|0> is Z1"),
            (raw.norm().powi(2) - choice.z1).abs(),
            cfg.tolerance("norm"),
        ));
        let psi = raw.normalized()?;
        let cut = Bipartition::keep(&["osc1"]);
        let entropy = entanglement_entropy(&psi, &cut)?;
        let schmidt = schmidt_coefficients(&psi, &cut)?;
        let schmidt_entropy = schmidt
            .iter()
            .map(|l| l * l)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum::<f64>()
            + 0.0;
        let mut record = Record::new(label.as_str(), None)
            .with("entropy", entropy)
            .with("schmidt_entropy", schmidt_entropy)
            .with("schmidt_rank", schmidt.iter().filter(|&&l| l > 1e-12).count() as f64);
        if n == 1 {
            report.assert(
                Assertion::at_most(format!("{label}: entropy vanishes"), entropy.abs(), entropy_tol)
                    .with_detail("one oscillator, no bipartition"),
            );
        } else {
            record.set("entropy_uniform_profile_reference", binary_entropy(1.0 / n as f64));
            report.assert(Assertion::at_least(
                format!("{label}: one oscillator entangled with the rest"),
                entropy,
                cfg.tolerance("entangled_min"),
            ));
            report.assert(Assertion::at_most(
                format!("{label}: entropy agrees with Schmidt spectrum"),
                (entropy - schmidt_entropy).abs(),
                cfg.tolerance("spectral"),
            ));
        }
        report.record(record);
    }
    if !built_any {
        return Err(ceiling.unwrap_or_else(|| LabError::Config("no oscillator counts given".into())));
    }

    let inf = build_infinity_two_mode(cfg.n_max)?;
    let product = rep_single_photon(&inf)?;
    let entropy = entanglement_entropy(&product, &Bipartition::keep(&["mode1"]))?;
    report.record(Record::new("infinity", None).with("entropy", entropy));
    report.assert(Assertion::at_most(
        "infinity: single-mode photon is a product state",
        entropy.abs(),
        entropy_tol,
    ));
    Ok(report)
}

fn rep_single_photon(rep: &RepresentationInstance) -> Result<StateVector> {
    rep.create_on_vacuum(&[("k1", C64::from(1.0))])?.normalized()
}
