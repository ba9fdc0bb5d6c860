use ccrlab_core::dynamics::{closed_form_evolution, two_block_generator, AtomicDensity};
use ccrlab_core::entanglement::{
    concurrence, entanglement_entropy, partial_trace, schmidt_coefficients, trace_distance, Bipartition,
};
use ccrlab_core::linalg::random::{random_density, random_hermitian, random_matrix, random_unitary, seeded};
use ccrlab_core::linalg::{
    expm_generator, kron, matrix_function_psd, max_abs_diff, unitarity_defect,
};
use ccrlab_core::weights::{binomial_weight, multinomial_weight};
use ccrlab_core::{DensityMatrix, HilbertFactorization, StateVector};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
        let mut rng = seeded(seed);
        let a = random_matrix(&mut rng, da, da);
        let b = random_matrix(&mut rng, db, db);
        let c = random_matrix(&mut rng, dc, dc);
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(max_abs_diff(&left, &right) <= 1e-12);
    }

    #[test]
    fn kron_of_unitaries_is_unitary(seed in any::<u64>(), da in 1usize..6, db in 1usize..6) {
        let mut rng = seeded(seed);
        let u = kron(&random_unitary(&mut rng, da), &random_unitary(&mut rng, db));
        prop_assert!(unitarity_defect(&u) <= 1e-12);
    }

    #[test]
    fn matrix_function_composes(seed in any::<u64>(), dim in 1usize..7) {
        let mut rng = seeded(seed);
        let p = random_density(&mut rng, dim, dim);
        // √(P²) = P for positive P.
        let sq = matrix_function_psd(&p, |x| x * x).unwrap();
        let back = matrix_function_psd(&sq, f64::sqrt).unwrap();
        prop_assert!(max_abs_diff(&back, &p) <= 1e-9);
    }

    #[test]
    fn propagator_group_property(seed in any::<u64>(), dim in 1usize..7, s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let mut rng = seeded(seed);
        let h = random_hermitian(&mut rng, dim);
        let lhs = expm_generator(&h, s).unwrap() * expm_generator(&h, t).unwrap();
        prop_assert!(max_abs_diff(&lhs, &expm_generator(&h, s + t).unwrap()) <= 1e-10);
    }

    #[test]
    fn closed_form_matches_exponential(seed in any::<u64>(), dim in 1usize..7, t in 0.0f64..6.3) {
        let mut rng = seeded(seed);
        let a = random_matrix(&mut rng, dim, dim);
        let u = closed_form_evolution(&a, t).unwrap();
        let v = expm_generator(&two_block_generator(&a), t).unwrap();
        prop_assert!(max_abs_diff(&u, &v) <= 1e-9);
        prop_assert!(unitarity_defect(&u) <= 1e-9);
    }

    #[test]
    fn concurrence_invariant_under_local_unitaries(seed in any::<u64>(), rank in 1usize..5) {
        let mut rng = seeded(seed);
        let rho = AtomicDensity::new(random_density(&mut rng, 4, rank)).unwrap();
        let local = kron(&random_unitary(&mut rng, 2), &random_unitary(&mut rng, 2));
        let rotated = AtomicDensity::new(&local * rho.matrix() * local.adjoint()).unwrap();
        let (c, c_rot) = (concurrence(&rho), concurrence(&rotated));
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!((c - c_rot).abs() <= 1e-7, "{} vs {}", c, c_rot);
    }

    #[test]
    fn partial_trace_is_affine(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let f = HilbertFactorization::new([("A", 2), ("B", 3)]).unwrap();
        let rho = DensityMatrix::new(random_density(&mut rng, 6, 2), f.clone()).unwrap();
        let sigma = DensityMatrix::new(random_density(&mut rng, 6, 6), f).unwrap();
        let keep = Bipartition::keep(&["B"]);
        let mixed = partial_trace(&rho.mix(&sigma, p).unwrap(), &keep).unwrap();
        let separate = partial_trace(&rho, &keep).unwrap().mix(&partial_trace(&sigma, &keep).unwrap(), p).unwrap();
        prop_assert!(max_abs_diff(mixed.matrix(), separate.matrix()) <= 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), dim in 2usize..6) {
        let mut rng = seeded(seed);
        let f = HilbertFactorization::single("S", dim).unwrap();
        let mk = |m| DensityMatrix::new(m, f.clone()).unwrap();
        let (a, b, c) = (
            mk(random_density(&mut rng, dim, 1)),
            mk(random_density(&mut rng, dim, dim)),
            mk(random_density(&mut rng, dim, 2)),
        );
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() <= 1e-12);
        prop_assert!(trace_distance(&a, &c).unwrap() <= ab + trace_distance(&b, &c).unwrap() + 1e-12);
    }

    #[test]
    fn schmidt_squares_are_marginal_spectrum(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut rng = seeded(seed);
        let f = HilbertFactorization::new([("A", da), ("B", db)]).unwrap();
        let v = random_matrix(&mut rng, da * db, 1).column(0).into_owned();
        let psi = StateVector::new(v, f).unwrap().normalized().unwrap();
        let keep = Bipartition::keep(&["A"]);
        let mut squares: Vec<f64> = schmidt_coefficients(&psi, &keep).unwrap().iter().map(|l| l * l).collect();
        let mut spectrum = partial_trace(&psi.density().unwrap(), &keep).unwrap().spectrum();
        spectrum.sort_by(|a, b| b.total_cmp(a));
        squares.resize(spectrum.len(), 0.0);
        for (x, y) in squares.iter().zip(&spectrum) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        let sa = entanglement_entropy(&psi, &keep).unwrap();
        let sb = entanglement_entropy(&psi, &Bipartition::keep(&["B"])).unwrap();
        prop_assert!((sa - sb).abs() <= 1e-10);
    }

    #[test]
    fn binomial_weights_are_probabilities(n in 1u64..2000, z in 0.0f64..=1.0) {
        let total: f64 = (0..=n).map(|s| binomial_weight(n, s, z).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn multinomial_marginalizes_to_binomial(n in 1u64..60, s in 0u64..60, z1 in 0.01f64..0.5, z2 in 0.01f64..0.5) {
        prop_assume!(s <= n);
        let marginal: f64 = (0..=n).map(|sp| multinomial_weight(n, s, sp, z1, z2).unwrap()).sum();
        let b = binomial_weight(n, s, z1).unwrap();
        prop_assert!((marginal - b).abs() <= 1e-13 + 1e-12 * b);
    }
}
