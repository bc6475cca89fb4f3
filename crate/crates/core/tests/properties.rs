use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qglt_core::functionals::mono_bound;
use qglt_core::*;

fn tol() -> SolverTolerances {
    SolverTolerances { tol_eig: 1e-11, tol_zero: 1e-10 }
}

fn grid(h: f64, len: f64) -> GridSpec {
    GridSpec::with_length(h, len, BoundaryCondition::Dirichlet).unwrap()
}

fn sampled(seed: u64, n: usize) -> PotentialField {
    ProfileSampler::default().field(&mut ChaCha8Rng::seed_from_u64(seed), StarGraph::new(n).unwrap())
}

fn spectrum(field: &PotentialField, g: &GridSpec) -> Spectrum {
    let op = assemble_star(field.graph(), field, g).unwrap();
    negative_spectrum(&op, tol()).unwrap()
}

fn close(a: &[f64], b: &[f64], eps: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= eps * (1.0 + x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratio_is_invariant_under_scaling(seed in any::<u64>(), n in 1usize..5, k in 1u32..3) {
        let lambda = 2f64.powi(k as i32);
        let field = sampled(seed, n);
        let scaled = PotentialField::new(
            field.graph(),
            field.edges().iter().map(|e| scale_potential(e, lambda)).collect(),
        ).unwrap();
        let g = grid(0.05, 6.0);
        let a = lt_ratio(&field, 1.0, &g, tol()).unwrap();
        let b = lt_ratio(&scaled, 1.0, &g.scaled(lambda), tol()).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-9 * (1.0 + a.ratio));
    }

    #[test]
    fn relabelling_edges_keeps_the_spectrum(seed in any::<u64>(), n in 2usize..6, shift in 1usize..5) {
        let field = sampled(seed, n);
        let mut edges = field.edges().to_vec();
        edges.rotate_left(shift % n);
        let rotated = PotentialField::new(field.graph(), edges).unwrap();
        let g = grid(0.05, 6.0);
        prop_assert!(close(&spectrum(&field, &g).eigenvalues, &spectrum(&rotated, &g).eigenvalues, 1e-9));
    }

    #[test]
    fn inertia_is_monotone_in_the_shift(seed in any::<u64>(), n in 1usize..5) {
        let field = sampled(seed, n);
        let op = assemble_star(field.graph(), &field, &grid(0.05, 6.0)).unwrap();
        let floor = field.min_value().min(0.0) - 1.0;
        let counts: Vec<usize> = (0..=12).map(|i| inertia(&op, floor * (1.0 - i as f64 / 12.0)).unwrap()).collect();
        prop_assert_eq!(counts[0], 0);
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvalues_lie_above_the_potential_minimum(seed in any::<u64>(), n in 1usize..6) {
        let field = sampled(seed, n);
        let spec = spectrum(&field, &grid(0.05, 6.0));
        let floor = field.min_value();
        prop_assert!(spec.eigenvalues.iter().all(|&e| e > floor && e < 0.0));
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn longer_dirichlet_edges_lower_every_level(seed in any::<u64>(), n in 1usize..5) {
        let field = sampled(seed, n);
        let short = spectrum(&field, &grid(0.05, 4.0));
        let long = spectrum(&field, &grid(0.05, 8.0));
        prop_assert!(long.len() >= short.len());
        for (l, s) in long.eigenvalues.iter().zip(&short.eigenvalues) {
            prop_assert!(*l <= s + 1e-10);
        }
    }

    #[test]
    fn deeper_potentials_have_larger_riesz_means(seed in any::<u64>(), n in 1usize..5, gamma in 0.5f64..3.0) {
        let field = sampled(seed, n);
        let deeper = PotentialField::new(
            field.graph(),
            field.edges().iter().map(|e| EdgePotential::new(
                e.segments().iter().map(|s| Segment::new(s.len, s.val - 0.5)).collect()
            ).unwrap()).collect(),
        ).unwrap();
        let g = grid(0.05, 6.0);
        prop_assert!(riesz_mean(&spectrum(&deeper, &g), gamma) >= riesz_mean(&spectrum(&field, &g), gamma) - 1e-12);
    }

    #[test]
    fn even_cut_dominates_the_star(seed in any::<u64>(), half in 1usize..4) {
        let field = sampled(seed, 2 * half);
        let g = grid(0.05, 6.0);
        let star = spectrum(&field, &g);
        let lines = assemble_cut_even(field.graph(), &field, &g).unwrap();
        let cut = negative_spectrum(&DiscreteOperator::direct_sum(lines), tol()).unwrap();
        prop_assert!(cut.len() >= star.len());
        for (s, c) in star.eigenvalues.iter().zip(&cut.eigenvalues) {
            prop_assert!(*s >= c - 1e-9);
        }
    }

    #[test]
    fn discrete_levels_track_the_oracle(seed in any::<u64>(), n in 1usize..4) {
        let field = sampled(seed, n);
        let oracle = secular_bound_states(field.graph(), &field, None).unwrap();
        let discrete = spectrum(&field, &grid(0.01, 30.0));
        let deep: Vec<f64> = oracle.eigenvalues.iter().copied().filter(|&e| e < -0.1).collect();
        prop_assert!(discrete.len() >= deep.len());
        for (d, o) in discrete.eigenvalues.iter().zip(&deep) {
            prop_assert!((d - o).abs() <= 2e-3 * (1.0 + o.abs()));
        }
    }
}

#[test]
fn free_star_has_no_bound_states() {
    let field = PotentialField::zero(StarGraph::new(4).unwrap());
    assert!(spectrum(&field, &grid(0.05, 4.0)).is_empty());
    assert!(matches!(lt_ratio(&field, 1.0, &grid(0.05, 4.0), tol()), Err(Error::ZeroNorm)));
}

#[test]
fn bound_checks_reject_bad_inputs() {
    let g = grid(0.05, 4.0);
    let even = sampled(1, 4);
    assert!(matches!(check_split_bound(&even, 1.0, &g, tol()), Err(Error::EvenEdgeCount(4))));
    assert!(matches!(mono_bound(5, 2, 1.5, None), Err(Error::ParityViolation { .. })));
    let one = sampled(2, 1);
    assert!(check_theorem2(&one, 1.0, &g, tol()).is_err());
    assert!(matches!(check_theorem1(&one, 0.25, &g, tol()), Err(Error::GammaOutOfRange(_))));
}
