use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fracrev::graph::{
    cartesian_product, coarsest_equitable_refinement, random_connected, read_graph, write_graph,
    WeightedGraph,
};
use fracrev::number::{classify, rationalize, ratio_condition, MAX_DEN, RATIONAL_TOL};
use fracrev::spectral::SpectralDecomposition;
use fracrev::walk::transition_matrix;

const TOL_WALK: f64 = 1e-8;

fn graph(seed: u64, n: usize) -> WeightedGraph {
    random_connected(n, 0.3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn walk(g: &WeightedGraph, t: f64) -> DMatrix<Complex64> {
    transition_matrix(&SpectralDecomposition::of_graph(g).unwrap(), t)
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn walk_is_unitary(seed in any::<u64>(), n in 1usize..12, t in 0.0f64..20.0) {
        let u = walk(&graph(seed, n), t);
        let err = (u.adjoint() * &u - DMatrix::identity(n, n)).camax();
        prop_assert!(err < TOL_WALK, "‖U*U − I‖ = {err:e}");
    }

    #[test]
    fn walk_is_symmetric(seed in any::<u64>(), n in 1usize..12, t in 0.0f64..20.0) {
        let u = walk(&graph(seed, n), t);
        prop_assert!((u.transpose() - &u).camax() < TOL_WALK);
    }

    #[test]
    fn group_law(seed in any::<u64>(), n in 1usize..10, s in 0.0f64..10.0, t in 0.0f64..10.0) {
        let g = graph(seed, n);
        let d = SpectralDecomposition::of_graph(&g).unwrap();
        let err = (transition_matrix(&d, s) * transition_matrix(&d, t) - transition_matrix(&d, s + t)).camax();
        prop_assert!(err < TOL_WALK, "{err:e}");
    }

    #[test]
    fn product_walk_factorizes(sx in any::<u64>(), sy in any::<u64>(), nx in 1usize..6, ny in 1usize..6, t in 0.0f64..10.0) {
        let (x, y) = (graph(sx, nx), graph(sy, ny));
        let lhs = walk(&cartesian_product(&x, &y), t);
        let rhs = kron(&walk(&x, t), &walk(&y, t));
        prop_assert!((lhs - rhs).camax() < TOL_WALK);
    }

    #[test]
    fn rationalize_recovers_fractions(p in -1000i64..1000, q in 1u64..1000) {
        let x = p as f64 / q as f64;
        let r = rationalize(x, MAX_DEN, RATIONAL_TOL).expect("small fractions are rational");
        prop_assert_eq!(r.numerator as i128 * q as i128, p as i128 * r.denominator as i128);
    }

    #[test]
    fn ratio_condition_is_affine_invariant(
        ints in prop::collection::vec(-20i64..20, 3..7),
        irrational in any::<bool>(),
        scale in 0.1f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let mut values: Vec<f64> = ints.iter().map(|&k| k as f64).collect();
        if irrational {
            values.push(2f64.sqrt() * 3.0);
        }
        let moved: Vec<f64> = values.iter().map(|v| scale * v + shift).collect();
        prop_assert_eq!(ratio_condition(&values).holds, ratio_condition(&moved).holds);
    }

    #[test]
    fn classification_reconstructs(
        a_plus in -6i64..6,
        a_minus in -6i64..6,
        delta in prop::sample::select(vec![2u64, 3, 5, 6, 7, 10, 11]),
        b_plus in prop::collection::btree_set(-6i64..6, 2..4),
        b_minus in prop::collection::btree_set(-6i64..6, 2..4),
    ) {
        let root = (delta as f64).sqrt();
        let vals = |a: i64, bs: &std::collections::BTreeSet<i64>| -> Vec<f64> {
            bs.iter().rev().map(|&b| (a as f64 + b as f64 * root) / 2.0).collect()
        };
        let (plus, minus) = (vals(a_plus, &b_plus), vals(a_minus, &b_minus));
        let c = classify(&plus, &minus).unwrap();
        prop_assert_eq!(c.delta, delta);
        let (rp, rm) = c.reconstruct();
        let err = rp.iter().zip(&plus).chain(rm.iter().zip(&minus)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-7, "{err:e}");
    }

    #[test]
    fn refinement_is_idempotent(seed in any::<u64>(), n in 2usize..12, pin in 0usize..12) {
        let g = graph(seed, n);
        let pin = pin % n;
        let rest: Vec<usize> = (0..n).filter(|&v| v != pin).collect();
        let p = coarsest_equitable_refinement(&g, &[vec![pin], rest]).unwrap();
        let again = coarsest_equitable_refinement(&g, p.cells()).unwrap();
        prop_assert_eq!(p.cells(), again.cells());
        prop_assert!(p.is_singleton(pin));
    }

    #[test]
    fn graph_file_round_trip(seed in any::<u64>(), n in 1usize..15) {
        let g = graph(seed, n);
        let back = read_graph(&write_graph(&g)).unwrap();
        prop_assert_eq!(back.weights(), g.weights());
    }
}
