//! Reductions and VC bounds against independent checks.

mod common;

use colearn::classes::make_all_functions;
use colearn::erm::augmented_erm_feasible;
use colearn::graph::Graph;
use colearn::reductions::{
    coloring_to_erm, coverage_failure_bound, erm_to_distributional, min_coverage_samples, sparsified_vertex_count,
    sparsify_coloring, subset_sum_exists, subsetsum_to_erm, SubsetSumInstance,
};
use colearn::vcdim::{augment_class, sauer_bound, sauer_bound_ln, vc_bound_threshold, vc_dimension};
use proptest::prelude::*;

use common::brute_colorable;

fn binomial(m: usize, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, j| acc * (m - j) as f64 / (j + 1) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn subset_sum_dp_matches_enumeration(values in prop::collection::vec(0u64..20, 0..8), t in 0u64..60) {
        let brute = (0u32..1 << values.len()).any(|mask| {
            (0..values.len()).filter(|&i| mask >> i & 1 == 1).map(|i| values[i]).sum::<u64>() == t
        });
        prop_assert_eq!(subset_sum_exists(&values, t), brute);
    }

    #[test]
    fn padded_instance_sums_and_feasibility(values in prop::collection::vec(0u64..40, 1..6), frac in 0.0f64..=1.0) {
        let s: u64 = values.iter().sum();
        prop_assume!(s > 0);
        let t = (frac * s as f64).round() as u64;
        let inst = SubsetSumInstance::new(values.clone(), t).unwrap();
        let padded = inst.padded().unwrap();
        let n = padded.len();
        prop_assert_eq!(padded.iter().sum::<u64>(), 1u64 << (n + 1));
        prop_assert_eq!(n, (values.len() + 2).max(64 - s.leading_zeros() as usize));
        let feasible = augmented_erm_feasible(&subsetsum_to_erm(&inst).unwrap()).unwrap();
        prop_assert_eq!(feasible.is_some(), inst.is_feasible());
        if let Some(sol) = feasible {
            // the datasets grouped together sum to exactly 2^n
            let group0: u64 = (0..n).filter(|&i| sol.assignment[i] == sol.assignment[0]).map(|i| padded[i]).sum();
            prop_assert_eq!(group0, 1u64 << n);
        }
    }

    #[test]
    fn coloring_reduction_on_random_graphs(
        n in 1usize..7,
        pairs in prop::collection::vec((0usize..7, 0usize..7), 0..15),
        k in 1usize..4,
    ) {
        let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|&(u, v)| u < n && v < n && u != v).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let inst = coloring_to_erm(&g, k).unwrap();
        let sol = augmented_erm_feasible(&inst).unwrap();
        prop_assert_eq!(sol.is_some(), brute_colorable(&g, k));
        if let Some(sol) = sol {
            for (u, v) in g.edges() {
                prop_assert_ne!(sol.assignment[u], sol.assignment[v]);
            }
        }
        let dists = erm_to_distributional(&inst).unwrap();
        prop_assert!(dists.iter().all(|d| d.support().len() <= n));
    }

    #[test]
    fn gadget_size_and_degree(
        n in 3usize..7,
        pairs in prop::collection::vec((0usize..7, 0usize..7), 0..15),
        k in 3usize..6,
    ) {
        let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|&(u, v)| u < n && v < n && u != v).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let h = sparsify_coloring(&g, k).unwrap();
        prop_assert_eq!(h.n(), sparsified_vertex_count(n, k));
        prop_assert!(h.max_degree() < 2 * k);
    }

    #[test]
    fn sauer_bound_matches_binomial_sum(m in 0usize..60, d in 1usize..10) {
        let direct: f64 = (0..=d.min(m)).map(|i| binomial(m, i)).sum();
        let bound = sauer_bound(m, d);
        prop_assert!(bound >= direct * (1.0 - 1e-9));
        if m <= d {
            prop_assert!((bound - (m as f64).exp()).abs() <= 1e-9 * bound);
        }
        prop_assert!((sauer_bound_ln(m, d).exp() - bound).abs() <= 1e-6 * bound.max(1.0));
    }
}

#[test]
fn vc_threshold_examples() {
    assert_eq!(vc_bound_threshold(1, 1, 1).unwrap(), 4);
    assert!(vc_bound_threshold(0, 1, 1).is_err());
    assert!(vc_bound_threshold(1, 1, 2).is_err());
    for (d, n, k) in [(1, 2, 2), (2, 3, 2), (3, 4, 2)] {
        let m = vc_bound_threshold(d, n, k).unwrap();
        let lhs = |m: usize| {
            let kd = (k * d) as f64;
            n as f64 * (k as f64).ln() + kd * (std::f64::consts::E * m as f64 / kd).ln()
        };
        assert!(lhs(m) < m as f64 * 2f64.ln());
        if m > k * d {
            assert!(lhs(m - 1) >= (m - 1) as f64 * 2f64.ln());
        }
    }
}

#[test]
fn augmented_vc_dimension_of_singleton_class() {
    // two points, n = 2, k = 2: each distribution's slice of the product
    // space is labeled independently once k = n
    let class = make_all_functions(2).unwrap();
    let aug = augment_class(&class, 2, 2).unwrap();
    assert_eq!(vc_dimension(&aug, 16).unwrap().value(), 4);
    let aug1 = augment_class(&class, 2, 1).unwrap();
    assert_eq!(vc_dimension(&aug1, 16).unwrap().value(), 2);
}

#[test]
fn coverage_examples() {
    assert_eq!(min_coverage_samples(2, 5, 0.01), 31);
    assert!(coverage_failure_bound(2, 5, 31) <= 0.01);
}

#[test]
fn gadget_preserves_three_colorability_on_small_graphs() {
    for n in 3..=5 {
        for g in common::graphs_up_to_isomorphism(n) {
            let h = sparsify_coloring(&g, 3).unwrap();
            assert_eq!(colearn::graph::exact_color(&h, 3).unwrap().is_some(), brute_colorable(&g, 3));
        }
    }
}
