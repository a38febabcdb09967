//! Conflict graphs and coloring.

mod common;

use colearn::classes::{make_all_functions, make_explicit};
use colearn::data::{Dataset, LabeledExample};
use colearn::graph::{approx_color, build_conflict_graph, coloring_budget, exact_color, greedy_color, two_color, Coloring, Graph, OddCycle};
use colearn::harness::{generate_planted, PlantMode};
use colearn::par::Execution;
use colearn::rng::RngStream;
use proptest::prelude::*;
use rand::Rng;

use common::brute_colorable;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

/// A random graph properly colored by a hidden `k`-coloring.
fn planted_colorable(n: usize, k: usize, p: f64, seed: u64) -> Graph {
    let mut rng = RngStream::root(seed).rng();
    let hidden: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if hidden[u] != hidden[v] && rng.random_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_color_or_odd_cycle(g in graph_strategy(12)) {
        match two_color(&g) {
            Ok(c) => {
                prop_assert!(c.is_proper(&g));
                prop_assert!(c.num_colors() <= 2);
            }
            Err(OddCycle(cycle)) => {
                prop_assert!(cycle.len() % 2 == 1);
                for i in 0..cycle.len() {
                    prop_assert!(g.has_edge(cycle[i], cycle[(i + 1) % cycle.len()]));
                }
                prop_assert!(!brute_colorable(&g, 2));
            }
        }
    }

    #[test]
    fn exact_color_matches_brute_force(g in graph_strategy(7), k in 1usize..4) {
        let got = exact_color(&g, k).unwrap();
        prop_assert_eq!(got.is_some(), brute_colorable(&g, k));
        if let Some(c) = got {
            prop_assert!(c.is_proper(&g));
            prop_assert!(c.num_colors() <= k);
        }
    }

    #[test]
    fn greedy_and_approx_are_proper(g in graph_strategy(30), k in 1usize..5) {
        prop_assert!(greedy_color(&g).is_proper(&g));
        let a = approx_color(&g, k).unwrap();
        prop_assert!(a.coloring.is_proper(&g));
        if !a.promise_violated {
            prop_assert!(a.coloring.num_colors() <= a.budget);
        }
    }

    #[test]
    fn fast_and_generic_conflict_graphs_agree(
        d in 2usize..5,
        raw in prop::collection::vec(prop::collection::vec((0usize..4, any::<bool>()), 1..4), 1..10),
    ) {
        let fast = make_all_functions(d).unwrap();
        let generic = make_explicit(d, fast.enumerate().unwrap(), None).unwrap();
        let datasets: Vec<Dataset> = raw
            .iter()
            .map(|s| Dataset::from_examples(s.iter().map(|&(p, y)| LabeledExample::new(p % d, y)).collect()))
            .collect();
        let a = build_conflict_graph(&fast, &datasets, Execution::Sequential).unwrap();
        let b = build_conflict_graph(&generic, &datasets, Execution::Sequential).unwrap();
        let c = build_conflict_graph(&fast, &datasets, Execution::Parallel).unwrap();
        prop_assert_eq!(a.edges(), b.edges());
        prop_assert_eq!(a.edges(), c.edges());
    }
}

#[test]
fn three_colorable_graphs_stay_within_budget() {
    for seed in 0..40u64 {
        let n = 20 + (seed as usize * 37) % 181;
        let g = planted_colorable(n, 3, 0.3, seed);
        let a = approx_color(&g, 3).unwrap();
        assert!(a.coloring.is_proper(&g));
        assert!(!a.promise_violated);
        let sqrt = (n as f64).sqrt().ceil() as usize;
        assert!(a.coloring.num_colors() <= 3 * sqrt, "n={n}: {} colors", a.coloring.num_colors());
        assert!(coloring_budget(n, 3) <= 3 * sqrt);
    }
}

#[test]
fn planted_assignment_colors_the_conflict_graph() {
    let class = make_all_functions(5).unwrap();
    for t in 0..50u64 {
        let k = 2 + (t % 3) as usize;
        let inst = generate_planted(&class, 12, k, 0.0, PlantMode::RefutableExact, RngStream::new(t, 0)).unwrap();
        let mut rng = RngStream::new(t, 1).rng();
        let datasets: Vec<Dataset> = inst
            .distributions
            .iter()
            .map(|d| Dataset::from_examples((0..5).map(|_| d.draw(&mut rng)).collect()))
            .collect();
        let g = build_conflict_graph(&class, &datasets, Execution::Sequential).unwrap();
        assert!(Coloring::from_colors(&inst.assignment).is_proper(&g));
        assert!(exact_color(&g, k).unwrap().is_some());
    }
}
