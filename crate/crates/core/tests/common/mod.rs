//! Brute-force oracles shared by the integration tests. None of them call
//! into the solvers they are used to check.

#![allow(dead_code)]

use colearn::classes::{threshold_hypothesis, ClassKind, HypothesisClass};
use colearn::data::{Dataset, Hypothesis, LabeledExample};
use colearn::graph::Graph;
use rand::Rng;

/// Every behaviorally distinct hypothesis of a small class, including
/// threshold classes (by listing all budget-respecting `theta`).
pub fn all_hypotheses(class: &HypothesisClass) -> Vec<Hypothesis> {
    if let ClassKind::ThresholdBudget { d } = class.kind() {
        let budget = 1u64 << d;
        let mut out = Vec::new();
        let mut theta = vec![0u64; *d as usize];
        loop {
            if theta.iter().sum::<u64>() <= budget {
                out.push(threshold_hypothesis(class.space(), &theta));
            }
            let mut i = 0;
            loop {
                if i == theta.len() {
                    out.sort_by_key(|h| h.to_labels());
                    out.dedup();
                    return out;
                }
                theta[i] += 1;
                if theta[i] <= budget {
                    break;
                }
                theta[i] = 0;
                i += 1;
            }
        }
    }
    class.enumerate().expect("small class")
}

fn mistakes(h: &Hypothesis, s: &Dataset) -> usize {
    s.iter().filter(|e| h.label(e.point) != e.label).count()
}

/// Calls `f` on every assignment in `[k]^n`; stops early when `f` returns true.
pub fn for_each_assignment(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    let mut c = vec![0usize; n];
    loop {
        if f(&c) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            c[i] += 1;
            if c[i] < k {
                break;
            }
            c[i] = 0;
            i += 1;
        }
    }
}

/// Whether some assignment of datasets to `k` groups leaves every group
/// consistent with a single hypothesis.
pub fn brute_feasible(hyps: &[Hypothesis], datasets: &[Dataset], k: usize) -> bool {
    let fits: Vec<Vec<bool>> = datasets
        .iter()
        .map(|s| hyps.iter().map(|h| mistakes(h, s) == 0).collect())
        .collect();
    for_each_assignment(datasets.len(), k, |c| {
        (0..k).all(|g| {
            (0..hyps.len()).any(|h| c.iter().enumerate().all(|(i, &ci)| ci != g || fits[i][h]))
        })
    })
}

/// Minimum total mistakes over all assignments and hypothesis choices.
pub fn brute_min(hyps: &[Hypothesis], datasets: &[Dataset], k: usize) -> usize {
    let m: Vec<Vec<usize>> = datasets
        .iter()
        .map(|s| hyps.iter().map(|h| mistakes(h, s)).collect())
        .collect();
    let mut best = usize::MAX;
    for_each_assignment(datasets.len(), k, |c| {
        let total: usize = (0..k)
            .map(|g| {
                (0..hyps.len())
                    .map(|h| c.iter().enumerate().filter(|&(_, &ci)| ci == g).map(|(i, _)| m[i][h]).sum::<usize>())
                    .min()
                    .unwrap_or(0)
            })
            .sum();
        best = best.min(total);
        false
    });
    best
}

/// Whether `g` has a proper coloring with `k` colors, by trying them all.
pub fn brute_colorable(g: &Graph, k: usize) -> bool {
    let edges = g.edges();
    for_each_assignment(g.n(), k, |c| edges.iter().all(|&(u, v)| c[u] != c[v]))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative per isomorphism class of graphs on `n` vertices.
pub fn graphs_up_to_isomorphism(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let index = |u: usize, v: usize| {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    let perms = permutations(n);
    let mut seen = vec![false; 1 << pairs.len()];
    let mut out = Vec::new();
    for mask in 0..1usize << pairs.len() {
        if seen[mask] {
            continue;
        }
        for p in &perms {
            let mut image = 0usize;
            for (b, &(u, v)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    image |= 1 << index(p[u], p[v]);
                }
            }
            seen[image] = true;
        }
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|&(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
        out.push(Graph::from_edges(n, &edges).unwrap());
    }
    out
}

/// `n` datasets of 1..=max_len examples over `points` points. With
/// `planted = Some(k)`, labels come from `k` random members of `hyps`.
pub fn random_datasets<R: Rng>(
    rng: &mut R,
    hyps: &[Hypothesis],
    points: &[usize],
    n: usize,
    max_len: usize,
    planted: Option<usize>,
) -> Vec<Dataset> {
    let chosen: Vec<&Hypothesis> = match planted {
        Some(k) => (0..k).map(|_| &hyps[rng.random_range(0..hyps.len())]).collect(),
        None => Vec::new(),
    };
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            let h = (!chosen.is_empty()).then(|| chosen[rng.random_range(0..chosen.len())]);
            Dataset::from_examples(
                (0..len)
                    .map(|_| {
                        let x = points[rng.random_range(0..points.len())];
                        let y = match h {
                            Some(h) => h.label(x),
                            None => rng.random_bool(0.5),
                        };
                        LabeledExample::new(x, y)
                    })
                    .collect(),
            )
        })
        .collect()
}
