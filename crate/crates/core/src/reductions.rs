//! Instance generators that encode graph coloring and subset sum as
//! augmented ERM, the bounded-degree coloring gadget, and the randomized
//! version of the ERM instances.

use serde::{Deserialize, Serialize};

use crate::classes::{make_all_functions, make_threshold_budget};
use crate::data::{DataDistribution, Dataset, LabeledExample};
use crate::erm::ErmInstance;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// One dataset per vertex over `all_functions(|V|)`: vertex `v` is labeled 1
/// at its own point and 0 at each neighbor's point. Feasible with `k`
/// hypotheses iff the graph is `k`-colorable.
pub fn coloring_to_erm(g: &Graph, k: usize) -> Result<ErmInstance> {
    let n = g.n();
    let class = make_all_functions(n)?;
    let datasets = (0..n)
        .map(|v| {
            let mut s = Dataset::new();
            s.push(LabeledExample::new(v, true));
            for u in g.neighbors(v) {
                s.push(LabeledExample::new(u, false));
            }
            s
        })
        .collect();
    ErmInstance::new(class, datasets, k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumInstance {
    pub values: Vec<u64>,
    pub target: u64,
}

/// Largest padded length accepted; threshold hypotheses are materialized
/// over `n (2^n + 1)` points.
pub const MAX_SUBSET_SUM_PADDED: usize = 16;

impl SubsetSumInstance {
    pub fn new(values: Vec<u64>, target: u64) -> Result<Self> {
        let s: u64 = values.iter().sum();
        if s == 0 {
            return Err(Error::invalid("values must sum to at least 1"));
        }
        if target > s {
            return Err(Error::invalid(format!("target {target} exceeds the sum {s}")));
        }
        Ok(SubsetSumInstance { values, target })
    }

    pub fn sum(&self) -> u64 {
        self.values.iter().sum()
    }

    /// The equivalent instance with `n = max(m + 2, floor(log2 s) + 1)`
    /// numbers summing to `2^(n+1)` and target `2^n`: zeros, then
    /// `2^n - t` and `2^n - (s - t)`.
    pub fn padded(&self) -> Result<Vec<u64>> {
        let m = self.values.len();
        let s = self.sum();
        let log2_s = 63 - s.leading_zeros() as usize;
        let n = (m + 2).max(log2_s + 1);
        if n > 62 {
            return Err(Error::capacity(format!("padded length {n} overflows 64-bit values")));
        }
        let big = 1u64 << n;
        let mut out = self.values.clone();
        out.resize(n - 2, 0);
        out.push(big - self.target);
        out.push(big - (s - self.target));
        debug_assert_eq!(out.iter().sum::<u64>(), big << 1);
        Ok(out)
    }

    /// Whether some subset hits the target (pseudo-polynomial DP).
    pub fn is_feasible(&self) -> bool {
        subset_sum_exists(&self.values, self.target)
    }
}

/// Whether some subset of `values` sums to exactly `target`.
pub fn subset_sum_exists(values: &[u64], target: u64) -> bool {
    let t = target as usize;
    let mut reach = vec![false; t + 1];
    reach[0] = true;
    for &a in values {
        let a = a as usize;
        if a > t {
            continue;
        }
        for x in (a..=t).rev() {
            if reach[x - a] {
                reach[x] = true;
            }
        }
    }
    reach[t]
}

/// Singleton datasets `((i, a_i), 1)` over `threshold_budget(n)` with `k = 2`,
/// for the padded values `a`. Feasible iff the subset-sum instance is.
pub fn subsetsum_to_erm(inst: &SubsetSumInstance) -> Result<ErmInstance> {
    let padded = inst.padded()?;
    let n = padded.len();
    if n > MAX_SUBSET_SUM_PADDED {
        return Err(Error::capacity(format!(
            "padded length {n} exceeds {MAX_SUBSET_SUM_PADDED}"
        )));
    }
    let class = make_threshold_budget(n as u32)?;
    let datasets = padded
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let p = class.space().grid_point(i as u32 + 1, a)?;
            Ok(Dataset::from_examples(vec![LabeledExample::new(p, true)]))
        })
        .collect::<Result<Vec<_>>>()?;
    ErmInstance::new(class, datasets, 2)
}

/// Vertex count of the bounded-degree gadget for `|V| = v`.
pub fn sparsified_vertex_count(v: usize, k: usize) -> usize {
    v * (v - 1 + (v - 2) * (k - 1))
}

/// A graph of maximum degree at most `2k - 1` that is `k`-colorable iff `g` is.
///
/// Each vertex becomes `|V| - 1` copies chained by `|V| - 2` cliques of size
/// `k - 1` (every clique vertex adjacent to two consecutive copies), which
/// forces all copies to share a color. Each original edge then joins one
/// unused copy of each endpoint, taking copies in edge-list order.
pub fn sparsify_coloring(g: &Graph, k: usize) -> Result<Graph> {
    let v = g.n();
    if k < 3 {
        return Err(Error::invalid("the gadget needs k >= 3"));
    }
    if v < 3 {
        return Err(Error::invalid("the gadget needs at least 3 vertices"));
    }
    let block = v - 1 + (v - 2) * (k - 1);
    let copy = |u: usize, i: usize| u * block + i;
    let clique = |u: usize, i: usize, t: usize| u * block + (v - 1) + i * (k - 1) + t;
    let mut out = Graph::new(sparsified_vertex_count(v, k));
    for u in 0..v {
        for i in 0..v - 2 {
            for t in 0..k - 1 {
                out.add_edge(clique(u, i, t), copy(u, i))?;
                out.add_edge(clique(u, i, t), copy(u, i + 1))?;
                for t2 in t + 1..k - 1 {
                    out.add_edge(clique(u, i, t), clique(u, i, t2))?;
                }
            }
        }
    }
    let mut next_copy = vec![0usize; v];
    for (a, b) in g.edges() {
        let (ca, cb) = (next_copy[a], next_copy[b]);
        next_copy[a] += 1;
        next_copy[b] += 1;
        out.add_edge(copy(a, ca), copy(b, cb))?;
    }
    if out.max_degree() > 2 * k - 1 {
        return Err(Error::Internal(format!(
            "gadget degree {} exceeds {}",
            out.max_degree(),
            2 * k - 1
        )));
    }
    Ok(out)
}

/// The uniform distribution over each dataset (as a set).
pub fn erm_to_distributional(inst: &ErmInstance) -> Result<Vec<DataDistribution>> {
    inst.datasets
        .iter()
        .map(|s| {
            if s.is_empty() {
                return Err(Error::invalid("cannot make a distribution from an empty dataset"));
            }
            DataDistribution::uniform(s.examples())
        })
        .collect()
}

/// Union bound `2kn exp(-m / (2k))` on the chance that `m` draws per
/// distribution miss some support element, for supports of size at most `2k`.
pub fn coverage_failure_bound(k: usize, n: usize, m: usize) -> f64 {
    let two_k = 2.0 * k as f64;
    two_k * n as f64 * (-(m as f64) / two_k).exp()
}

/// Smallest `m = ceil(2k ln(2kn / beta))` making the coverage bound at most `beta`.
pub fn min_coverage_samples(k: usize, n: usize, beta: f64) -> usize {
    let two_k = 2.0 * k as f64;
    (two_k * (two_k * n as f64 / beta).ln()).ceil().max(0.0) as usize
}
