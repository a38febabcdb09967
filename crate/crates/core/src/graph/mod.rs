//! Conflict graphs over datasets and graph coloring.

mod coloring;

pub use coloring::{
    approx_color, coloring_budget, exact_color, greedy_color, realized_exponent, two_color,
    ApproxColoring, Coloring, OddCycle, MAX_EXACT_COLOR_VERTICES,
};

use crate::bits::BitVec;
use crate::classes::{is_2_refutable_on, ClassKind, HypothesisClass, Refutation};
use crate::data::{Dataset, Hypothesis};
use crate::erm::{check_domain, find_consistent, realizable};
use crate::error::{Error, Result};
use crate::par::{map_range, Execution};

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BitVec>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![BitVec::zeros(n); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::invalid(format!("edge ({u}, {v}) outside {n} vertices")));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at {u}")));
        }
        self.adj[u].set(v, true);
        self.adj[v].set(u, true);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].get(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter_ones()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BitVec::count_ones).sum::<usize>() / 2
    }

    /// Whether no two vertices in `set` are adjacent.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }
}

/// Vertex `i` is dataset `i`; `i ~ j` iff `S_i ∪ S_j` is unrealizable.
pub fn build_conflict_graph(
    class: &HypothesisClass,
    datasets: &[Dataset],
    exec: Execution,
) -> Result<Graph> {
    for s in datasets {
        check_domain(class, s)?;
    }
    let n = datasets.len();
    let rows: Vec<Result<Vec<usize>>> = match class.kind() {
        ClassKind::AllFunctions { d } => {
            // per-dataset positive/negative point sets; conflicts are overlaps
            let profiles: Vec<(BitVec, BitVec)> = datasets
                .iter()
                .map(|s| {
                    let (mut pos, mut neg) = (BitVec::zeros(*d), BitVec::zeros(*d));
                    for e in s {
                        if e.label {
                            pos.set(e.point, true);
                        } else {
                            neg.set(e.point, true);
                        }
                    }
                    (pos, neg)
                })
                .collect();
            map_range(exec, n, |i| {
                let (pi, ni) = &profiles[i];
                Ok((i + 1..n)
                    .filter(|&j| {
                        let (pj, nj) = &profiles[j];
                        pi.and_count(ni) + pj.and_count(nj) + pi.and_count(nj) + pj.and_count(ni) > 0
                    })
                    .collect())
            })
        }
        _ => map_range(exec, n, |i| {
            let mut row = Vec::new();
            for j in i + 1..n {
                if !realizable(class, &Dataset::union([&datasets[i], &datasets[j]]))? {
                    row.push(j);
                }
            }
            Ok(row)
        }),
    };
    let mut g = Graph::new(n);
    for (i, row) in rows.into_iter().enumerate() {
        for j in row? {
            g.add_edge(i, j)?;
        }
    }
    Ok(g)
}

/// A single hypothesis fitting every dataset in `vertices`.
///
/// Fails with a refutability violation (carrying an unfittable pair when one
/// exists) if the union is not realizable.
pub fn merge_independent_set(
    class: &HypothesisClass,
    datasets: &[Dataset],
    vertices: &[usize],
) -> Result<Hypothesis> {
    if let Some(&v) = vertices.iter().find(|&&v| v >= datasets.len()) {
        return Err(Error::invalid(format!("vertex {v} out of range")));
    }
    let union = Dataset::union(vertices.iter().map(|&v| &datasets[v]));
    if let Some(h) = find_consistent(class, &union)? {
        return Ok(h);
    }
    let witness = match is_2_refutable_on(class, &union)? {
        Refutation::Witness(a, b) => Some((a, b)),
        _ => None,
    };
    Err(Error::RefutabilityViolation {
        vertices: vertices.to_vec(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_all_functions, make_at_most_one_positive};

    #[test]
    fn conflict_graph_examples() {
        let f = make_all_functions(1).unwrap();
        let s = vec![
            Dataset::from_pairs(&[(0, false)]),
            Dataset::from_pairs(&[(0, true)]),
            Dataset::from_pairs(&[(0, false)]),
        ];
        let g = build_conflict_graph(&f, &s, Execution::Sequential).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn fast_path_matches_generic() {
        let f = make_all_functions(3).unwrap();
        let amop = crate::classes::compose(&f, vec![0, 1, 2]).unwrap();
        let s = vec![
            Dataset::from_pairs(&[(0, false), (1, true)]),
            Dataset::from_pairs(&[(1, false)]),
            Dataset::from_pairs(&[(2, true), (2, false)]),
            Dataset::new(),
        ];
        let a = build_conflict_graph(&f, &s, Execution::Parallel).unwrap();
        let b = build_conflict_graph(&amop, &s, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        // the self-contradictory dataset conflicts with everyone
        assert_eq!(a.degree(2), 3);
    }

    #[test]
    fn merge_reports_violation() {
        let f = make_at_most_one_positive(2).unwrap();
        let s = vec![Dataset::from_pairs(&[(0, true)]), Dataset::from_pairs(&[(1, true)])];
        let err = merge_independent_set(&f, &s, &[0, 1]).unwrap_err();
        assert!(matches!(err, Error::RefutabilityViolation { witness: Some(_), .. }));
        let h = merge_independent_set(&f, &s, &[1]).unwrap();
        assert_eq!(h.to_labels(), vec![0, 1]);
    }
}
