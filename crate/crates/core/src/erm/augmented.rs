//! ERM over the augmented class: `k` hypotheses from the base class plus an
//! assignment of each of the `n` datasets to one of them.

use crate::classes::HypothesisClass;
use crate::data::{Dataset, Hypothesis};
use crate::error::{Error, Result};
use crate::graph::{build_conflict_graph, exact_color, two_color, MAX_EXACT_COLOR_VERTICES};
use crate::par::Execution;

use super::{check_domain, erm, find_consistent, realizable};

/// Largest `n` the exact feasibility search accepts.
pub const MAX_FEASIBLE_DATASETS: usize = 16;
/// Largest `n` the partition search for minimum error accepts.
pub const MAX_PARTITION_DATASETS: usize = 12;
/// Largest number of distinct behaviors (on the data's points) the
/// behavior-subset search accepts.
pub const MAX_ROUTE_BEHAVIORS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ErmInstance {
    pub class: HypothesisClass,
    pub datasets: Vec<Dataset>,
    pub k: usize,
}

impl ErmInstance {
    pub fn new(class: HypothesisClass, datasets: Vec<Dataset>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if datasets.is_empty() {
            return Err(Error::invalid("at least one dataset is required"));
        }
        for s in &datasets {
            check_domain(&class, s)?;
        }
        Ok(ErmInstance { class, datasets, k })
    }

    pub fn n(&self) -> usize {
        self.datasets.len()
    }

    fn total_examples(&self) -> usize {
        self.datasets.iter().map(Dataset::len).sum()
    }
}

/// `k` hypotheses and a 0-based assignment of datasets to them.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSolution {
    pub hypotheses: Vec<Hypothesis>,
    pub assignment: Vec<usize>,
}

impl AugmentedSolution {
    /// The augmented hypothesis at `(i, x)`.
    pub fn eval(&self, i: usize, x: usize) -> bool {
        self.hypotheses[self.assignment[i]].label(x)
    }

    pub fn hypothesis_for(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[self.assignment[i]]
    }

    /// Total mistakes over all datasets.
    pub fn mistakes(&self, datasets: &[Dataset]) -> Result<usize> {
        let mut total = 0;
        for (i, s) in datasets.iter().enumerate() {
            total += self.hypothesis_for(i).mistakes(s)?;
        }
        Ok(total)
    }
}

/// Which exact method produced a minimum-error solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinRoute {
    /// `k >= n`: every dataset gets its own minimizer.
    PerDataset,
    /// Zero error found by coloring the conflict graph.
    Coloring,
    /// Branch and bound over `k`-subsets of distinct behaviors.
    Behaviors,
    /// Branch and bound over partitions of the datasets.
    Partitions,
}

impl MinRoute {
    pub fn name(self) -> &'static str {
        match self {
            MinRoute::PerDataset => "per_dataset",
            MinRoute::Coloring => "coloring",
            MinRoute::Behaviors => "behaviors",
            MinRoute::Partitions => "partitions",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinSolution {
    pub solution: AugmentedSolution,
    pub mistakes: usize,
    /// Pooled training error: mistakes over the total number of examples
    /// (0 when there are no examples).
    pub error: f64,
    pub route: MinRoute,
}

fn fill_to_k(mut hyps: Vec<Hypothesis>, k: usize, size: usize) -> Vec<Hypothesis> {
    let filler = hyps.first().cloned().unwrap_or_else(|| Hypothesis::zeros(size));
    hyps.resize(k, filler);
    hyps
}

fn union_of(datasets: &[Dataset], mask: u64) -> Dataset {
    Dataset::union(
        datasets
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s),
    )
}

/// Whether some `k` hypotheses fit every dataset exactly, with a witness.
///
/// Exhaustive search over groupings of the datasets, assigning them in order
/// to an existing group whose union stays realizable or to a new group.
pub fn augmented_erm_feasible(inst: &ErmInstance) -> Result<Option<AugmentedSolution>> {
    let n = inst.n();
    if n > MAX_FEASIBLE_DATASETS {
        return Err(Error::capacity(format!(
            "feasibility search handles at most {MAX_FEASIBLE_DATASETS} datasets, got {n}"
        )));
    }
    for s in &inst.datasets {
        if !realizable(&inst.class, s)? {
            return Ok(None);
        }
    }
    // largest datasets first: they constrain the most
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(inst.datasets[i].len()));
    let mut memo = vec![0u8; 1 << n];
    let mut groups: Vec<u64> = Vec::new();
    let mut search = FeasibleSearch {
        inst,
        order: &order,
        memo: &mut memo,
    };
    if !search.place(0, &mut groups)? {
        return Ok(None);
    }
    let mut assignment = vec![0; n];
    let mut hyps = Vec::with_capacity(groups.len());
    for (g, &mask) in groups.iter().enumerate() {
        for (i, slot) in assignment.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                *slot = g;
            }
        }
        let h = find_consistent(&inst.class, &union_of(&inst.datasets, mask))?
            .ok_or_else(|| Error::Internal("group lost realizability".into()))?;
        hyps.push(h);
    }
    Ok(Some(AugmentedSolution {
        hypotheses: fill_to_k(hyps, inst.k, inst.class.space().size()),
        assignment,
    }))
}

struct FeasibleSearch<'a> {
    inst: &'a ErmInstance,
    order: &'a [usize],
    memo: &'a mut [u8],
}

impl FeasibleSearch<'_> {
    fn realizable_mask(&mut self, mask: u64) -> Result<bool> {
        match self.memo[mask as usize] {
            1 => Ok(true),
            2 => Ok(false),
            _ => {
                let ok = realizable(&self.inst.class, &union_of(&self.inst.datasets, mask))?;
                self.memo[mask as usize] = if ok { 1 } else { 2 };
                Ok(ok)
            }
        }
    }

    fn place(&mut self, pos: usize, groups: &mut Vec<u64>) -> Result<bool> {
        if pos == self.order.len() {
            return Ok(true);
        }
        let bit = 1u64 << self.order[pos];
        for g in 0..groups.len() {
            let merged = groups[g] | bit;
            if self.realizable_mask(merged)? {
                groups[g] = merged;
                if self.place(pos + 1, groups)? {
                    return Ok(true);
                }
                groups[g] &= !bit;
            }
        }
        if groups.len() < self.inst.k {
            groups.push(bit);
            if self.place(pos + 1, groups)? {
                return Ok(true);
            }
            groups.pop();
        }
        Ok(false)
    }
}

/// `k` hypotheses and an assignment minimizing the pooled training error.
///
/// Exact in every case it accepts. The method is chosen per instance: one
/// minimizer per dataset when `k >= n`; a conflict-graph coloring when the
/// class is 2-refutable and zero error is reachable; otherwise a branch and
/// bound over `k`-subsets of at most [`MAX_ROUTE_BEHAVIORS`] behaviors, or
/// over partitions of at most [`MAX_PARTITION_DATASETS`] datasets.
pub fn augmented_erm_min(inst: &ErmInstance) -> Result<MinSolution> {
    let (solution, route) = solve_min(inst)?;
    let mistakes = solution.mistakes(&inst.datasets)?;
    let total = inst.total_examples();
    let error = if total == 0 { 0.0 } else { mistakes as f64 / total as f64 };
    Ok(MinSolution {
        solution,
        mistakes,
        error,
        route,
    })
}

fn solve_min(inst: &ErmInstance) -> Result<(AugmentedSolution, MinRoute)> {
    let n = inst.n();
    let size = inst.class.space().size();
    if inst.k >= n {
        let hyps = inst
            .datasets
            .iter()
            .map(|s| erm(&inst.class, s).map(|(h, _)| h))
            .collect::<Result<Vec<_>>>()?;
        return Ok((
            AugmentedSolution {
                hypotheses: fill_to_k(hyps, inst.k, size),
                assignment: (0..n).collect(),
            },
            MinRoute::PerDataset,
        ));
    }
    if let Some(sol) = zero_error_by_coloring(inst)? {
        return Ok((sol, MinRoute::Coloring));
    }
    if let Some(behaviors) = behaviors_on_data(inst)? {
        return Ok((min_over_behaviors(inst, behaviors)?, MinRoute::Behaviors));
    }
    if n <= MAX_PARTITION_DATASETS {
        return Ok((min_over_partitions(inst)?, MinRoute::Partitions));
    }
    Err(Error::capacity(format!(
        "minimum-error augmented ERM: {n} datasets exceed {MAX_PARTITION_DATASETS} and the class shows more than {MAX_ROUTE_BEHAVIORS} behaviors on the data"
    )))
}

/// For 2-refutable classes, any proper `k`-coloring of the conflict graph
/// merges into `k` consistent hypotheses.
fn zero_error_by_coloring(inst: &ErmInstance) -> Result<Option<AugmentedSolution>> {
    if !inst.class.is_two_refutable_by_construction() {
        return Ok(None);
    }
    for s in &inst.datasets {
        if !realizable(&inst.class, s)? {
            return Ok(None);
        }
    }
    let g = build_conflict_graph(&inst.class, &inst.datasets, Execution::Sequential)?;
    let coloring = match inst.k {
        1 => (g.edge_count() == 0).then(|| crate::graph::Coloring::from_colors(&vec![0; g.n()])),
        2 => two_color(&g).ok(),
        k if g.n() <= MAX_EXACT_COLOR_VERTICES => exact_color(&g, k)?,
        _ => None,
    };
    let Some(coloring) = coloring else {
        return Ok(None);
    };
    let mut hyps = Vec::new();
    for class_vertices in coloring.classes() {
        let union = Dataset::union(class_vertices.iter().map(|&v| &inst.datasets[v]));
        let h = find_consistent(&inst.class, &union)?.ok_or_else(|| {
            Error::Internal("independent set of a 2-refutable class not realizable".into())
        })?;
        hyps.push(h);
    }
    Ok(Some(AugmentedSolution {
        hypotheses: fill_to_k(hyps, inst.k, inst.class.space().size()),
        assignment: coloring.colors().to_vec(),
    }))
}

/// Distinct behaviors of the class on the points the data touches, or
/// `None` when there are too many or they cannot be listed.
fn behaviors_on_data(inst: &ErmInstance) -> Result<Option<Vec<Hypothesis>>> {
    let mut points: Vec<usize> = inst
        .datasets
        .iter()
        .flat_map(|s| s.iter().map(|e| e.point))
        .collect();
    points.sort_unstable();
    points.dedup();
    inst.class.behaviors_on(&points, MAX_ROUTE_BEHAVIORS)
}

fn min_over_behaviors(inst: &ErmInstance, behaviors: Vec<Hypothesis>) -> Result<AugmentedSolution> {
    let n = inst.n();
    let b = behaviors.len();
    let k = inst.k.min(b);
    let mut cost = vec![vec![0usize; b]; n];
    for (i, s) in inst.datasets.iter().enumerate() {
        for (j, h) in behaviors.iter().enumerate() {
            cost[i][j] = h.mistakes(s)?;
        }
    }
    // suffix_min[j][i] = min over behaviors j.. of cost[i]
    let mut suffix_min = vec![vec![usize::MAX; n]; b + 1];
    for j in (0..b).rev() {
        for i in 0..n {
            suffix_min[j][i] = suffix_min[j + 1][i].min(cost[i][j]);
        }
    }
    let mut bb = SubsetSearch {
        cost: &cost,
        suffix_min: &suffix_min,
        k,
        best: usize::MAX,
        best_set: Vec::new(),
    };
    let mut chosen = Vec::new();
    bb.go(0, &mut chosen, &vec![usize::MAX; n]);
    let chosen = bb.best_set;
    let assignment = (0..n)
        .map(|i| {
            (0..chosen.len())
                .min_by_key(|&c| (cost[i][chosen[c]], c))
                .expect("k >= 1")
        })
        .collect();
    let hyps = chosen.iter().map(|&j| behaviors[j].clone()).collect();
    Ok(AugmentedSolution {
        hypotheses: fill_to_k(hyps, inst.k, inst.class.space().size()),
        assignment,
    })
}

struct SubsetSearch<'a> {
    cost: &'a [Vec<usize>],
    suffix_min: &'a [Vec<usize>],
    k: usize,
    best: usize,
    best_set: Vec<usize>,
}

impl SubsetSearch<'_> {
    fn go(&mut self, next: usize, chosen: &mut Vec<usize>, current: &[usize]) {
        let b = self.suffix_min.len() - 1;
        if chosen.len() == self.k {
            let total: usize = current.iter().sum();
            if total < self.best {
                self.best = total;
                self.best_set = chosen.clone();
            }
            return;
        }
        if b - next < self.k - chosen.len() {
            return;
        }
        let bound: usize = current
            .iter()
            .zip(&self.suffix_min[next])
            .map(|(&c, &s)| c.min(s))
            .sum();
        if bound >= self.best {
            return;
        }
        for j in next..b {
            if b - j < self.k - chosen.len() {
                break;
            }
            let updated: Vec<usize> = current
                .iter()
                .enumerate()
                .map(|(i, &c)| c.min(self.cost[i][j]))
                .collect();
            chosen.push(j);
            self.go(j + 1, chosen, &updated);
            chosen.pop();
        }
    }
}

fn min_over_partitions(inst: &ErmInstance) -> Result<AugmentedSolution> {
    let n = inst.n();
    let solo: Vec<usize> = inst
        .datasets
        .iter()
        .map(|s| erm(&inst.class, s).map(|(_, m)| m))
        .collect::<Result<_>>()?;
    // suffix sums of solo minima bound what the unplaced datasets will cost
    let mut rest = vec![0usize; n + 1];
    for i in (0..n).rev() {
        rest[i] = rest[i + 1] + solo[i];
    }
    let mut search = PartitionSearch {
        inst,
        rest: &rest,
        best: usize::MAX,
        best_groups: Vec::new(),
    };
    let mut groups: Vec<(Dataset, Vec<usize>, usize)> = Vec::new();
    search.go(0, &mut groups)?;
    let mut assignment = vec![0; n];
    let mut hyps = Vec::new();
    for (g, members) in search.best_groups.iter().enumerate() {
        for &i in members {
            assignment[i] = g;
        }
        let union = Dataset::union(members.iter().map(|&i| &inst.datasets[i]));
        hyps.push(erm(&inst.class, &union)?.0);
    }
    Ok(AugmentedSolution {
        hypotheses: fill_to_k(hyps, inst.k, inst.class.space().size()),
        assignment,
    })
}

struct PartitionSearch<'a> {
    inst: &'a ErmInstance,
    rest: &'a [usize],
    best: usize,
    best_groups: Vec<Vec<usize>>,
}

impl PartitionSearch<'_> {
    /// `groups` holds (pooled data, members, minimum mistakes on the pool).
    fn go(&mut self, i: usize, groups: &mut Vec<(Dataset, Vec<usize>, usize)>) -> Result<()> {
        let placed: usize = groups.iter().map(|g| g.2).sum();
        // pooling never beats fitting each part separately, so this is a lower bound
        if placed + self.rest[i] >= self.best {
            return Ok(());
        }
        if i == self.inst.n() {
            self.best = placed;
            self.best_groups = groups.iter().map(|g| g.1.clone()).collect();
            return Ok(());
        }
        let s = &self.inst.datasets[i];
        for g in 0..groups.len() {
            let mut pooled = groups[g].0.clone();
            pooled.extend_from(s);
            let m = erm(&self.inst.class, &pooled)?.1;
            let saved = std::mem::replace(&mut groups[g], (pooled, Vec::new(), m));
            groups[g].1 = saved.1.clone();
            groups[g].1.push(i);
            self.go(i + 1, groups)?;
            groups[g] = saved;
        }
        if groups.len() < self.inst.k {
            let m = erm(&self.inst.class, s)?.1;
            groups.push((s.clone(), vec![i], m));
            self.go(i + 1, groups)?;
            groups.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_all_functions, make_at_most_one_positive, make_threshold_budget};

    fn inst(class: HypothesisClass, sets: &[&[(usize, bool)]], k: usize) -> ErmInstance {
        ErmInstance::new(
            class,
            sets.iter().map(|p| Dataset::from_pairs(p)).collect(),
            k,
        )
        .unwrap()
    }

    #[test]
    fn feasible_examples() {
        let f = make_all_functions(1).unwrap();
        let i = inst(f.clone(), &[&[(0, false)], &[(0, true)]], 2);
        let sol = augmented_erm_feasible(&i).unwrap().unwrap();
        assert_ne!(sol.assignment[0], sol.assignment[1]);
        assert_eq!(sol.mistakes(&i.datasets).unwrap(), 0);
        let i = inst(f, &[&[(0, false)], &[(0, true)]], 1);
        assert!(augmented_erm_feasible(&i).unwrap().is_none());
    }

    #[test]
    fn min_error_half() {
        let f = make_all_functions(1).unwrap();
        let i = inst(f, &[&[(0, false)], &[(0, true)]], 1);
        let m = augmented_erm_min(&i).unwrap();
        assert_eq!(m.error, 0.5);
        assert_eq!(m.mistakes, 1);
    }

    #[test]
    fn routes_agree() {
        let f = make_at_most_one_positive(4).unwrap();
        let sets: &[&[(usize, bool)]] = &[
            &[(0, true), (1, true)],
            &[(1, true), (2, false)],
            &[(2, true)],
            &[(3, true), (0, false)],
            &[(0, true)],
        ];
        let i = inst(f, sets, 2);
        let (a, ra) = {
            let b = behaviors_on_data(&i).unwrap().unwrap();
            (min_over_behaviors(&i, b).unwrap(), MinRoute::Behaviors)
        };
        let b = min_over_partitions(&i).unwrap();
        assert_eq!(ra, MinRoute::Behaviors);
        assert_eq!(a.mistakes(&i.datasets).unwrap(), b.mistakes(&i.datasets).unwrap());
    }

    #[test]
    fn threshold_uses_partitions() {
        let c = make_threshold_budget(2).unwrap();
        let sp = *c.space();
        let p = |i, j| sp.grid_point(i, j).unwrap();
        let sets: Vec<Dataset> = vec![
            Dataset::from_pairs(&[(p(1, 3), true)]),
            Dataset::from_pairs(&[(p(2, 2), true)]),
            Dataset::from_pairs(&[(p(1, 1), true), (p(2, 1), true)]),
        ];
        let i = ErmInstance::new(c, sets, 2).unwrap();
        let m = augmented_erm_min(&i).unwrap();
        assert_eq!(m.route, MinRoute::Partitions);
        assert_eq!(m.mistakes, 0);
    }
}
