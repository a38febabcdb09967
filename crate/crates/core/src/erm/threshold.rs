//! Solvers for the budgeted threshold class `f_theta(i, j) = 1{j <= theta_i}`,
//! `sum_i theta_i <= 2^d`.

use crate::classes::{threshold_hypothesis, ClassKind, HypothesisClass};
use crate::data::{Dataset, Hypothesis};
use crate::error::{Error, Result};

fn grid_d(class: &HypothesisClass) -> Result<u32> {
    match class.kind() {
        ClassKind::ThresholdBudget { d } => Ok(*d),
        _ => Err(Error::invalid("not a threshold_budget class")),
    }
}

/// The minimal consistent `theta`, or `None` when no budgeted threshold fits.
pub(crate) fn consistent_theta(d: u32, class: &HypothesisClass, s: &Dataset) -> Option<Vec<u64>> {
    let space = class.space();
    // Step 1: the smallest thresholds covering every positive example.
    let mut theta = vec![0u64; d as usize];
    for e in s.iter().filter(|e| e.label) {
        let (i, j) = space.payload(e.point).expect("grid point");
        let t = &mut theta[i as usize - 1];
        *t = (*t).max(j);
    }
    // Step 2: no negative example may fall under its row's threshold, and the
    // thresholds must fit the budget.
    let blocked = s.iter().filter(|e| !e.label).any(|e| {
        let (i, j) = space.payload(e.point).expect("grid point");
        j <= theta[i as usize - 1]
    });
    let within_budget = theta.iter().sum::<u64>() <= 1u64 << d;
    (!blocked && within_budget).then_some(theta)
}

/// Consistency for the threshold class: raise each threshold to the largest
/// positive in its row, then reject if a negative is covered or the budget
/// is exceeded.
pub fn threshold_consistency(class: &HypothesisClass, s: &Dataset) -> Result<Option<Hypothesis>> {
    let d = grid_d(class)?;
    super::check_domain(class, s)?;
    Ok(consistent_theta(d, class, s).map(|theta| threshold_hypothesis(class.space(), &theta)))
}

/// Minimum-mistake threshold hypothesis, by a budget-vs-mistakes frontier
/// over the rows.
pub fn threshold_erm(class: &HypothesisClass, s: &Dataset) -> Result<(Hypothesis, usize)> {
    let d = grid_d(class)?;
    super::check_domain(class, s)?;
    let budget = 1u64 << d;
    let space = class.space();
    let mut rows: Vec<Vec<(u64, bool)>> = vec![Vec::new(); d as usize];
    for e in s {
        let (i, j) = space.payload(e.point).expect("grid point");
        rows[i as usize - 1].push((j, e.label));
    }

    // Each frontier entry: (budget used, mistakes, thresholds so far).
    let mut frontier: Vec<(u64, usize, Vec<u64>)> = vec![(0, 0, Vec::new())];
    for row in &rows {
        let mut candidates: Vec<u64> = row.iter().map(|&(j, _)| j).chain([0]).collect();
        candidates.sort_unstable();
        candidates.dedup();
        let cost = |t: u64| {
            row.iter()
                .filter(|&&(j, y)| if y { j > t } else { j <= t })
                .count()
        };
        let costs: Vec<(u64, usize)> = candidates.iter().map(|&t| (t, cost(t))).collect();
        let mut next = Vec::new();
        for (used, mistakes, theta) in &frontier {
            for &(t, c) in &costs {
                if used + t <= budget {
                    let mut th = theta.clone();
                    th.push(t);
                    next.push((used + t, mistakes + c, th));
                }
            }
        }
        next.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
        // keep only entries that strictly improve on everything cheaper
        let mut pruned: Vec<(u64, usize, Vec<u64>)> = Vec::new();
        for entry in next {
            if pruned.last().is_none_or(|p| entry.1 < p.1) {
                pruned.push(entry);
            }
        }
        frontier = pruned;
    }
    let (_, mistakes, theta) = frontier
        .into_iter()
        .min_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)))
        .expect("theta = 0 is always feasible");
    Ok((threshold_hypothesis(space, &theta), mistakes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_threshold_budget;
    use crate::data::LabeledExample;

    fn at(class: &HypothesisClass, i: u32, j: u64, y: bool) -> LabeledExample {
        LabeledExample::new(class.space().grid_point(i, j).unwrap(), y)
    }

    #[test]
    fn consistency_examples() {
        let c = make_threshold_budget(2).unwrap();
        let s = Dataset::from_examples(vec![at(&c, 1, 3, true), at(&c, 2, 1, true)]);
        let h = threshold_consistency(&c, &s).unwrap().unwrap();
        assert!(h.is_consistent(&s).unwrap());
        let over = Dataset::from_examples(vec![at(&c, 1, 3, true), at(&c, 2, 2, true)]);
        assert!(threshold_consistency(&c, &over).unwrap().is_none());
        let blocked = Dataset::from_examples(vec![at(&c, 1, 3, true), at(&c, 1, 2, false)]);
        assert!(threshold_consistency(&c, &blocked).unwrap().is_none());
        let zero_neg = Dataset::from_examples(vec![at(&c, 2, 0, false)]);
        assert!(threshold_consistency(&c, &zero_neg).unwrap().is_none());
    }

    #[test]
    fn erm_trades_budget_for_mistakes() {
        let c = make_threshold_budget(2).unwrap();
        // budget 4: can cover (1,3) or (2,2)+(2,... ) but not both 3 and 2
        let s = Dataset::from_examples(vec![
            at(&c, 1, 3, true),
            at(&c, 2, 2, true),
            at(&c, 2, 2, true),
        ]);
        let (h, m) = threshold_erm(&c, &s).unwrap();
        assert_eq!(m, 1);
        assert_eq!(h.mistakes(&s).unwrap(), 1);
    }
}
