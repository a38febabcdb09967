//! Exhaustive check of `(k, eps)`-realizability for finite-support distributions.

use crate::classes::HypothesisClass;
use crate::data::{population_error, DataDistribution, Hypothesis, PROBABILITY_TOLERANCE};
use crate::error::{Error, Result};

/// Largest number of distinct behaviors the check will consider.
pub const MAX_REALIZABILITY_BEHAVIORS: usize = 1 << 20;
/// Largest number of distributions the check accepts.
pub const MAX_REALIZABILITY_DISTRIBUTIONS: usize = 64;

/// `k` hypotheses and, for each distribution, the index of one within `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizabilityWitness {
    pub hypotheses: Vec<Hypothesis>,
    pub assignment: Vec<usize>,
}

/// Whether some `k` hypotheses of `class` leave every distribution within
/// `eps` population error of at least one of them.
///
/// Exhaustive over the class's distinct behaviors on the union of supports:
/// each behavior covers a set of distributions, and a depth-first search
/// looks for at most `k` sets covering all of them.
pub fn realizability_check(
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    k: usize,
    eps: f64,
) -> Result<Option<RealizabilityWitness>> {
    let n = distributions.len();
    if n == 0 || k == 0 {
        return Err(Error::invalid("need at least one distribution and k >= 1"));
    }
    if n > MAX_REALIZABILITY_DISTRIBUTIONS {
        return Err(Error::capacity(format!(
            "realizability check handles at most {MAX_REALIZABILITY_DISTRIBUTIONS} distributions"
        )));
    }
    let mut points: Vec<usize> = distributions
        .iter()
        .flat_map(|d| d.support().iter().map(|(e, _)| e.point))
        .collect();
    points.sort_unstable();
    points.dedup();
    if let Some(&p) = points.last() {
        if p >= class.space().size() {
            return Err(Error::domain(format!("point {p} outside the class's space")));
        }
    }
    let behaviors = class
        .behaviors_on(&points, MAX_REALIZABILITY_BEHAVIORS)?
        .ok_or_else(|| {
            Error::capacity(format!(
                "more than {MAX_REALIZABILITY_BEHAVIORS} behaviors on the distributions' support"
            ))
        })?;

    // coverage mask per behavior; keep one representative per mask
    let mut by_mask: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for (b, h) in behaviors.iter().enumerate() {
        let mut mask = 0u64;
        for (i, d) in distributions.iter().enumerate() {
            if population_error(h, d)? <= eps + PROBABILITY_TOLERANCE {
                mask |= 1 << i;
            }
        }
        if mask != 0 {
            by_mask.entry(mask).or_insert(b);
        }
    }
    // drop masks contained in another
    let mut masks: Vec<(u64, usize)> = by_mask.into_iter().collect();
    masks.sort_by_key(|&(m, b)| (std::cmp::Reverse(m.count_ones()), m, b));
    let mut kept: Vec<(u64, usize)> = Vec::new();
    for (m, b) in masks {
        if !kept.iter().any(|&(big, _)| big & m == m) {
            kept.push((m, b));
        }
    }

    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut chosen = Vec::new();
    if !cover(&kept, full, 0, k, &mut chosen) {
        return Ok(None);
    }
    let hypotheses: Vec<Hypothesis> = chosen.iter().map(|&c| behaviors[kept[c].1].clone()).collect();
    let assignment = (0..n)
        .map(|i| {
            chosen
                .iter()
                .position(|&c| kept[c].0 >> i & 1 == 1)
                .expect("cover")
        })
        .collect();
    let mut hypotheses = hypotheses;
    let filler = hypotheses[0].clone();
    hypotheses.resize(k, filler);
    Ok(Some(RealizabilityWitness {
        hypotheses,
        assignment,
    }))
}

fn cover(sets: &[(u64, usize)], full: u64, covered: u64, left: usize, chosen: &mut Vec<usize>) -> bool {
    if covered == full {
        return true;
    }
    if left == 0 {
        return false;
    }
    let first = (!covered & full).trailing_zeros();
    for (c, &(m, _)) in sets.iter().enumerate() {
        if m >> first & 1 == 1 {
            chosen.push(c);
            if cover(sets, full, covered | m, left - 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_all_functions, make_at_most_one_positive};
    use crate::data::LabeledExample;

    fn det(p: usize, y: bool) -> DataDistribution {
        DataDistribution::uniform(&[LabeledExample::new(p, y)]).unwrap()
    }

    #[test]
    fn examples() {
        let f = make_all_functions(2).unwrap();
        assert!(realizability_check(&[det(0, true)], &f, 1, 0.0).unwrap().is_some());
        assert!(realizability_check(&[det(0, true), det(0, false)], &f, 1, 0.0).unwrap().is_none());
        let w = realizability_check(&[det(0, true), det(0, false), det(0, true), det(1, true)], &f, 2, 0.0)
            .unwrap()
            .unwrap();
        assert_ne!(w.assignment[0], w.assignment[1]);
        assert_eq!(w.hypotheses.len(), 2);
    }

    #[test]
    fn eps_slack_and_monotone() {
        let f = make_at_most_one_positive(3).unwrap();
        let noisy = DataDistribution::new(vec![
            (LabeledExample::new(0, true), 0.9),
            (LabeledExample::new(1, true), 0.1),
        ])
        .unwrap();
        assert!(realizability_check(std::slice::from_ref(&noisy), &f, 1, 0.05).unwrap().is_none());
        assert!(realizability_check(std::slice::from_ref(&noisy), &f, 1, 0.1).unwrap().is_some());
        assert!(realizability_check(&[noisy], &f, 2, 0.1).unwrap().is_some());
    }
}
