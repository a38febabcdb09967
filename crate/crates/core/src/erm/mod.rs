//! Empirical risk minimization oracles.
//!
//! [`erm`] returns a hypothesis of the class with the fewest mistakes on a
//! dataset. Structured classes use closed forms; explicit classes are
//! scanned. [`erm_by_enumeration`] is the plain scan over the enumeration
//! and serves as the reference the closed forms are tested against.

mod augmented;
mod threshold;

pub use augmented::{
    augmented_erm_feasible, augmented_erm_min, AugmentedSolution, ErmInstance, MinRoute, MinSolution,
    MAX_FEASIBLE_DATASETS, MAX_PARTITION_DATASETS, MAX_ROUTE_BEHAVIORS,
};
pub use threshold::{threshold_consistency, threshold_erm};

use crate::classes::{compose_hypothesis, ClassKind, HypothesisClass};
use crate::data::{Dataset, Hypothesis, LabeledExample};
use crate::error::{Error, Result};

pub(crate) fn check_domain(class: &HypothesisClass, s: &Dataset) -> Result<()> {
    let size = class.space().size();
    match s.iter().find(|e| e.point >= size) {
        Some(e) => Err(Error::domain(format!(
            "point {} outside an instance space of {size} points",
            e.point
        ))),
        None => Ok(()),
    }
}

/// A hypothesis in `class` minimizing mistakes on `s`, and that mistake count.
///
/// Ties go to the hypothesis that comes first in the class's enumeration
/// order, except for threshold classes where a deterministic minimizer is
/// returned.
pub fn erm(class: &HypothesisClass, s: &Dataset) -> Result<(Hypothesis, usize)> {
    check_domain(class, s)?;
    erm_unchecked(class, s)
}

fn erm_unchecked(class: &HypothesisClass, s: &Dataset) -> Result<(Hypothesis, usize)> {
    match class.kind() {
        ClassKind::AllFunctions { d } => {
            let (mut pos, mut neg) = (vec![0usize; *d], vec![0usize; *d]);
            for e in s {
                if e.label {
                    pos[e.point] += 1;
                } else {
                    neg[e.point] += 1;
                }
            }
            let h = Hypothesis::from_fn(*d, |x| pos[x] > neg[x]);
            let mistakes = (0..*d).map(|x| pos[x].min(neg[x])).sum();
            Ok((h, mistakes))
        }
        ClassKind::AtMostOnePositive { d } => {
            let (mut pos, mut neg) = (vec![0usize; *d], vec![0usize; *d]);
            for e in s {
                if e.label {
                    pos[e.point] += 1;
                } else {
                    neg[e.point] += 1;
                }
            }
            let total_pos: usize = pos.iter().sum();
            let mut best = (None, total_pos);
            for p in 0..*d {
                let m = total_pos - pos[p] + neg[p];
                if m < best.1 {
                    best = (Some(p), m);
                }
            }
            let h = Hypothesis::from_fn(*d, |x| Some(x) == best.0);
            Ok((h, best.1))
        }
        ClassKind::ThresholdBudget { .. } => threshold_erm(class, s),
        ClassKind::Composed { inner, map } => {
            let mapped = Dataset::from_examples(
                s.iter()
                    .map(|e| LabeledExample::new(map[e.point], e.label))
                    .collect(),
            );
            let (f, m) = erm_unchecked(inner, &mapped)?;
            Ok((compose_hypothesis(&f, map), m))
        }
        ClassKind::Xor { inner, mask } => {
            let flipped = Dataset::from_examples(
                s.iter()
                    .map(|e| LabeledExample::new(e.point, e.label ^ mask.label(e.point)))
                    .collect(),
            );
            let (f, m) = erm_unchecked(inner, &flipped)?;
            Ok((Hypothesis::from_bits(f.bits().xor(mask.bits())), m))
        }
        ClassKind::Explicit { hypotheses } => scan(hypotheses, s),
    }
}

fn scan(hypotheses: &[Hypothesis], s: &Dataset) -> Result<(Hypothesis, usize)> {
    let mut best: Option<(&Hypothesis, usize)> = None;
    for h in hypotheses {
        let m = h.mistakes(s)?;
        if best.is_none_or(|(_, b)| m < b) {
            best = Some((h, m));
            if m == 0 {
                break;
            }
        }
    }
    let (h, m) = best.ok_or_else(|| Error::invalid("empty hypothesis class"))?;
    Ok((h.clone(), m))
}

/// ERM by scanning the full enumeration; first minimizer wins.
pub fn erm_by_enumeration(class: &HypothesisClass, s: &Dataset) -> Result<(Hypothesis, usize)> {
    check_domain(class, s)?;
    scan(&class.enumerate()?, s)
}

/// A hypothesis consistent with `s`, if the class has one.
pub fn find_consistent(class: &HypothesisClass, s: &Dataset) -> Result<Option<Hypothesis>> {
    check_domain(class, s)?;
    if let ClassKind::ThresholdBudget { .. } = class.kind() {
        return threshold_consistency(class, s);
    }
    let (h, m) = erm_unchecked(class, s)?;
    Ok((m == 0).then_some(h))
}

/// Whether some hypothesis in `class` fits `s` exactly.
pub fn realizable(class: &HypothesisClass, s: &Dataset) -> Result<bool> {
    check_domain(class, s)?;
    match class.kind() {
        ClassKind::AllFunctions { d } => {
            let mut seen = vec![0u8; *d];
            for e in s {
                seen[e.point] |= 1 << u8::from(e.label);
                if seen[e.point] == 3 {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ClassKind::ThresholdBudget { d } => Ok(threshold::consistent_theta(*d, class, s).is_some()),
        _ => Ok(erm_unchecked(class, s)?.1 == 0),
    }
}
