//! Concrete hypothesis classes with shattering witnesses.
//!
//! Every class knows its instance space, how to enumerate its behaviorally
//! distinct hypotheses (when that is feasible), and a declared set of points
//! it shatters. The ERM oracles in [`crate::erm`] dispatch on [`ClassKind`]
//! to use closed-form solvers where the structure allows.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::data::{Dataset, Hypothesis, InstanceSpace, LabeledExample};
use crate::error::{Error, Result};

/// Largest `d` for which `AllFunctions(d)` may be enumerated.
pub const MAX_ENUMERABLE_ALL_FUNCTIONS: usize = 20;
/// Largest behavioral enumeration any class will materialize.
pub const MAX_ENUMERATION: usize = 1 << 20;
/// Largest `d` accepted by `AllFunctions(d)` at all.
pub const MAX_ALL_FUNCTIONS_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassKind {
    /// `{0,1}^X` over `d` points.
    AllFunctions { d: usize },
    /// Labelings with at most one positive point.
    AtMostOnePositive { d: usize },
    /// `f_theta(i, j) = 1{j <= theta_i}` with `sum theta_i <= 2^d`.
    ThresholdBudget { d: u32 },
    /// `{f o g : f in inner}` where `map[x] = g(x)` is a point of the inner space.
    Composed { inner: Box<HypothesisClass>, map: Vec<usize> },
    /// `{f xor g : f in inner}`.
    Xor { inner: Box<HypothesisClass>, mask: Hypothesis },
    /// An explicit list, deduplicated at construction.
    Explicit { hypotheses: Vec<Hypothesis> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisClass {
    space: InstanceSpace,
    kind: ClassKind,
    witness: Vec<usize>,
}

/// JSON form of a class, e.g. `{"kind": "all_functions", "d": 4}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassDescriptor {
    AllFunctions { d: usize },
    AtMostOnePositive { d: usize },
    ThresholdBudget { d: u32 },
    Compose { inner: Box<ClassDescriptor>, map: Vec<usize> },
    Xor { inner: Box<ClassDescriptor>, g: Vec<u8> },
    Explicit {
        points: usize,
        hypotheses: Vec<Vec<u8>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<Vec<usize>>,
    },
}

pub fn make_all_functions(d: usize) -> Result<HypothesisClass> {
    if d == 0 || d > MAX_ALL_FUNCTIONS_DIM {
        return Err(Error::capacity(format!(
            "all_functions needs 1 <= d <= {MAX_ALL_FUNCTIONS_DIM}, got {d}"
        )));
    }
    Ok(HypothesisClass {
        space: InstanceSpace::flat(d)?,
        kind: ClassKind::AllFunctions { d },
        witness: (0..d).collect(),
    })
}

pub fn make_at_most_one_positive(d: usize) -> Result<HypothesisClass> {
    if d == 0 {
        return Err(Error::invalid("at_most_one_positive needs d >= 1"));
    }
    Ok(HypothesisClass {
        space: InstanceSpace::flat(d)?,
        kind: ClassKind::AtMostOnePositive { d },
        witness: vec![0],
    })
}

/// The budgeted product of thresholds over `[d] x {0..2^d}`. The witness is
/// `(1,1), .., (d,1)`, shattered by `theta in {0,1}^d`.
pub fn make_threshold_budget(d: u32) -> Result<HypothesisClass> {
    let space = InstanceSpace::threshold_grid(d)?;
    let witness = (1..=d)
        .map(|i| space.grid_point(i, 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(HypothesisClass {
        space,
        kind: ClassKind::ThresholdBudget { d },
        witness,
    })
}

/// `{f o g : f in inner}`; `map[x]` is the inner point that new point `x` reads.
pub fn compose(inner: &HypothesisClass, map: Vec<usize>) -> Result<HypothesisClass> {
    let space = InstanceSpace::flat(map.len())?;
    if let Some(&bad) = map.iter().find(|&&p| !inner.space.contains(p)) {
        return Err(Error::domain(format!("map target {bad} outside inner space")));
    }
    // One preimage per inner witness point that has one.
    let witness = inner
        .witness
        .iter()
        .filter_map(|w| map.iter().position(|p| p == w))
        .collect();
    let class = HypothesisClass {
        space,
        kind: ClassKind::Composed {
            inner: Box::new(inner.clone()),
            map,
        },
        witness,
    };
    class.verify_witness()?;
    Ok(class)
}

/// `{f xor g : f in inner}`.
pub fn xor(inner: &HypothesisClass, mask: Hypothesis) -> Result<HypothesisClass> {
    if mask.domain_size() != inner.space.size() {
        return Err(Error::domain(format!(
            "xor mask has {} points, class space has {}",
            mask.domain_size(),
            inner.space.size()
        )));
    }
    let class = HypothesisClass {
        space: inner.space,
        kind: ClassKind::Xor {
            inner: Box::new(inner.clone()),
            mask,
        },
        witness: inner.witness.clone(),
    };
    class.verify_witness()?;
    Ok(class)
}

/// An explicit class. Without a declared witness, the largest shattered set
/// (up to 16 points) is searched for and used.
pub fn make_explicit(
    points: usize,
    hypotheses: Vec<Hypothesis>,
    witness: Option<Vec<usize>>,
) -> Result<HypothesisClass> {
    let space = InstanceSpace::flat(points)?;
    if hypotheses.is_empty() {
        return Err(Error::invalid("explicit class needs at least one hypothesis"));
    }
    let mut seen = HashSet::new();
    let mut distinct = Vec::new();
    for h in hypotheses {
        if h.domain_size() != points {
            return Err(Error::domain(format!(
                "hypothesis over {} points in a {points}-point space",
                h.domain_size()
            )));
        }
        if seen.insert(h.clone()) {
            distinct.push(h);
        }
    }
    let witness = match witness {
        Some(w) => w,
        None => crate::vcdim::largest_shattered_set(&distinct, points, 16),
    };
    let class = HypothesisClass {
        space,
        kind: ClassKind::Explicit { hypotheses: distinct },
        witness,
    };
    class.verify_witness()?;
    Ok(class)
}

impl HypothesisClass {
    pub fn space(&self) -> &InstanceSpace {
        &self.space
    }

    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    /// Points declared (and verified) to be shattered.
    pub fn witness(&self) -> &[usize] {
        &self.witness
    }

    /// The VC dimension used by the learners' sample-size formulas: the size
    /// of the declared witness.
    pub fn vc_dim(&self) -> usize {
        self.witness.len()
    }

    /// Number of behaviorally distinct hypotheses when that is cheap to know.
    pub fn behavior_count(&self) -> Option<u128> {
        match &self.kind {
            ClassKind::AllFunctions { d } => (*d < 128).then(|| 1u128 << d),
            ClassKind::AtMostOnePositive { d } => Some(*d as u128 + 1),
            ClassKind::ThresholdBudget { .. } => None,
            ClassKind::Composed { .. } => None,
            ClassKind::Xor { inner, .. } => inner.behavior_count(),
            ClassKind::Explicit { hypotheses } => Some(hypotheses.len() as u128),
        }
    }

    /// Whether every dataset this class cannot fit contains an unfittable pair,
    /// by construction. `false` means "not known", not "refuted".
    pub fn is_two_refutable_by_construction(&self) -> bool {
        match &self.kind {
            ClassKind::AllFunctions { .. } | ClassKind::AtMostOnePositive { .. } => true,
            ClassKind::Composed { inner, .. } | ClassKind::Xor { inner, .. } => {
                inner.is_two_refutable_by_construction()
            }
            ClassKind::ThresholdBudget { .. } | ClassKind::Explicit { .. } => false,
        }
    }

    /// All behaviorally distinct hypotheses, in the class's enumeration order.
    ///
    /// Order: `AllFunctions` counts in binary with point 0 as the low bit;
    /// `AtMostOnePositive` yields all-zeros then the indicator of each point;
    /// `Composed` and `Xor` follow the inner order (first occurrence kept);
    /// `Explicit` keeps the construction order. `ThresholdBudget` is never
    /// enumerated.
    pub fn enumerate(&self) -> Result<Vec<Hypothesis>> {
        match &self.kind {
            ClassKind::AllFunctions { d } => {
                if *d > MAX_ENUMERABLE_ALL_FUNCTIONS {
                    return Err(Error::capacity(format!(
                        "all_functions({d}) has 2^{d} hypotheses; enumeration cap is 2^{MAX_ENUMERABLE_ALL_FUNCTIONS}"
                    )));
                }
                Ok((0u64..(1u64 << d))
                    .map(|v| Hypothesis::from_bits(BitVec::from_u64(v, *d)))
                    .collect())
            }
            ClassKind::AtMostOnePositive { d } => {
                let mut out = vec![Hypothesis::zeros(*d)];
                out.extend((0..*d).map(|p| Hypothesis::from_fn(*d, |x| x == p)));
                Ok(out)
            }
            ClassKind::ThresholdBudget { d } => Err(Error::capacity(format!(
                "threshold_budget({d}) is never enumerated explicitly"
            ))),
            ClassKind::Composed { inner, map } => {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for f in inner.enumerate()? {
                    let h = compose_hypothesis(&f, map);
                    if seen.insert(h.clone()) {
                        out.push(h);
                    }
                }
                Ok(out)
            }
            ClassKind::Xor { inner, mask } => Ok(inner
                .enumerate()?
                .into_iter()
                .map(|f| Hypothesis::from_bits(f.bits().xor(mask.bits())))
                .collect()),
            ClassKind::Explicit { hypotheses } => Ok(hypotheses.clone()),
        }
    }

    /// Whether `h` is a member of the class (behaviorally).
    pub fn contains(&self, h: &Hypothesis) -> Result<bool> {
        if h.domain_size() != self.space.size() {
            return Ok(false);
        }
        match &self.kind {
            ClassKind::AllFunctions { .. } => Ok(true),
            ClassKind::AtMostOnePositive { .. } => Ok(h.bits().count_ones() <= 1),
            ClassKind::ThresholdBudget { d } => Ok(threshold_parameters(*d, &self.space, h).is_some()),
            ClassKind::Xor { inner, mask } => {
                inner.contains(&Hypothesis::from_bits(h.bits().xor(mask.bits())))
            }
            ClassKind::Composed { .. } | ClassKind::Explicit { .. } => {
                Ok(self.enumerate()?.contains(h))
            }
        }
    }

    /// One full hypothesis per distinct behavior on `points` (sorted,
    /// deduplicated), or `None` if there are more than `cap` of them or the
    /// class cannot be listed.
    pub fn behaviors_on(&self, points: &[usize], cap: usize) -> Result<Option<Vec<Hypothesis>>> {
        let size = self.space.size();
        match &self.kind {
            ClassKind::AllFunctions { .. } => {
                if points.len() >= usize::BITS as usize - 1 || 1usize << points.len() > cap {
                    return Ok(None);
                }
                let out = (0u64..1 << points.len())
                    .map(|v| {
                        let mut h = Hypothesis::zeros(size);
                        for (b, &p) in points.iter().enumerate() {
                            h.set(p, v >> b & 1 == 1);
                        }
                        h
                    })
                    .collect();
                Ok(Some(out))
            }
            ClassKind::AtMostOnePositive { .. } => {
                if points.len() + 1 > cap {
                    return Ok(None);
                }
                let mut out = vec![Hypothesis::zeros(size)];
                out.extend(points.iter().map(|&p| Hypothesis::from_fn(size, |x| x == p)));
                Ok(Some(out))
            }
            _ => {
                let all = match self.enumerate() {
                    Ok(all) => all,
                    Err(Error::Capacity(_)) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for h in all {
                    let restricted: Vec<bool> = points.iter().map(|&p| h.label(p)).collect();
                    if seen.insert(restricted) {
                        out.push(h);
                        if out.len() > cap {
                            return Ok(None);
                        }
                    }
                }
                Ok(Some(out))
            }
        }
    }

    pub fn descriptor(&self) -> ClassDescriptor {
        match &self.kind {
            ClassKind::AllFunctions { d } => ClassDescriptor::AllFunctions { d: *d },
            ClassKind::AtMostOnePositive { d } => ClassDescriptor::AtMostOnePositive { d: *d },
            ClassKind::ThresholdBudget { d } => ClassDescriptor::ThresholdBudget { d: *d },
            ClassKind::Composed { inner, map } => ClassDescriptor::Compose {
                inner: Box::new(inner.descriptor()),
                map: map.clone(),
            },
            ClassKind::Xor { inner, mask } => ClassDescriptor::Xor {
                inner: Box::new(inner.descriptor()),
                g: mask.to_labels(),
            },
            ClassKind::Explicit { hypotheses } => ClassDescriptor::Explicit {
                points: self.space.size(),
                hypotheses: hypotheses.iter().map(Hypothesis::to_labels).collect(),
                witness: Some(self.witness.clone()),
            },
        }
    }

    pub fn from_descriptor(desc: &ClassDescriptor) -> Result<Self> {
        match desc {
            ClassDescriptor::AllFunctions { d } => make_all_functions(*d),
            ClassDescriptor::AtMostOnePositive { d } => make_at_most_one_positive(*d),
            ClassDescriptor::ThresholdBudget { d } => make_threshold_budget(*d),
            ClassDescriptor::Compose { inner, map } => {
                compose(&HypothesisClass::from_descriptor(inner)?, map.clone())
            }
            ClassDescriptor::Xor { inner, g } => {
                let inner = HypothesisClass::from_descriptor(inner)?;
                xor(&inner, Hypothesis::from_labels(g))
            }
            ClassDescriptor::Explicit {
                points,
                hypotheses,
                witness,
            } => make_explicit(
                *points,
                hypotheses.iter().map(|h| Hypothesis::from_labels(h)).collect(),
                witness.clone(),
            ),
        }
    }

    /// Checks the declared witness against the enumeration when that is small.
    fn verify_witness(&self) -> Result<()> {
        if self.witness.len() > 16 {
            return Err(Error::capacity("witness larger than 16 points"));
        }
        if let Some(&p) = self.witness.iter().find(|&&p| !self.space.contains(p)) {
            return Err(Error::domain(format!("witness point {p} outside the space")));
        }
        let hyps = match self.enumerate() {
            Ok(h) if h.len() <= 1 << 16 => h,
            _ => return Ok(()),
        };
        if !crate::vcdim::is_shattered(&hyps, &self.witness) {
            return Err(Error::invalid(format!(
                "declared witness {:?} is not shattered",
                self.witness
            )));
        }
        Ok(())
    }
}

pub(crate) fn compose_hypothesis(f: &Hypothesis, map: &[usize]) -> Hypothesis {
    Hypothesis::from_fn(map.len(), |x| f.label(map[x]))
}

/// Recovers `theta` from a materialized threshold hypothesis, if it is one.
pub(crate) fn threshold_parameters(d: u32, space: &InstanceSpace, h: &Hypothesis) -> Option<Vec<u64>> {
    let budget = 1u64 << d;
    let mut theta = Vec::with_capacity(d as usize);
    for i in 1..=d {
        // labels along the row must be 1..1 0..0, and (i, 0) is always 1
        let row: Vec<bool> = (0..=budget)
            .map(|j| h.label(space.grid_point(i, j).expect("in grid")))
            .collect();
        let ones = row.iter().take_while(|&&b| b).count();
        if ones == 0 || row[ones..].iter().any(|&b| b) {
            return None;
        }
        theta.push(ones as u64 - 1);
    }
    (theta.iter().sum::<u64>() <= budget).then_some(theta)
}

/// Materializes `f_theta` over the threshold grid.
pub fn threshold_hypothesis(space: &InstanceSpace, theta: &[u64]) -> Hypothesis {
    let width = space.size() / theta.len().max(1);
    let mut h = Hypothesis::zeros(space.size());
    for (row, &t) in theta.iter().enumerate() {
        for j in 0..=(t as usize).min(width - 1) {
            h.set(row * width + j, true);
        }
    }
    h
}

/// Outcome of searching a dataset for a two-example refutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    /// Some hypothesis fits the whole dataset.
    Realizable,
    /// An unrealizable pair (possibly the same example twice).
    Witness(LabeledExample, LabeledExample),
    /// Unrealizable, yet every pair is realizable: the class is not
    /// 2-refutable on this dataset.
    NotTwoRefutable,
}

/// Searches all pairs of distinct examples in `s` for one that no hypothesis fits.
pub fn is_2_refutable_on(class: &HypothesisClass, s: &Dataset) -> Result<Refutation> {
    if crate::erm::realizable(class, s)? {
        return Ok(Refutation::Realizable);
    }
    let distinct = s.distinct();
    for (a, &x) in distinct.iter().enumerate() {
        for &y in &distinct[a..] {
            let pair = Dataset::from_examples(vec![x, y]);
            if !crate::erm::realizable(class, &pair)? {
                return Ok(Refutation::Witness(x, y));
            }
        }
    }
    Ok(Refutation::NotTwoRefutable)
}
