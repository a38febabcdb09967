//! Examples, datasets, hypotheses, distributions and the two error functionals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Tolerance on the total mass of a [`DataDistribution`].
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// How point identifiers map to structured payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Opaque identifiers `0..size`.
    Flat,
    /// Pairs `(i, j)` with `i in 1..=d`, `j in 0..=2^d`, encoded as
    /// `(i - 1) * (2^d + 1) + j`.
    ThresholdGrid { d: u32 },
}

/// A finite, ordered instance space. Points are the integers `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpace {
    size: usize,
    layout: Layout,
}

impl InstanceSpace {
    pub fn flat(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("instance space must contain at least one point"));
        }
        Ok(InstanceSpace {
            size,
            layout: Layout::Flat,
        })
    }

    /// The grid `[d] x {0, .., 2^d}` used by the budgeted threshold class.
    pub fn threshold_grid(d: u32) -> Result<Self> {
        if d == 0 || d > 16 {
            return Err(Error::capacity(format!("threshold grid needs 1 <= d <= 16, got {d}")));
        }
        let width = (1usize << d) + 1;
        Ok(InstanceSpace {
            size: d as usize * width,
            layout: Layout::ThresholdGrid { d },
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn contains(&self, point: usize) -> bool {
        point < self.size
    }

    /// `(i, j)` payload of a grid point, `i` one-based.
    pub fn payload(&self, point: usize) -> Option<(u32, u64)> {
        match self.layout {
            Layout::ThresholdGrid { d } if point < self.size => {
                let width = (1usize << d) + 1;
                Some(((point / width) as u32 + 1, (point % width) as u64))
            }
            _ => None,
        }
    }

    /// Inverse of [`InstanceSpace::payload`].
    pub fn grid_point(&self, i: u32, j: u64) -> Result<usize> {
        match self.layout {
            Layout::ThresholdGrid { d } => {
                let budget = 1u64 << d;
                if i == 0 || i > d || j > budget {
                    return Err(Error::domain(format!(
                        "grid payload ({i}, {j}) outside [1, {d}] x [0, {budget}]"
                    )));
                }
                Ok((i as usize - 1) * (budget as usize + 1) + j as usize)
            }
            Layout::Flat => Err(Error::domain("flat space has no grid payloads")),
        }
    }
}

/// A point-label pair. Labels are binary, stored as `bool` (`true` = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledExample {
    pub point: usize,
    #[serde(with = "label01")]
    pub label: bool,
}

impl LabeledExample {
    pub fn new(point: usize, label: bool) -> Self {
        LabeledExample { point, label }
    }
}

pub(crate) mod label01 {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*label))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

/// A multiset of labeled examples. Duplicates are kept and weighted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    pub fn from_examples(examples: Vec<LabeledExample>) -> Self {
        Dataset { examples }
    }

    /// Shorthand for tests and generators: `(point, label)` pairs.
    pub fn from_pairs(pairs: &[(usize, bool)]) -> Self {
        Dataset {
            examples: pairs.iter().map(|&(p, l)| LabeledExample::new(p, l)).collect(),
        }
    }

    pub fn push(&mut self, example: LabeledExample) {
        self.examples.push(example);
    }

    pub fn extend_from(&mut self, other: &Dataset) {
        self.examples.extend_from_slice(&other.examples);
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    /// Multiset union of several datasets.
    pub fn union<'a, I: IntoIterator<Item = &'a Dataset>>(parts: I) -> Dataset {
        let mut out = Dataset::new();
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    pub fn max_point(&self) -> Option<usize> {
        self.examples.iter().map(|e| e.point).max()
    }

    /// The distinct examples, sorted.
    pub fn distinct(&self) -> Vec<LabeledExample> {
        let mut v = self.examples.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;
    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

/// A total labeling of an instance space, materialized as a bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    labels: BitVec,
}

impl std::fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hypothesis({:?})", self.labels)
    }
}

impl Hypothesis {
    pub fn zeros(size: usize) -> Self {
        Hypothesis {
            labels: BitVec::zeros(size),
        }
    }

    pub fn from_bits(labels: BitVec) -> Self {
        Hypothesis { labels }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        Hypothesis {
            labels: BitVec::from_bools((0..size).map(&mut f)),
        }
    }

    pub fn from_labels(labels: &[u8]) -> Self {
        Hypothesis {
            labels: BitVec::from_bools(labels.iter().map(|&b| b != 0)),
        }
    }

    /// Number of points the hypothesis is defined on.
    pub fn domain_size(&self) -> usize {
        self.labels.len()
    }

    /// Label of `point`; errors when the point is outside the domain.
    pub fn eval(&self, point: usize) -> Result<bool> {
        if point >= self.labels.len() {
            return Err(Error::domain(format!(
                "point {point} outside hypothesis domain of size {}",
                self.labels.len()
            )));
        }
        Ok(self.labels.get(point))
    }

    #[inline]
    pub fn label(&self, point: usize) -> bool {
        self.labels.get(point)
    }

    pub fn set(&mut self, point: usize, label: bool) {
        self.labels.set(point, label);
    }

    pub fn bits(&self) -> &BitVec {
        &self.labels
    }

    pub fn to_labels(&self) -> Vec<u8> {
        self.labels.iter().map(u8::from).collect()
    }

    /// Number of examples in `s` the hypothesis gets wrong.
    pub fn mistakes(&self, s: &Dataset) -> Result<usize> {
        let mut wrong = 0;
        for e in s {
            if self.eval(e.point)? != e.label {
                wrong += 1;
            }
        }
        Ok(wrong)
    }

    pub fn is_consistent(&self, s: &Dataset) -> Result<bool> {
        Ok(self.mistakes(s)? == 0)
    }
}

/// A finite-support distribution over labeled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDistribution {
    support: Vec<(LabeledExample, f64)>,
    cumulative: Vec<f64>,
}

impl DataDistribution {
    /// Validates mass, sign, and uniqueness of the support.
    pub fn new(support: Vec<(LabeledExample, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("distribution support is empty"));
        }
        let mut seen = std::collections::HashSet::with_capacity(support.len());
        let mut cumulative = Vec::with_capacity(support.len());
        let mut acc = 0.0;
        for (ex, p) in &support {
            if !(p.is_finite() && *p >= 0.0 && *p <= 1.0 + PROBABILITY_TOLERANCE) {
                return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
            }
            if !seen.insert(*ex) {
                return Err(Error::invalid(format!(
                    "duplicate support entry (point {}, label {})",
                    ex.point,
                    u8::from(ex.label)
                )));
            }
            acc += p;
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {acc}, expected 1")));
        }
        Ok(DataDistribution { support, cumulative })
    }

    /// Uniform over the distinct elements of `examples`.
    pub fn uniform(examples: &[LabeledExample]) -> Result<Self> {
        let mut distinct = examples.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let p = 1.0 / distinct.len().max(1) as f64;
        DataDistribution::new(distinct.into_iter().map(|e| (e, p)).collect())
    }

    pub fn support(&self) -> &[(LabeledExample, f64)] {
        &self.support
    }

    pub fn max_point(&self) -> usize {
        self.support.iter().map(|(e, _)| e.point).max().unwrap_or(0)
    }

    /// Whether every support point has deterministic label.
    pub fn is_deterministic(&self) -> bool {
        let mut pts: Vec<usize> = self
            .support
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(e, _)| e.point)
            .collect();
        let n = pts.len();
        pts.sort_unstable();
        pts.dedup();
        pts.len() == n
    }

    /// Marginal over points, sorted by point, zero-mass points dropped.
    pub fn marginal(&self) -> Vec<(usize, f64)> {
        let mut m: std::collections::BTreeMap<usize, f64> = Default::default();
        for (e, p) in &self.support {
            if *p > 0.0 {
                *m.entry(e.point).or_default() += p;
            }
        }
        m.into_iter().collect()
    }

    /// One inverse-CDF draw over the support order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledExample {
        let total = *self.cumulative.last().expect("non-empty support");
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.support[idx.min(self.support.len() - 1)].0
    }
}

/// Per-distribution draw counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleLedger {
    counts: Vec<u64>,
    total: u64,
}

impl SampleLedger {
    pub fn new(n: usize) -> Self {
        SampleLedger {
            counts: vec![0; n],
            total: 0,
        }
    }

    pub fn record(&mut self, distribution: usize, draws: u64) {
        self.counts[distribution] += draws;
        self.total += draws;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Adds another ledger's counts (used when a wrapper runs sub-learners).
    pub fn absorb(&mut self, other: &SampleLedger) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    /// Draws recorded after the snapshot `earlier` was taken.
    pub fn since(&self, earlier: &SampleLedger) -> SampleLedger {
        assert_eq!(self.counts.len(), earlier.counts.len());
        SampleLedger {
            counts: self
                .counts
                .iter()
                .zip(&earlier.counts)
                .map(|(a, b)| a - b)
                .collect(),
            total: self.total - earlier.total,
        }
    }
}

/// `Pr_{(x, y) ~ D}[f(x) != y]`.
pub fn population_error(f: &Hypothesis, d: &DataDistribution) -> Result<f64> {
    let mut err = 0.0;
    for (e, p) in d.support() {
        if f.eval(e.point)? != e.label {
            err += p;
        }
    }
    Ok(err.clamp(0.0, 1.0))
}

/// Fraction of examples in `s` misclassified by `f`, duplicates counted.
pub fn training_error(f: &Hypothesis, s: &Dataset) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::invalid("training error of an empty dataset"));
    }
    Ok(f.mistakes(s)? as f64 / s.len() as f64)
}

/// Draws `m` i.i.d. examples from `d` and charges them to `index` in the ledger.
pub fn sample(
    d: &DataDistribution,
    index: usize,
    m: usize,
    rng: &mut StreamRng,
    ledger: &mut SampleLedger,
) -> Dataset {
    let examples = (0..m).map(|_| d.draw(rng)).collect();
    ledger.record(index, m as u64);
    Dataset::from_examples(examples)
}

/// Sample access to a fixed list of distributions, one RNG stream each.
///
/// Draws for distribution `i` always come from stream `i`, so the data a
/// learner sees from `D_i` depends only on how many times it asked, not on
/// the interleaving of requests across distributions.
pub struct Sampler<'a> {
    distributions: &'a [DataDistribution],
    streams: Vec<StreamRng>,
    ledger: SampleLedger,
}

impl<'a> Sampler<'a> {
    pub fn new(distributions: &'a [DataDistribution], base: crate::rng::RngStream) -> Self {
        let streams = (0..distributions.len())
            .map(|i| base.child(crate::rng::tags::DISTRIBUTION, i as u64).rng())
            .collect();
        Sampler {
            distributions,
            streams,
            ledger: SampleLedger::new(distributions.len()),
        }
    }

    pub fn n(&self) -> usize {
        self.distributions.len()
    }

    pub fn distributions(&self) -> &'a [DataDistribution] {
        self.distributions
    }

    pub fn draw(&mut self, i: usize, m: usize) -> Dataset {
        sample(&self.distributions[i], i, m, &mut self.streams[i], &mut self.ledger)
    }

    pub fn ledger(&self) -> &SampleLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> SampleLedger {
        self.ledger
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn ex(p: usize, l: u8) -> LabeledExample {
        LabeledExample::new(p, l == 1)
    }

    #[test]
    fn population_error_constant_hypothesis() {
        let zero = Hypothesis::zeros(2);
        let d = DataDistribution::new(vec![(ex(0, 0), 1.0)]).unwrap();
        assert_eq!(population_error(&zero, &d).unwrap(), 0.0);
        let d = DataDistribution::new(vec![(ex(0, 1), 0.3), (ex(1, 0), 0.7)]).unwrap();
        assert!((population_error(&zero, &d).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn population_error_domain_mismatch() {
        let f = Hypothesis::zeros(1);
        let d = DataDistribution::new(vec![(ex(3, 0), 1.0)]).unwrap();
        assert!(matches!(population_error(&f, &d), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn training_error_cases() {
        let s = Dataset::from_pairs(&[(0, true), (0, false)]);
        for f in [Hypothesis::zeros(1), Hypothesis::from_labels(&[1])] {
            assert_eq!(training_error(&f, &s).unwrap(), 0.5);
        }
        let s = Dataset::from_pairs(&[(0, true), (0, true), (1, false)]);
        let f = Hypothesis::zeros(2);
        assert!((training_error(&f, &s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let consistent = Hypothesis::from_labels(&[1, 0]);
        assert_eq!(training_error(&consistent, &s).unwrap(), 0.0);
        assert!(matches!(
            training_error(&f, &Dataset::new()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(DataDistribution::new(vec![]).is_err());
        assert!(DataDistribution::new(vec![(ex(0, 0), 0.5)]).is_err());
        assert!(DataDistribution::new(vec![(ex(0, 0), 0.5), (ex(0, 0), 0.5)]).is_err());
        assert!(DataDistribution::new(vec![(ex(0, 0), 0.5), (ex(0, 1), 0.5 + 1e-12)]).is_ok());
        assert!(DataDistribution::new(vec![(ex(0, 0), -0.5), (ex(0, 1), 1.5)]).is_err());
    }

    #[test]
    fn sample_zero_and_degenerate() {
        let d = DataDistribution::new(vec![(ex(2, 1), 1.0)]).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let mut ledger = SampleLedger::new(1);
        let s = sample(&d, 0, 0, &mut rng, &mut ledger);
        assert!(s.is_empty());
        assert_eq!(ledger.total(), 0);
        let s = sample(&d, 0, 5, &mut rng, &mut ledger);
        assert_eq!(s.examples(), &[ex(2, 1); 5]);
        assert_eq!(ledger.counts(), &[5]);
    }

    #[test]
    fn sample_uniform_frequencies() {
        let d = DataDistribution::new(vec![(ex(0, 0), 0.5), (ex(1, 1), 0.5)]).unwrap();
        let mut rng = RngStream::new(42, 0).rng();
        let mut ledger = SampleLedger::new(1);
        let m = 100_000;
        let s = sample(&d, 0, m, &mut rng, &mut ledger);
        let ones = s.iter().filter(|e| e.point == 0).count() as f64 / m as f64;
        assert!((ones - 0.5).abs() < 0.01, "frequency {ones}");
        assert_eq!(ledger.total(), m as u64);
    }

    #[test]
    fn sampler_is_reproducible() {
        let d = vec![
            DataDistribution::new(vec![(ex(0, 0), 0.25), (ex(1, 1), 0.75)]).unwrap(),
            DataDistribution::new(vec![(ex(2, 0), 0.5), (ex(3, 1), 0.5)]).unwrap(),
        ];
        let run = || {
            let mut s = Sampler::new(&d, RngStream::new(9, 4));
            let a = s.draw(0, 10);
            let b = s.draw(1, 10);
            (a, b, s.into_ledger())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn grid_encoding_round_trips() {
        let space = InstanceSpace::threshold_grid(2).unwrap();
        assert_eq!(space.size(), 10);
        for p in 0..space.size() {
            let (i, j) = space.payload(p).unwrap();
            assert_eq!(space.grid_point(i, j).unwrap(), p);
        }
        assert!(space.grid_point(3, 0).is_err());
        assert!(space.grid_point(1, 5).is_err());
    }

    #[test]
    fn label_json_is_zero_one() {
        let e = ex(4, 1);
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"point":4,"label":1}"#);
        assert!(serde_json::from_str::<LabeledExample>(r#"{"point":4,"label":2}"#).is_err());
    }
}
