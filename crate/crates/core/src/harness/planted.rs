//! Planted `(k, eta)`-realizable instances.

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classes::{ClassDescriptor, ClassKind, HypothesisClass};
use crate::data::{DataDistribution, Hypothesis, LabeledExample};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// How marginals are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantMode {
    /// Each distribution is uniform over its own random nonempty subset of points.
    #[default]
    IidMarginals,
    /// Every distribution is uniform over all points.
    SharedMarginal,
    /// As `IidMarginals`, noiseless, and the class must be 2-refutable.
    RefutableExact,
}

impl PlantMode {
    pub fn name(self) -> &'static str {
        match self {
            PlantMode::IidMarginals => "iid-marginals",
            PlantMode::SharedMarginal => "shared-marginal",
            PlantMode::RefutableExact => "refutable-exact",
        }
    }
}

impl std::str::FromStr for PlantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-marginals" => Ok(PlantMode::IidMarginals),
            "shared-marginal" => Ok(PlantMode::SharedMarginal),
            "refutable-exact" => Ok(PlantMode::RefutableExact),
            other => Err(Error::invalid(format!("unknown plant mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub class: HypothesisClass,
    /// The `k` planted hypotheses, pairwise distinct.
    pub hypotheses: Vec<Hypothesis>,
    /// `assignment[i]` is the planted hypothesis labeling distribution `i`.
    pub assignment: Vec<usize>,
    pub distributions: Vec<DataDistribution>,
    /// Label-flip probability of each distribution.
    pub noise: Vec<f64>,
    pub mode: PlantMode,
}

impl PlantedInstance {
    pub fn n(&self) -> usize {
        self.distributions.len()
    }

    pub fn k(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn descriptor(&self) -> ClassDescriptor {
        self.class.descriptor()
    }

    pub fn max_noise(&self) -> f64 {
        self.noise.iter().copied().fold(0.0, f64::max)
    }
}

/// Support-point count up to which debug builds re-verify realizability.
const DEBUG_CHECK_POINTS: usize = 10;

/// `n` distributions labeled by `k` distinct hypotheses of `class` with
/// label-flip probability `noise`. When `n >= k` every planted hypothesis
/// labels at least one distribution.
pub fn generate_planted(
    class: &HypothesisClass,
    n: usize,
    k: usize,
    noise: f64,
    mode: PlantMode,
    stream: RngStream,
) -> Result<PlantedInstance> {
    if n == 0 || k == 0 {
        return Err(Error::invalid("need n >= 1 and k >= 1"));
    }
    if !(0.0..0.5).contains(&noise) {
        return Err(Error::invalid(format!("noise must lie in [0, 1/2), got {noise}")));
    }
    if mode == PlantMode::RefutableExact {
        if noise > 0.0 {
            return Err(Error::invalid("refutable-exact mode is noiseless"));
        }
        if !class.is_two_refutable_by_construction() {
            return Err(Error::invalid("refutable-exact mode needs a 2-refutable class"));
        }
    }
    let size = class.space().size();
    let mut rng = stream.rng();
    let hypotheses = pick_behaviors(class, k, &mut rng)?;

    let mut assignment: Vec<usize> = (0..n).map(|i| i % k).collect();
    if n < k {
        assignment = (0..n).map(|_| rng.random_range(0..k)).collect();
    }
    assignment.shuffle(&mut rng);

    let shared: Vec<usize> = (0..size).collect();
    let distributions = assignment
        .iter()
        .map(|&j| {
            let marginal = match mode {
                PlantMode::SharedMarginal => shared.clone(),
                _ => random_subset(size, &mut rng),
            };
            planted_distribution(&hypotheses[j], &marginal, noise)
        })
        .collect::<Result<Vec<_>>>()?;

    let inst = PlantedInstance {
        class: class.clone(),
        hypotheses,
        assignment,
        distributions,
        noise: vec![noise; n],
        mode,
    };
    debug_assert!(debug_check(&inst), "planted instance failed its realizability check");
    Ok(inst)
}

fn debug_check(inst: &PlantedInstance) -> bool {
    let mut points: Vec<usize> = inst
        .distributions
        .iter()
        .flat_map(|d| d.support().iter().map(|(e, _)| e.point))
        .collect();
    points.sort_unstable();
    points.dedup();
    if points.len() > DEBUG_CHECK_POINTS || inst.n() > 16 {
        return true;
    }
    match crate::realizable::realizability_check(&inst.distributions, &inst.class, inst.k(), inst.max_noise()) {
        Ok(found) => found.is_some(),
        Err(Error::Capacity(_)) => true,
        Err(_) => false,
    }
}

/// `(x, f(x))` with mass `(1 - eta)/|M|` and `(x, 1 - f(x))` with `eta/|M|`.
fn planted_distribution(f: &Hypothesis, marginal: &[usize], noise: f64) -> Result<DataDistribution> {
    let p = 1.0 / marginal.len() as f64;
    let mut support = Vec::with_capacity(2 * marginal.len());
    for &x in marginal {
        let y = f.label(x);
        support.push((LabeledExample::new(x, y), (1.0 - noise) * p));
        if noise > 0.0 {
            support.push((LabeledExample::new(x, !y), noise * p));
        }
    }
    DataDistribution::new(support)
}

fn random_subset<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..size).filter(|_| rng.random_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn pick_behaviors<R: Rng + ?Sized>(class: &HypothesisClass, k: usize, rng: &mut R) -> Result<Vec<Hypothesis>> {
    let size = class.space().size();
    if let ClassKind::AllFunctions { d } = class.kind() {
        if *d < usize::BITS as usize && k > 1 << d {
            return Err(Error::capacity(format!("all_functions({d}) has fewer than {k} hypotheses")));
        }
        if *d > crate::classes::MAX_ENUMERABLE_ALL_FUNCTIONS {
            let mut out: Vec<Hypothesis> = Vec::with_capacity(k);
            while out.len() < k {
                let h = Hypothesis::from_fn(size, |_| rng.random_bool(0.5));
                if !out.contains(&h) {
                    out.push(h);
                }
            }
            return Ok(out);
        }
    }
    let all = class.enumerate()?;
    if all.len() < k {
        return Err(Error::capacity(format!(
            "class has {} distinct hypotheses, fewer than k = {k}",
            all.len()
        )));
    }
    Ok(sample_indices(rng, all.len(), k).into_iter().map(|i| all[i].clone()).collect())
}
