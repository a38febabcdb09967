//! The collaborative learners and the doubling wrapper.
//!
//! Every learner draws through a [`Sampler`], so each draw is charged to the
//! distribution it came from, and reports one hypothesis per distribution.

mod doubling;
mod general;
mod naive;
mod refutable;
mod same_marginal;

pub use doubling::{doubling_guesses, doubling_wrapper, guess_bound, GuessOutcome, VALIDATION_SLACK};
pub use general::learn_general;
pub use naive::naive_baseline;
pub use refutable::learn_refutable;
pub use same_marginal::{learn_same_marginal, marginals_match};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classes::HypothesisClass;
use crate::data::{DataDistribution, Hypothesis, SampleLedger, Sampler};
use crate::error::{Error, Result};
use crate::rng::{tags, RngStream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Rounds of augmented ERM on a mixture sample; works for any class.
    General,
    /// Pool-and-reuse clustering when all distributions share a marginal.
    SameMarginal,
    /// Conflict-graph coloring for 2-refutable classes and noiseless data.
    Refutable,
    /// Each distribution learned on its own; the comparison baseline.
    Naive,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::General => "general",
            Algorithm::SameMarginal => "same-marginal",
            Algorithm::Refutable => "refutable",
            Algorithm::Naive => "naive",
        }
    }

    /// The multiple of `eps` each output is guaranteed to reach (w.p. 1 - delta).
    pub fn guarantee(self, config: &LearnerConfig) -> f64 {
        match self {
            Algorithm::General => 8.0,
            Algorithm::SameMarginal => 3.0 + config.alpha,
            Algorithm::Refutable | Algorithm::Naive => 1.0,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Algorithm::General),
            "same-marginal" => Ok(Algorithm::SameMarginal),
            "refutable" => Ok(Algorithm::Refutable),
            "naive" => Ok(Algorithm::Naive),
            other => Err(Error::invalid(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// How the refutable learner colors conflict graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColoringBackend {
    /// BFS for `k = 2`, degree-threshold recursion for `k >= 3`.
    #[default]
    Approximate,
    /// Exhaustive search for a `k`-coloring (small graphs only).
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    /// Multiplier on every sample-size formula.
    pub c: f64,
    /// Reuse slack of the same-marginal learner.
    pub alpha: f64,
    pub coloring: ColoringBackend,
    /// Allow the same-marginal learner to run on differing marginals.
    pub force: bool,
    /// Stop (flagged) before a draw would push the total past this.
    pub max_samples: Option<u64>,
    /// Stop (flagged) after this many main-loop rounds.
    pub max_rounds: Option<usize>,
    /// Stop the general learner as soon as a round fails to halve the active set.
    pub abort_on_halving_violation: bool,
}

pub const DEFAULT_C: f64 = 4.0;

impl LearnerConfig {
    pub fn new(k: usize, eps: f64, delta: f64) -> Self {
        LearnerConfig {
            k,
            eps,
            delta,
            c: DEFAULT_C,
            alpha: 1.0,
            coloring: ColoringBackend::default(),
            force: false,
            max_samples: None,
            max_rounds: None,
            abort_on_halving_violation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps <= 0.125) {
            return Err(Error::invalid(format!("eps must lie in (0, 1/8], got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.c.is_nan() || self.c < 1.0 {
            return Err(Error::invalid(format!("c must be at least 1, got {}", self.c)));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// A sample or round cap stopped the run.
    Capped,
    /// A round of the general learner left more than half the active set.
    HalvingViolated,
    /// Rounds stopped making progress; the rest was learned one by one.
    Stalled,
    /// A conflict graph needed more colors than promised.
    PromiseViolation,
    /// The same-marginal pool grew beyond `k`.
    PoolExceededK,
    /// Marginals differed and the same-marginal learner ran anyway.
    MarginalForced,
    /// An oracle hit its capacity limit.
    CapacityAbort,
    /// The doubling wrapper rejected every guess below `n`.
    DoublingExhausted,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::Capped => "capped",
            Flag::HalvingViolated => "halving_violated",
            Flag::Stalled => "stalled",
            Flag::PromiseViolation => "promise_violation",
            Flag::PoolExceededK => "pool_exceeded_k",
            Flag::MarginalForced => "marginal_forced",
            Flag::CapacityAbort => "capacity_abort",
            Flag::DoublingExhausted => "doubling_exhausted",
        }
    }
}

/// What happened in one round (or one stage) of a learner.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundStats {
    /// Active distributions at the start of the round.
    pub active: usize,
    /// Samples drawn during the round.
    pub draws: u64,
    /// Distributions that received their final hypothesis in this round.
    pub accepted: usize,
    /// Colors used, for coloring rounds.
    pub colors: Option<usize>,
    /// Whether the round's coloring was proper.
    pub proper: Option<bool>,
    /// Color-count bound used for the round's sample size and class filter.
    pub gamma: Option<usize>,
    /// Per-distribution learning after the main loop.
    pub final_stage: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerReport {
    pub algorithm: Algorithm,
    /// The `k` the learner ran with (the accepted guess, under doubling).
    pub k: usize,
    pub hypotheses: Vec<Hypothesis>,
    /// Distributions left without a learned hypothesis (their entry is all zeros).
    pub unresolved: Vec<usize>,
    pub ledger: SampleLedger,
    pub rounds: Vec<RoundStats>,
    /// Oracle invocations: plain ERM, augmented ERM and merges.
    pub erm_calls: usize,
    pub flags: Vec<Flag>,
    pub abort_reason: Option<String>,
    /// Guesses tried by the doubling wrapper, in order.
    pub guesses: Vec<GuessOutcome>,
}

impl LearnerReport {
    pub(crate) fn new(algorithm: Algorithm, k: usize, n: usize, size: usize) -> Self {
        LearnerReport {
            algorithm,
            k,
            hypotheses: vec![Hypothesis::zeros(size); n],
            unresolved: Vec::new(),
            ledger: SampleLedger::new(n),
            rounds: Vec::new(),
            erm_calls: 0,
            flags: Vec::new(),
            abort_reason: None,
            guesses: Vec::new(),
        }
    }

    pub fn flag(&mut self, flag: Flag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn total_samples(&self) -> u64 {
        self.ledger.total()
    }

    /// Largest population error over the distributions.
    pub fn max_error(&self, distributions: &[DataDistribution]) -> Result<f64> {
        let mut worst = 0.0f64;
        for (h, d) in self.hypotheses.iter().zip(distributions) {
            worst = worst.max(crate::data::population_error(h, d)?);
        }
        Ok(worst)
    }

    /// Whether the per-round draws add up to the ledger total.
    pub fn ledger_conserved(&self) -> bool {
        let per_dist: u64 = self.ledger.counts().iter().sum();
        let per_round: u64 = self.rounds.iter().map(|r| r.draws).sum();
        per_dist == self.ledger.total() && per_round == self.ledger.total()
    }
}

/// Sampling state shared by a learner run: one stream per distribution and
/// one for choosing mixture components.
pub struct Session<'a> {
    pub(crate) sampler: Sampler<'a>,
    pub(crate) mixture: StreamRng,
}

impl<'a> Session<'a> {
    pub fn new(distributions: &'a [DataDistribution], stream: RngStream) -> Self {
        Session {
            sampler: Sampler::new(distributions, stream),
            mixture: stream.child(tags::MIXTURE, 0).rng(),
        }
    }

    pub fn n(&self) -> usize {
        self.sampler.n()
    }

    pub fn ledger(&self) -> &SampleLedger {
        self.sampler.ledger()
    }
}

/// Runs `algorithm` with a known `k` on fresh sample streams derived from `stream`.
pub fn learn(
    algorithm: Algorithm,
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    stream: RngStream,
) -> Result<LearnerReport> {
    let mut session = Session::new(distributions, stream);
    run(algorithm, &mut session, class, config)
}

pub(crate) fn run(
    algorithm: Algorithm,
    session: &mut Session<'_>,
    class: &HypothesisClass,
    config: &LearnerConfig,
) -> Result<LearnerReport> {
    config.validate()?;
    if session.n() == 0 {
        return Err(Error::invalid("at least one distribution is required"));
    }
    for d in session.sampler.distributions() {
        if d.max_point() >= class.space().size() {
            return Err(Error::domain(format!(
                "distribution uses point {} outside the class's {} points",
                d.max_point(),
                class.space().size()
            )));
        }
    }
    let start = session.ledger().clone();
    let mut report = match algorithm {
        Algorithm::General => general::run(session, class, config)?,
        Algorithm::SameMarginal => same_marginal::run(session, class, config)?,
        Algorithm::Refutable => refutable::run(session, class, config)?,
        Algorithm::Naive => naive::run(session, class, config)?,
    };
    report.ledger = session.ledger().since(&start);
    debug_assert!(report.ledger_conserved());
    Ok(report)
}

/// `ceil(x)` as a sample count, at least 1.
pub(crate) fn samples(x: f64) -> usize {
    if x.is_finite() {
        (x.ceil() as usize).max(1)
    } else {
        usize::MAX
    }
}

/// Draw-budget bookkeeping shared by the learners.
pub(crate) struct Budget {
    start_total: u64,
    max_samples: Option<u64>,
}

impl Budget {
    pub(crate) fn new(session: &Session<'_>, config: &LearnerConfig) -> Self {
        Budget {
            start_total: session.ledger().total(),
            max_samples: config.max_samples,
        }
    }

    /// Whether drawing `planned` more samples stays within the cap.
    pub(crate) fn allows(&self, session: &Session<'_>, planned: u64) -> bool {
        self.max_samples.is_none_or(|cap| {
            session.ledger().total() - self.start_total + planned <= cap
        })
    }
}
