//! Learning without knowing `k`: try increasing guesses until one validates.

use serde::{Deserialize, Serialize};

use super::general::final_stage;
use super::{run, samples, Algorithm, Budget, Flag, LearnerConfig, LearnerReport, RoundStats, Session};
use crate::classes::HypothesisClass;
use crate::data::{training_error, DataDistribution};
use crate::error::Result;
use crate::rng::RngStream;

/// Validation accepts errors up to this multiple of the learner's guarantee.
pub const VALIDATION_SLACK: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessOutcome {
    pub k: usize,
    /// Samples spent on this guess, validation included.
    pub samples: u64,
    pub accepted: bool,
}

/// The general learner's sample bound as a function of `k`, without its
/// hidden constant: `(k d (1 + ln(n/k)) ln(1/eps) + n ln k ln(1/eps) + n ln(n/delta)) / eps`.
pub fn guess_bound(k: usize, n: usize, d: usize, eps: f64, delta: f64) -> f64 {
    let (k, n, d) = (k as f64, n as f64, d as f64);
    let l = (1.0 / eps).ln();
    (k * d * (1.0 + (n / k).ln()) * l + n * k.ln() * l + n * (n / delta).ln()) / eps
}

/// Guesses in the order they are tried: `k_1 = 1`, then `k_2 - 1, k_2,
/// k_3 - 1, k_3, ...`, where each `k_{j+1}` is the smallest `k` whose bound
/// is at least twice that of `k_j`. Never exceeds `n`.
pub fn doubling_guesses(n: usize, d: usize, eps: f64, delta: f64) -> Vec<usize> {
    let mut anchors = vec![1usize];
    loop {
        let last = *anchors.last().expect("nonempty");
        let target = 2.0 * guess_bound(last, n, d, eps, delta);
        match (last + 1..=n).find(|&k| guess_bound(k, n, d, eps, delta) >= target) {
            Some(k) => anchors.push(k),
            None => break,
        }
    }
    let mut order = vec![1usize];
    for &a in &anchors[1..] {
        for k in [a - 1, a] {
            if !order.contains(&k) {
                order.push(k);
            }
        }
    }
    order.retain(|&k| k <= n);
    order
}

/// Runs `algorithm` on successive guesses of `k` (ignoring `config.k`) and
/// returns the first run whose outputs pass a fresh validation. The failure
/// probability is split as `delta / 2^j` for the `j`-th guess, half to the
/// run and half to its validation.
pub fn doubling_wrapper(
    algorithm: Algorithm,
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    stream: RngStream,
) -> Result<LearnerReport> {
    config.validate()?;
    let n = distributions.len();
    let mut session = Session::new(distributions, stream);
    let start = session.ledger().clone();
    let guesses = doubling_guesses(n, class.vc_dim().max(1), config.eps, config.delta);
    let mut outcomes = Vec::new();
    let mut rounds = Vec::new();
    let mut erm_calls = 0;

    for (j, &k) in guesses.iter().enumerate() {
        let before = session.ledger().total();
        let delta_j = config.delta / 2f64.powi(j as i32 + 1);
        let mut guess_config = config.clone();
        guess_config.k = k;
        guess_config.delta = delta_j / 2.0;
        guess_config.abort_on_halving_violation = true;
        let report = run(algorithm, &mut session, class, &guess_config)?;
        rounds.extend(report.rounds.iter().cloned());
        erm_calls += report.erm_calls;

        let rejected_by_run = !report.unresolved.is_empty()
            || report.flags.iter().any(|f| {
                matches!(
                    f,
                    Flag::Capped
                        | Flag::HalvingViolated
                        | Flag::Stalled
                        | Flag::PromiseViolation
                        | Flag::PoolExceededK
                        | Flag::CapacityAbort
                )
            });
        let accepted = !rejected_by_run && {
            let threshold = algorithm.guarantee(config) * config.eps * VALIDATION_SLACK;
            let m = samples(config.c * (n as f64 / (delta_j / 2.0)).ln() / config.eps);
            let mut stats = RoundStats {
                active: n,
                ..RoundStats::default()
            };
            let mut ok = true;
            for i in 0..n {
                let v = session.sampler.draw(i, m);
                stats.draws += m as u64;
                if training_error(&report.hypotheses[i], &v)? > threshold {
                    ok = false;
                    break;
                }
                stats.accepted += 1;
            }
            rounds.push(stats);
            ok
        };
        outcomes.push(GuessOutcome {
            k,
            samples: session.ledger().total() - before,
            accepted,
        });
        if accepted {
            let mut out = report;
            out.ledger = session.ledger().since(&start);
            out.rounds = rounds;
            out.erm_calls = erm_calls;
            out.guesses = outcomes;
            return Ok(out);
        }
    }

    // every guess rejected: learn each distribution separately
    let mut out = LearnerReport::new(algorithm, n, n, class.space().size());
    let mut fallback = config.clone();
    fallback.k = n;
    let budget = Budget::new(&session, &fallback);
    final_stage(&mut session, class, &fallback, &budget, &(0..n).collect::<Vec<_>>(), &mut out)?;
    out.flag(Flag::DoublingExhausted);
    rounds.append(&mut out.rounds);
    out.rounds = rounds;
    out.erm_calls += erm_calls;
    out.ledger = session.ledger().since(&start);
    out.guesses = outcomes;
    Ok(out)
}
