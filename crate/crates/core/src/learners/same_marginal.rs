//! The same-marginal learner: test pooled classifiers on each distribution,
//! reuse one that is good enough, and call ERM only otherwise.

use std::collections::HashMap;

use super::{samples, Algorithm, Budget, Flag, LearnerConfig, LearnerReport, RoundStats, Session};
use crate::classes::HypothesisClass;
use crate::data::{training_error, DataDistribution, Hypothesis, PROBABILITY_TOLERANCE};
use crate::erm::erm;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Learns one hypothesis per distribution, each within `(3 + alpha) eps`
/// w.p. `1 - delta`, with at most `k` ERM calls when all distributions share
/// their marginal over points.
pub fn learn_same_marginal(
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    stream: RngStream,
) -> Result<LearnerReport> {
    super::learn(Algorithm::SameMarginal, distributions, class, config, stream)
}

/// Whether every distribution has the same marginal over points (up to
/// [`PROBABILITY_TOLERANCE`] per point).
pub fn marginals_match(distributions: &[DataDistribution]) -> bool {
    let Some(first) = distributions.first() else {
        return true;
    };
    let reference: HashMap<usize, f64> = first.marginal().into_iter().collect();
    distributions[1..].iter().all(|d| {
        let m: HashMap<usize, f64> = d.marginal().into_iter().collect();
        reference
            .keys()
            .chain(m.keys())
            .all(|x| {
                let p = reference.get(x).copied().unwrap_or(0.0);
                let q = m.get(x).copied().unwrap_or(0.0);
                (p - q).abs() <= PROBABILITY_TOLERANCE
            })
    })
}

pub(super) fn run(
    session: &mut Session<'_>,
    class: &HypothesisClass,
    config: &LearnerConfig,
) -> Result<LearnerReport> {
    let n = session.n();
    let mut report = LearnerReport::new(Algorithm::SameMarginal, config.k, n, class.space().size());
    if !marginals_match(session.sampler.distributions()) {
        if !config.force {
            return Err(Error::MarginalMismatch(
                "distributions do not share a marginal over points".into(),
            ));
        }
        report.flag(Flag::MarginalForced);
    }
    let (eps, delta, c) = (config.eps, config.delta, config.c);
    let d = class.vc_dim() as f64;
    let reuse_threshold = (3.0 + 2.0 * config.alpha / 3.0) * eps;
    let budget = Budget::new(session, config);
    let mut pool: Vec<Hypothesis> = Vec::new();

    for i in 0..n {
        let mut stats = RoundStats {
            active: n - i,
            ..RoundStats::default()
        };
        let m_test = samples(c * (n as f64 * pool.len().max(1) as f64 / delta).ln() / eps);
        let m_fresh = samples(c * (d * (1.0 / eps).ln() + ((pool.len() + 1) as f64 / delta).ln()) / eps);
        let planned = if pool.is_empty() { m_fresh } else { m_test + m_fresh };
        if !budget.allows(session, planned as u64) {
            report.flag(Flag::Capped);
            report.unresolved = (i..n).collect();
            return Ok(report);
        }

        let mut reused = false;
        if !pool.is_empty() {
            let test = session.sampler.draw(i, m_test);
            stats.draws += m_test as u64;
            let mut best = (0, f64::INFINITY);
            for (j, f) in pool.iter().enumerate() {
                let e = training_error(f, &test)?;
                if e < best.1 {
                    best = (j, e);
                }
            }
            if best.1 <= reuse_threshold {
                report.hypotheses[i] = pool[best.0].clone();
                reused = true;
            }
        }
        if !reused {
            let s = session.sampler.draw(i, m_fresh);
            stats.draws += m_fresh as u64;
            report.erm_calls += 1;
            let h = erm(class, &s)?.0;
            pool.push(h.clone());
            report.hypotheses[i] = h;
        }
        stats.accepted = 1;
        report.rounds.push(stats);
    }
    if pool.len() > config.k {
        report.flag(Flag::PoolExceededK);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_all_functions;
    use crate::data::LabeledExample;

    fn dist(labels: &[(usize, bool)]) -> DataDistribution {
        let ex: Vec<_> = labels.iter().map(|&(x, y)| LabeledExample::new(x, y)).collect();
        DataDistribution::uniform(&ex).unwrap()
    }

    #[test]
    fn identical_distributions_need_one_call() {
        let f = make_all_functions(3).unwrap();
        let d = dist(&[(0, true), (1, false), (2, true)]);
        let dists = vec![d; 5];
        let r = learn_same_marginal(&dists, &f, &LearnerConfig::new(1, 0.05, 0.1), RngStream::root(3)).unwrap();
        assert_eq!(r.erm_calls, 1);
        assert!(r.hypotheses.windows(2).all(|w| w[0] == w[1]));
        assert!(r.ledger_conserved());
    }

    #[test]
    fn marginal_mismatch_rejected_unless_forced() {
        let f = make_all_functions(3).unwrap();
        let dists = vec![dist(&[(0, true)]), dist(&[(1, true)])];
        let config = LearnerConfig::new(1, 0.05, 0.1);
        assert!(matches!(
            learn_same_marginal(&dists, &f, &config, RngStream::root(0)),
            Err(Error::MarginalMismatch(_))
        ));
        let mut forced = config;
        forced.force = true;
        let r = learn_same_marginal(&dists, &f, &forced, RngStream::root(0)).unwrap();
        assert!(r.has_flag(Flag::MarginalForced));
    }

    #[test]
    fn marginal_comparison() {
        assert!(marginals_match(&[dist(&[(0, true), (1, true)]), dist(&[(1, false), (0, true)])]));
        assert!(!marginals_match(&[dist(&[(0, true), (1, true)]), dist(&[(0, true), (2, true)])]));
        assert!(!marginals_match(&[dist(&[(0, true)]), dist(&[(0, true), (1, true)])]));
    }
}
