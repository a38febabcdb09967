//! The general learner: repeated augmented ERM on a mixture sample, keeping
//! the distributions whose assigned hypothesis validates.

use rand::Rng;

use super::{samples, Algorithm, Budget, Flag, LearnerConfig, LearnerReport, RoundStats, Session};
use crate::classes::HypothesisClass;
use crate::data::{training_error, DataDistribution, Dataset};
use crate::erm::{augmented_erm_min, erm, ErmInstance};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Consecutive rounds without any acceptance before the loop gives up.
const STALL_ROUNDS: usize = 2;

/// Learns one hypothesis per distribution for `(k, eps)`-realizable input,
/// each within `8 eps` with probability `1 - delta`.
pub fn learn_general(
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    stream: RngStream,
) -> Result<LearnerReport> {
    super::learn(Algorithm::General, distributions, class, config, stream)
}

pub(super) fn run(
    session: &mut Session<'_>,
    class: &HypothesisClass,
    config: &LearnerConfig,
) -> Result<LearnerReport> {
    let n = session.n();
    let (k, eps, c) = (config.k, config.eps, config.c);
    let d = class.vc_dim() as f64;
    let budget = Budget::new(session, config);
    let mut report = LearnerReport::new(Algorithm::General, k, n, class.space().size());
    let mut active: Vec<usize> = (0..n).collect();
    let mut round = 1usize;
    let mut stalled = 0;

    while active.len() > k {
        if config.max_rounds.is_some_and(|cap| round > cap) {
            report.flag(Flag::Capped);
            report.unresolved = active;
            return Ok(report);
        }
        let g = active.len();
        let delta_r = config.delta / (round * round) as f64;
        let d_r = c * (k as f64 * d + g as f64 * (k as f64).log2());
        let m = samples(c * (d_r * (1.0 / eps).ln() + (1.0 / delta_r).ln()) / eps);
        let m_val = samples(c * (g as f64 / delta_r).ln() / eps);
        if !budget.allows(session, (m + g * m_val) as u64) {
            report.flag(Flag::Capped);
            report.unresolved = active;
            return Ok(report);
        }
        let mut stats = RoundStats {
            active: g,
            ..RoundStats::default()
        };

        // mixture sample: pick an active index uniformly, then draw from it
        let mut per_index = vec![0usize; g];
        for _ in 0..m {
            per_index[session.mixture.random_range(0..g)] += 1;
        }
        let datasets: Vec<Dataset> = active
            .iter()
            .zip(&per_index)
            .map(|(&i, &count)| session.sampler.draw(i, count))
            .collect();
        stats.draws += m as u64;

        report.erm_calls += 1;
        let instance = ErmInstance::new(class.clone(), datasets, k)?;
        let fitted = match augmented_erm_min(&instance) {
            Ok(fitted) => fitted,
            Err(Error::Capacity(msg)) => {
                report.rounds.push(stats);
                report.flag(Flag::CapacityAbort);
                report.abort_reason = Some(msg);
                report.unresolved = active;
                return Ok(report);
            }
            Err(e) => return Err(e),
        };

        let mut rejected = Vec::new();
        for (slot, &i) in active.iter().enumerate() {
            let validation = session.sampler.draw(i, m_val);
            stats.draws += m_val as u64;
            let h = fitted.solution.hypothesis_for(slot);
            if training_error(h, &validation)? <= 6.0 * eps {
                report.hypotheses[i] = h.clone();
                stats.accepted += 1;
            } else {
                rejected.push(i);
            }
        }
        report.rounds.push(stats);

        if 2 * rejected.len() > g {
            report.flag(Flag::HalvingViolated);
            if config.abort_on_halving_violation {
                report.unresolved = rejected;
                return Ok(report);
            }
        }
        stalled = if rejected.len() == g { stalled + 1 } else { 0 };
        active = rejected;
        round += 1;
        if stalled >= STALL_ROUNDS {
            report.flag(Flag::Stalled);
            break;
        }
    }

    if !active.is_empty() {
        final_stage(session, class, config, &budget, &active, &mut report)?;
    }
    Ok(report)
}

/// Learns each remaining distribution on its own.
pub(super) fn final_stage(
    session: &mut Session<'_>,
    class: &HypothesisClass,
    config: &LearnerConfig,
    budget: &Budget,
    active: &[usize],
    report: &mut LearnerReport,
) -> Result<()> {
    let d = class.vc_dim() as f64;
    let m = samples(
        config.c * (d * (1.0 / config.eps).ln() + (config.k as f64 / config.delta).ln()) / config.eps,
    );
    if !budget.allows(session, (m * active.len()) as u64) {
        report.flag(Flag::Capped);
        report.unresolved = active.to_vec();
        return Ok(());
    }
    let mut stats = RoundStats {
        active: active.len(),
        final_stage: true,
        ..RoundStats::default()
    };
    for &i in active {
        let s = session.sampler.draw(i, m);
        stats.draws += m as u64;
        report.erm_calls += 1;
        report.hypotheses[i] = erm(class, &s)?.0;
        stats.accepted += 1;
    }
    report.rounds.push(stats);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_all_functions;
    use crate::data::{population_error, LabeledExample};

    #[test]
    fn single_distribution_is_plain_pac() {
        let f = make_all_functions(3).unwrap();
        let d = DataDistribution::new(vec![
            (LabeledExample::new(0, true), 0.5),
            (LabeledExample::new(2, false), 0.5),
        ])
        .unwrap();
        let report = learn_general(std::slice::from_ref(&d), &f, &LearnerConfig::new(1, 0.1, 0.1), RngStream::root(7)).unwrap();
        assert_eq!(population_error(&report.hypotheses[0], &d).unwrap(), 0.0);
        assert!(report.ledger_conserved());
        assert_eq!(report.rounds.len(), 1);
        assert!(report.rounds[0].final_stage);
    }

    #[test]
    fn two_clusters() {
        let f = make_all_functions(2).unwrap();
        let a = DataDistribution::uniform(&[LabeledExample::new(0, true), LabeledExample::new(1, false)]).unwrap();
        let b = DataDistribution::uniform(&[LabeledExample::new(0, false), LabeledExample::new(1, true)]).unwrap();
        let dists = vec![a.clone(), b.clone(), a, b.clone(), b];
        let report = learn_general(&dists, &f, &LearnerConfig::new(2, 0.05, 0.1), RngStream::root(1)).unwrap();
        assert_eq!(report.max_error(&dists).unwrap(), 0.0);
        assert!(report.ledger_conserved());
        assert!(report.flags.is_empty());
    }

    #[test]
    fn sample_cap_flags() {
        let f = make_all_functions(2).unwrap();
        let a = DataDistribution::uniform(&[LabeledExample::new(0, true)]).unwrap();
        let dists = vec![a; 4];
        let mut config = LearnerConfig::new(1, 0.05, 0.1);
        config.max_samples = Some(10);
        let report = learn_general(&dists, &f, &config, RngStream::root(1)).unwrap();
        assert!(report.has_flag(Flag::Capped));
        assert_eq!(report.unresolved, vec![0, 1, 2, 3]);
        assert_eq!(report.total_samples(), 0);
    }
}
