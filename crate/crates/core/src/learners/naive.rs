//! Learning every distribution separately, the baseline all collaborative
//! learners are compared against.

use super::{samples, Algorithm, Budget, Flag, LearnerConfig, LearnerReport, RoundStats, Session};
use crate::classes::HypothesisClass;
use crate::data::DataDistribution;
use crate::erm::erm;
use crate::error::Result;
use crate::rng::RngStream;

/// Independent PAC learning with `c (d ln(1/eps) + ln(n/delta)) / eps`
/// samples per distribution. `config.k` is ignored.
pub fn naive_baseline(
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    stream: RngStream,
) -> Result<LearnerReport> {
    super::learn(Algorithm::Naive, distributions, class, config, stream)
}

pub(super) fn run(
    session: &mut Session<'_>,
    class: &HypothesisClass,
    config: &LearnerConfig,
) -> Result<LearnerReport> {
    let n = session.n();
    let d = class.vc_dim() as f64;
    let m = samples(config.c * (d * (1.0 / config.eps).ln() + (n as f64 / config.delta).ln()) / config.eps);
    let mut report = LearnerReport::new(Algorithm::Naive, n, n, class.space().size());
    let budget = Budget::new(session, config);
    if !budget.allows(session, (m * n) as u64) {
        report.flag(Flag::Capped);
        report.unresolved = (0..n).collect();
        return Ok(report);
    }
    let mut stats = RoundStats {
        active: n,
        final_stage: true,
        ..RoundStats::default()
    };
    for i in 0..n {
        let s = session.sampler.draw(i, m);
        stats.draws += m as u64;
        report.erm_calls += 1;
        report.hypotheses[i] = erm(class, &s)?.0;
        stats.accepted += 1;
    }
    report.rounds.push(stats);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::make_all_functions;
    use crate::data::LabeledExample;

    #[test]
    fn total_is_n_times_per_distribution() {
        let f = make_all_functions(4).unwrap();
        let d = DataDistribution::uniform(&[LabeledExample::new(0, true), LabeledExample::new(3, false)]).unwrap();
        let dists = vec![d; 3];
        let config = LearnerConfig::new(1, 0.05, 0.1);
        let r = naive_baseline(&dists, &f, &config, RngStream::root(0)).unwrap();
        let per = samples(4.0 * (4.0 * 20f64.ln() + 30f64.ln()) / 0.05) as u64;
        assert_eq!(r.total_samples(), 3 * per);
        assert!(r.ledger.counts().iter().all(|&c| c == per));
        assert_eq!(r.max_error(&dists).unwrap(), 0.0);
    }
}
