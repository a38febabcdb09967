//! The refutable learner: color the conflict graph of per-distribution
//! samples, fit one hypothesis per large color class, keep what validates.

use super::general::final_stage;
use super::{
    samples, Algorithm, Budget, ColoringBackend, Flag, LearnerConfig, LearnerReport, RoundStats,
    Session,
};
use crate::classes::HypothesisClass;
use crate::data::{training_error, DataDistribution, Dataset};
use crate::error::{Error, Result};
use crate::graph::{
    approx_color, build_conflict_graph, coloring_budget, exact_color, greedy_color,
    merge_independent_set, Coloring, Graph, MAX_EXACT_COLOR_VERTICES,
};
use crate::par::Execution;
use crate::rng::RngStream;

const STALL_ROUNDS: usize = 2;

/// Learns one `eps`-accurate hypothesis per distribution (w.p. `1 - delta`)
/// for a 2-refutable class and `(k, 0)`-realizable distributions.
pub fn learn_refutable(
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    stream: RngStream,
) -> Result<LearnerReport> {
    super::learn(Algorithm::Refutable, distributions, class, config, stream)
}

/// The color-count bound a backend promises on `g` vertices.
fn gamma(backend: ColoringBackend, g: usize, k: usize) -> usize {
    match backend {
        ColoringBackend::Approximate => coloring_budget(g, k).max(1),
        ColoringBackend::Exact => k.min(g).max(1),
    }
}

fn color(
    backend: ColoringBackend,
    graph: &Graph,
    k: usize,
    report: &mut LearnerReport,
) -> Result<Coloring> {
    match backend {
        ColoringBackend::Approximate => {
            let a = approx_color(graph, k)?;
            if a.promise_violated {
                report.flag(Flag::PromiseViolation);
            }
            Ok(a.coloring)
        }
        ColoringBackend::Exact => {
            if graph.n() > MAX_EXACT_COLOR_VERTICES {
                return Err(Error::capacity(format!(
                    "exact coloring backend handles at most {MAX_EXACT_COLOR_VERTICES} distributions"
                )));
            }
            match exact_color(graph, k)? {
                Some(c) => Ok(c),
                None => {
                    report.flag(Flag::PromiseViolation);
                    Ok(greedy_color(graph))
                }
            }
        }
    }
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
    let mut report = LearnerReport::new(Algorithm::Refutable, k, n, class.space().size());
    let mut active: Vec<usize> = (0..n).collect();
    let mut round = 1usize;
    let mut stalled = 0;

    while !active.is_empty() {
        if config.max_rounds.is_some_and(|cap| round > cap) {
            report.flag(Flag::Capped);
            report.unresolved = active;
            return Ok(report);
        }
        let g = active.len();
        let gf = g as f64;
        let delta_r = config.delta / (round * round) as f64;
        let gamma_r = gamma(config.coloring, g, k);
        let per_dist = (gamma_r as f64 / gf) * (d * (1.0 / eps).ln() + gf + (1.0 / delta_r).ln()) / eps;
        let m = samples(c * per_dist.max((gf / delta_r).ln()));
        let m_val = samples(c * (gf / delta_r).ln() / eps);
        if !budget.allows(session, (g * (m + m_val)) as u64) {
            report.flag(Flag::Capped);
            report.unresolved = active;
            return Ok(report);
        }
        let mut stats = RoundStats {
            active: g,
            gamma: Some(gamma_r),
            ..RoundStats::default()
        };

        let datasets: Vec<Dataset> = active.iter().map(|&i| session.sampler.draw(i, m)).collect();
        stats.draws += (g * m) as u64;
        let graph = build_conflict_graph(class, &datasets, Execution::Sequential)?;
        let coloring = match color(config.coloring, &graph, k, &mut report) {
            Ok(c) => c,
            Err(Error::Capacity(msg)) => {
                report.rounds.push(stats);
                report.flag(Flag::CapacityAbort);
                report.abort_reason = Some(msg);
                report.unresolved = active;
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        stats.colors = Some(coloring.num_colors());
        stats.proper = Some(coloring.is_proper(&graph));
        // the filter must keep the largest class even if the promise failed
        let gamma_eff = gamma_r.max(coloring.num_colors());

        let mut remaining = Vec::new();
        for members in coloring.classes() {
            if 2 * gamma_eff * members.len() < g {
                remaining.extend(members.iter().map(|&slot| active[slot]));
                continue;
            }
            report.erm_calls += 1;
            let h = merge_independent_set(class, &datasets, &members)?;
            for &slot in &members {
                let i = active[slot];
                let validation = session.sampler.draw(i, m_val);
                stats.draws += m_val as u64;
                if training_error(&h, &validation)? <= eps / 2.0 {
                    report.hypotheses[i] = h.clone();
                    stats.accepted += 1;
                } else {
                    remaining.push(i);
                }
            }
        }
        remaining.sort_unstable();
        stalled = if stats.accepted == 0 { stalled + 1 } else { 0 };
        report.rounds.push(stats);
        active = remaining;
        round += 1;
        if stalled >= STALL_ROUNDS {
            report.flag(Flag::Stalled);
            final_stage(session, class, config, &budget, &active, &mut report)?;
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{make_all_functions, make_at_most_one_positive};
    use crate::data::LabeledExample;

    #[test]
    fn single_distribution_one_round() {
        let f = make_all_functions(2).unwrap();
        let d = DataDistribution::uniform(&[LabeledExample::new(0, true), LabeledExample::new(1, false)]).unwrap();
        let r = learn_refutable(std::slice::from_ref(&d), &f, &LearnerConfig::new(1, 0.1, 0.1), RngStream::root(2)).unwrap();
        assert_eq!(r.rounds.len(), 1);
        assert_eq!(r.max_error(&[d]).unwrap(), 0.0);
        assert!(r.ledger_conserved());
    }

    #[test]
    fn bipartite_instance() {
        let f = make_at_most_one_positive(3).unwrap();
        let pos = |p| DataDistribution::uniform(&[LabeledExample::new(p, true)]).unwrap();
        let dists = vec![pos(0), pos(1), pos(0), pos(1), pos(1)];
        let mut config = LearnerConfig::new(2, 0.05, 0.1);
        for backend in [ColoringBackend::Approximate, ColoringBackend::Exact] {
            config.coloring = backend;
            let r = learn_refutable(&dists, &f, &config, RngStream::root(5)).unwrap();
            assert_eq!(r.max_error(&dists).unwrap(), 0.0);
            assert!(r.rounds.iter().all(|s| s.proper == Some(true)));
            assert!(r.flags.is_empty());
        }
    }
}
