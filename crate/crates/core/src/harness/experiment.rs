//! Seeded experiment sweeps over planted instances.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::planted::{generate_planted, PlantMode};
use super::stats::{mean_ci, proportion_ci};
use crate::classes::{make_all_functions, make_at_most_one_positive, HypothesisClass};
use crate::data::DataDistribution;
use crate::error::{Error, Result};
use crate::learners::{doubling_wrapper, learn, Algorithm, ColoringBackend, LearnerConfig, DEFAULT_C};
use crate::par::{map_slice, Execution};
use crate::rng::{tags, RngStream};

/// The class built for each grid value of `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassFamily {
    /// `all_functions(d)`.
    #[default]
    AllFunctions,
    /// `at_most_one_positive(d)`.
    AtMostOnePositive,
}

impl ClassFamily {
    pub fn build(self, d: usize) -> Result<HypothesisClass> {
        match self {
            ClassFamily::AllFunctions => make_all_functions(d),
            ClassFamily::AtMostOnePositive => make_at_most_one_positive(d),
        }
    }
}

/// Learner settings shared by every trial of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSettings {
    pub algorithms: Vec<Algorithm>,
    /// Run each learner (not the naive baseline) under the doubling wrapper.
    pub doubling: bool,
    pub c: f64,
    pub alpha: f64,
    pub coloring: ColoringBackend,
    pub force: bool,
    pub max_samples: Option<u64>,
}

impl Default for TrialSettings {
    fn default() -> Self {
        TrialSettings {
            algorithms: vec![Algorithm::General],
            doubling: false,
            c: DEFAULT_C,
            alpha: 1.0,
            coloring: ColoringBackend::default(),
            force: false,
            max_samples: None,
        }
    }
}

impl TrialSettings {
    fn config(&self, k: usize, eps: f64, delta: f64) -> LearnerConfig {
        let mut config = LearnerConfig::new(k, eps, delta);
        config.c = self.c;
        config.alpha = self.alpha;
        config.coloring = self.coloring;
        config.force = self.force;
        config.max_samples = self.max_samples;
        config
    }
}

/// A grid sweep: every combination of `(n, k, d, eps, delta)` is a cell, and
/// each cell runs `trials` planted instances through every algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub ds: Vec<usize>,
    pub eps: Vec<f64>,
    pub deltas: Vec<f64>,
    pub family: ClassFamily,
    pub mode: PlantMode,
    /// Label-flip probability of the planted distributions; at most each cell's eps.
    pub noise: f64,
    pub trials: usize,
    pub seed: u64,
    pub settings: TrialSettings,
    pub execution: Execution,
}

impl ExperimentSpec {
    pub fn new(ns: Vec<usize>, ks: Vec<usize>, ds: Vec<usize>, eps: Vec<f64>, deltas: Vec<f64>) -> Self {
        ExperimentSpec {
            ns,
            ks,
            ds,
            eps,
            deltas,
            family: ClassFamily::default(),
            mode: PlantMode::default(),
            noise: 0.0,
            trials: 1,
            seed: 0,
            settings: TrialSettings::default(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.settings.algorithms.is_empty() {
            return Err(Error::invalid("at least one algorithm is required"));
        }
        for (name, empty) in [
            ("n", self.ns.is_empty()),
            ("k", self.ks.is_empty()),
            ("d", self.ds.is_empty()),
            ("eps", self.eps.is_empty()),
            ("delta", self.deltas.is_empty()),
        ] {
            if empty {
                return Err(Error::invalid(format!("the {name} grid is empty")));
            }
        }
        if let Some(&e) = self.eps.iter().find(|&&e| self.noise > e) {
            return Err(Error::invalid(format!("noise {} exceeds eps {e}", self.noise)));
        }
        Ok(())
    }

    /// Grid cells in row-major order over `(n, k, d, eps, delta)`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &k in &self.ks {
                for &d in &self.ds {
                    for &eps in &self.eps {
                        for &delta in &self.deltas {
                            out.push(Cell { n, k, d, eps, delta });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
}

/// One CSV row: one algorithm on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub algo: String,
    pub n: usize,
    /// The `k` the learner ran with; under doubling, the accepted guess.
    pub k: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub total_samples: u64,
    /// `NaN` when the trial failed before producing hypotheses.
    pub max_err: f64,
    pub rounds: usize,
    pub erm_calls: usize,
    /// Semicolon-separated flag names; errors appear as `error_<kind>`.
    pub flags: String,
}

impl TrialRow {
    pub fn flag_list(&self) -> Vec<&str> {
        self.flags.split(';').filter(|f| !f.is_empty()).collect()
    }

    pub fn failed(&self) -> bool {
        self.flag_list().iter().any(|f| f.starts_with("error_"))
    }
}

/// Aggregates for one `(cell, algorithm)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algo: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
    pub failed: usize,
    pub mean_samples: f64,
    pub ci_samples: f64,
    /// Fraction of trials with `max_err <= guarantee * eps`.
    pub success_rate: f64,
    pub ci_success: f64,
    pub mean_erm_calls: f64,
    pub max_erm_calls: usize,
    pub mean_max_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Ordered by cell, then trial, then algorithm as listed in the spec.
    pub rows: Vec<TrialRow>,
    pub summaries: Vec<Summary>,
}

/// Runs one algorithm on one instance and turns the outcome into a row.
/// Learner errors become a row flagged `error_<kind>`.
pub fn run_trial(
    algorithm: Algorithm,
    distributions: &[DataDistribution],
    class: &HypothesisClass,
    config: &LearnerConfig,
    doubling: bool,
    trial: usize,
    stream: RngStream,
) -> TrialRow {
    let outcome = if doubling && algorithm != Algorithm::Naive {
        doubling_wrapper(algorithm, distributions, class, config, stream)
    } else {
        learn(algorithm, distributions, class, config, stream)
    }
    .and_then(|r| {
        let e = r.max_error(distributions)?;
        Ok((r, e))
    });
    let mut row = TrialRow {
        trial,
        algo: algorithm.name().to_string(),
        n: distributions.len(),
        k: config.k,
        d: class.vc_dim(),
        eps: config.eps,
        delta: config.delta,
        total_samples: 0,
        max_err: f64::NAN,
        rounds: 0,
        erm_calls: 0,
        flags: String::new(),
    };
    match outcome {
        Ok((report, err)) => {
            if algorithm != Algorithm::Naive {
                row.k = report.k;
            }
            row.total_samples = report.total_samples();
            row.max_err = err;
            row.rounds = report.rounds.len();
            row.erm_calls = report.erm_calls;
            row.flags = report.flags.iter().map(|f| f.name()).collect::<Vec<_>>().join(";");
        }
        Err(e) => row.flags = error_flag(&e).to_string(),
    }
    row
}

pub fn error_flag(e: &Error) -> &'static str {
    match e {
        Error::DomainMismatch(_) => "error_domain_mismatch",
        Error::InvalidInput(_) => "error_invalid_input",
        Error::Capacity(_) => "error_capacity",
        Error::RefutabilityViolation { .. } => "error_refutability_violation",
        Error::MarginalMismatch(_) => "error_marginal_mismatch",
        Error::Internal(_) => "error_internal",
    }
}

/// Runs every cell and trial. Trials run concurrently under `spec.execution`;
/// each owns streams derived from `(seed, cell, trial)`, so results do not
/// depend on scheduling. All algorithms of a trial share its instance and
/// sample stream.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let cells = spec.cells();
    let units: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials).map(move |t| (c, t)))
        .collect();
    let root = RngStream::root(spec.seed);
    let per_unit = map_slice(spec.execution, &units, |&(c, t)| {
        let cell = cells[c];
        let cell_stream = root.child(tags::CELL, c as u64);
        let config = spec.settings.config(cell.k, cell.eps, cell.delta);
        let instance = spec.family.build(cell.d).and_then(|class| {
            generate_planted(
                &class,
                cell.n,
                cell.k,
                spec.noise,
                spec.mode,
                cell_stream.child(tags::INSTANCE, t as u64),
            )
        });
        let learn_stream = cell_stream.child(tags::TRIAL, t as u64);
        spec.settings
            .algorithms
            .iter()
            .map(|&a| match &instance {
                Ok(inst) => run_trial(a, &inst.distributions, &inst.class, &config, spec.settings.doubling, t, learn_stream),
                Err(e) => TrialRow {
                    trial: t,
                    algo: a.name().to_string(),
                    n: cell.n,
                    k: cell.k,
                    d: cell.d,
                    eps: cell.eps,
                    delta: cell.delta,
                    total_samples: 0,
                    max_err: f64::NAN,
                    rounds: 0,
                    erm_calls: 0,
                    flags: error_flag(e).to_string(),
                },
            })
            .collect::<Vec<_>>()
    });

    let rows: Vec<TrialRow> = per_unit.into_iter().flatten().collect();
    let mut summaries = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let start = c * spec.trials * spec.settings.algorithms.len();
        let block = &rows[start..start + spec.trials * spec.settings.algorithms.len()];
        for &a in &spec.settings.algorithms {
            let mine: Vec<&TrialRow> = block.iter().filter(|r| r.algo == a.name()).collect();
            let guarantee = a.guarantee(&spec.settings.config(cell.k, cell.eps, cell.delta));
            summaries.push(summarize(a, guarantee, cell, &mine));
        }
    }
    Ok(ExperimentResult { rows, summaries })
}

/// Aggregates rows of one algorithm in one cell. The result depends only on
/// the set of rows, not their order.
pub fn summarize(algorithm: Algorithm, guarantee: f64, cell: &Cell, rows: &[&TrialRow]) -> Summary {
    let mut sorted: Vec<&TrialRow> = rows.to_vec();
    sorted.sort_by_key(|r| r.trial);
    let samples: Vec<f64> = sorted.iter().map(|r| r.total_samples as f64).collect();
    let (mean_samples, ci_samples) = mean_ci(&samples);
    let successes = sorted
        .iter()
        .filter(|r| !r.failed() && r.max_err <= guarantee * cell.eps + 1e-12)
        .count();
    let (success_rate, ci_success) = proportion_ci(successes, sorted.len());
    let calls: Vec<f64> = sorted.iter().map(|r| r.erm_calls as f64).collect();
    let errs: Vec<f64> = sorted.iter().filter(|r| !r.failed()).map(|r| r.max_err).collect();
    Summary {
        algo: algorithm.name().to_string(),
        n: cell.n,
        k: cell.k,
        d: cell.d,
        eps: cell.eps,
        delta: cell.delta,
        trials: sorted.len(),
        failed: sorted.iter().filter(|r| r.failed()).count(),
        mean_samples,
        ci_samples,
        success_rate,
        ci_success,
        mean_erm_calls: mean_ci(&calls).0,
        max_erm_calls: sorted.iter().map(|r| r.erm_calls).max().unwrap_or(0),
        mean_max_err: mean_ci(&errs).0,
    }
}

fn write_records<T: Serialize, W: Write>(records: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r).map_err(|e| Error::Internal(format!("csv: {e}")))?;
    }
    out.flush().map_err(|e| Error::Internal(format!("csv: {e}")))?;
    Ok(())
}

/// Writes trial rows with a header line.
pub fn write_rows_csv<W: Write>(rows: &[TrialRow], w: W) -> Result<()> {
    write_records(rows, w)
}

pub fn write_summary_csv<W: Write>(summaries: &[Summary], w: W) -> Result<()> {
    write_records(summaries, w)
}

pub fn rows_to_csv(rows: &[TrialRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}

pub fn read_rows_csv<R: std::io::Read>(r: R) -> Result<Vec<TrialRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<Vec<TrialRow>, _>>()
        .map_err(|e| Error::invalid(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(vec![4], vec![2], vec![3], vec![0.1], vec![0.1]);
        spec.trials = 3;
        spec.seed = 5;
        spec.settings.algorithms = vec![Algorithm::General, Algorithm::Naive];
        spec
    }

    #[test]
    fn rows_are_ordered_and_complete() {
        let res = run_experiment(&small()).unwrap();
        assert_eq!(res.rows.len(), 6);
        assert_eq!(res.rows[0].algo, "general");
        assert_eq!(res.rows[1].algo, "naive");
        assert_eq!(res.rows[2].trial, 1);
        assert_eq!(res.summaries.len(), 2);
        assert!(res.rows.iter().all(|r| !r.failed()));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut spec = small();
        spec.execution = Execution::Sequential;
        let a = run_experiment(&spec).unwrap();
        spec.execution = Execution::Parallel;
        let b = run_experiment(&spec).unwrap();
        assert_eq!(rows_to_csv(&a.rows).unwrap(), rows_to_csv(&b.rows).unwrap());
    }

    #[test]
    fn generation_failure_becomes_a_row() {
        let mut spec = small();
        spec.ds = vec![1];
        spec.ks = vec![3];
        let res = run_experiment(&spec).unwrap();
        assert!(res.rows.iter().all(|r| r.flags == "error_capacity"));
        assert_eq!(res.summaries[0].failed, 3);
        assert_eq!(res.summaries[0].success_rate, 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let res = run_experiment(&small()).unwrap();
        let text = rows_to_csv(&res.rows).unwrap();
        assert!(text.starts_with("trial,algo,n,k,d,eps,delta,total_samples,max_err,rounds,erm_calls,flags\n"));
        assert_eq!(read_rows_csv(text.as_bytes()).unwrap(), res.rows);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = small();
        spec.trials = 0;
        assert!(run_experiment(&spec).is_err());
        let mut spec = small();
        spec.noise = 0.2;
        assert!(run_experiment(&spec).is_err());
    }
}
