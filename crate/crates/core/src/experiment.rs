//! Batch experiments: repeated seeded runs and their CSV reports.
//!
//! `stats.csv` has one row per run with the columns
//!
//! ```text
//! run,seed,success,evaluations,generations,deletions,additions,length,wall_ms,
//! <kind>.applied,<kind>.noop, ... (all 16 operator kinds, fixed order)
//! ```
//!
//! `wall_ms` is left empty unless timing is requested, so that reports
//! from identical seeds are byte-identical. Kinds not legal for the run's
//! structure type report zero counts.
//!
//! `summary.csv` has a single row
//!
//! ```text
//! runs,successes,median_evaluations,q1_evaluations,q3_evaluations,min_evaluations,max_evaluations
//! ```
//!
//! where the evaluation statistics cover successful runs only and are
//! empty when there were none. Quartiles interpolate linearly between
//! order statistics at rank `p * (n - 1)`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::evolve::{run_evolution, ConfigError, EvolveConfig, Problem, RunResult};
use crate::variation::OperatorKind;
use crate::xslt::render_stylesheet;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("an experiment needs at least one run")]
    NoRuns,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub runs: usize,
    /// Run `i` uses `base_seed + i`; the seed in `config` is ignored.
    pub base_seed: u64,
    pub config: EvolveConfig,
    /// Fill the `wall_ms` column.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(config: EvolveConfig) -> Self {
        Self {
            runs: 30,
            base_seed: config.seed,
            config,
            timing: false,
        }
    }

    pub fn seed_of(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub result: RunResult,
}

/// Executes all runs, in parallel, returning them in run order.
pub fn run_experiment(spec: &ExperimentSpec, problem: &Problem) -> Result<Vec<RunRecord>, ExperimentError> {
    if spec.runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    spec.config.check()?;
    (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let seed = spec.seed_of(run);
            let config = spec.config.clone().with_seed(seed);
            let result = run_evolution(&config, problem)?;
            Ok(RunRecord { run, seed, result })
        })
        .collect()
}

pub fn stats_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "run",
        "seed",
        "success",
        "evaluations",
        "generations",
        "deletions",
        "additions",
        "length",
        "wall_ms",
    ]
    .map(String::from)
    .to_vec();
    for kind in OperatorKind::ALL {
        h.push(format!("{kind}.applied"));
        h.push(format!("{kind}.noop"));
    }
    h
}

pub fn stats_row(record: &RunRecord, timing: bool) -> Vec<String> {
    let r = &record.result;
    let mut row = vec![
        record.run.to_string(),
        record.seed.to_string(),
        r.success.to_string(),
        r.evaluations.to_string(),
        r.generations.to_string(),
        r.fitness.deletions.to_string(),
        r.fitness.additions.to_string(),
        r.fitness.length.to_string(),
        if timing {
            r.wall_time.as_millis().to_string()
        } else {
            String::new()
        },
    ];
    for kind in OperatorKind::ALL {
        let c = r.op_counts.get(&kind).copied().unwrap_or_default();
        row.push(c.applied.to_string());
        row.push(c.noop.to_string());
    }
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub successes: usize,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl Summary {
    /// `evaluations` of the successful runs, in any order.
    pub fn from_evaluations(runs: usize, evaluations: &[u64]) -> Self {
        let mut sorted = evaluations.to_vec();
        sorted.sort_unstable();
        Self {
            runs,
            successes: sorted.len(),
            median: quantile(&sorted, 0.5),
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            min: sorted.first().copied(),
            max: sorted.last().copied(),
        }
    }

    pub fn of(records: &[RunRecord]) -> Self {
        let evals: Vec<u64> = records
            .iter()
            .filter(|r| r.result.success)
            .map(|r| r.result.evaluations)
            .collect();
        Self::from_evaluations(records.len(), &evals)
    }

    pub fn header() -> [&'static str; 7] {
        [
            "runs",
            "successes",
            "median_evaluations",
            "q1_evaluations",
            "q3_evaluations",
            "min_evaluations",
            "max_evaluations",
        ]
    }

    pub fn row(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.runs.to_string(),
            self.successes.to_string(),
            opt(self.median),
            opt(self.q1),
            opt(self.q3),
            opt(self.min),
            opt(self.max),
        ]
    }
}

/// Linear-interpolation quantile of ascending `sorted` data.
pub fn quantile(sorted: &[u64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Some(sorted[lo] as f64 + frac * (sorted[hi] as f64 - sorted[lo] as f64))
}

pub fn stats_csv(records: &[RunRecord], timing: bool) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(stats_header())?;
    for r in records {
        w.write_record(stats_row(r, timing))?;
    }
    Ok(into_string(w))
}

pub fn summary_csv(summary: &Summary) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(Summary::header())?;
    w.write_record(summary.row())?;
    Ok(into_string(w))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer flushes");
    String::from_utf8(bytes).expect("CSV fields are UTF-8")
}

/// Writes `run-<i>.xsl` per run plus `stats.csv` and `summary.csv`.
pub fn write_reports(dir: &Path, records: &[RunRecord], timing: bool) -> Result<Vec<PathBuf>, ExperimentError> {
    let write = |path: PathBuf, body: &str| -> Result<PathBuf, ExperimentError> {
        fs::write(&path, body).map_err(|source| ExperimentError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut written = Vec::new();
    for r in records {
        let sheet = render_stylesheet(&r.result.best.sheet);
        written.push(write(dir.join(format!("run-{}.xsl", r.run)), &sheet)?);
    }
    written.push(write(dir.join("stats.csv"), &stats_csv(records, timing)?)?);
    written.push(write(dir.join("summary.csv"), &summary_csv(&Summary::of(records))?)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(quantile(&[], 0.5), None);
        assert_eq!(quantile(&[7], 0.25), Some(7.0));
        assert_eq!(quantile(&[1, 2, 3, 4], 0.5), Some(2.5));
        assert_eq!(quantile(&[1, 2, 3, 4, 5], 0.25), Some(2.0));
        assert_eq!(quantile(&[10, 20], 0.75), Some(17.5));
    }

    #[test]
    fn summary_of_evaluations() {
        let s = Summary::from_evaluations(5, &[300, 100, 200]);
        assert_eq!(s.successes, 3);
        assert_eq!(s.median, Some(200.0));
        assert_eq!(s.min, Some(100));
        assert_eq!(s.max, Some(300));
        assert_eq!(s.row()[0], "5");
        let none = Summary::from_evaluations(2, &[]);
        assert_eq!(none.row(), ["2", "0", "", "", "", "", ""]);
    }

    #[test]
    fn header_is_stable() {
        let h = stats_header();
        assert_eq!(h.len(), 9 + 32);
        assert_eq!(
            h[..9].join(","),
            "run,seed,success,evaluations,generations,deletions,additions,length,wall_ms"
        );
        assert_eq!(h[9], "xp-add-filter.applied");
        assert_eq!(h[40], "set-template-null.noop");
    }
}
