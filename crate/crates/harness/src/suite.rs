//! Directories of scenarios run concurrently.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use capacity_core::report::Verdict;
use rayon::prelude::*;

use crate::report::Report;
use crate::run::run_scenario;
use crate::scenario::{Overrides, Scenario};
use crate::HarnessError;

#[derive(Debug, Default)]
pub struct SuiteSummary {
    /// Sorted by scenario id.
    pub reports: Vec<Report>,
    /// `(file, message)` for scenarios that failed to load or run.
    pub errors: Vec<(PathBuf, String)>,
    pub counts: BTreeMap<Verdict, usize>,
}

impl SuiteSummary {
    pub fn count(&self, v: Verdict) -> usize {
        self.counts.get(&v).copied().unwrap_or(0)
    }

    /// 1 if any check fails, 2 if only load errors occurred, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.count(Verdict::Fails) > 0 {
            1
        } else if !self.errors.is_empty() {
            2
        } else {
            0
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<28} {:<22} {:<13} {:>16} {:>16} {:>9}\n", "id", "kind", "verdict", "capacity", "slack", "runtime");
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        for r in &self.reports {
            s += &format!("{:<28} {:<22} {:<13} {:>16} {:>16} {:>8.2}s\n", r.id, r.kind.as_str(), r.verdict.as_str(), num(r.capacity), num(r.slack), r.runtime);
        }
        for (p, e) in &self.errors {
            s += &format!("error  {}: {e}\n", p.display());
        }
        let counts: Vec<String> =
            [Verdict::Holds, Verdict::Equality, Verdict::Fails, Verdict::Inapplicable].iter().map(|v| format!("{} {}", v.as_str(), self.count(*v))).collect();
        s += &format!("{} scenarios: {}, errors {}\n", self.reports.len(), counts.join(", "), self.errors.len());
        s
    }
}

/// `*.toml` files directly inside `dir`, sorted.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut files: Vec<PathBuf> =
        fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml")).collect();
    files.sort();
    Ok(files)
}

pub fn run_suite(dir: &Path, workers: usize, overrides: &Overrides) -> Result<SuiteSummary, HarnessError> {
    let files = scenario_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<(PathBuf, Result<Report, HarnessError>)> = pool.install(|| {
        files
            .par_iter()
            .map(|p| {
                let out = Scenario::load(p).and_then(|mut s| {
                    s.apply(overrides)?;
                    run_scenario(&s)
                });
                (p.clone(), out)
            })
            .collect()
    });
    let mut summary = SuiteSummary::default();
    for (p, out) in outcomes {
        match out {
            Ok(r) => {
                *summary.counts.entry(r.verdict).or_default() += 1;
                summary.reports.push(r);
            }
            Err(e) => summary.errors.push((p, e.to_string())),
        }
    }
    summary.reports.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(summary)
}
