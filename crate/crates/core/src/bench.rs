//! Benchmark orchestration: run every dataset x strategy x repeat cell,
//! reduce learning curves to AUC-F1, and aggregate means and ranks.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{run_al, ALRunConfig, LearningCurve};
use crate::data::{init_pool, Dataset};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, tag};
use crate::strategies::{make_strategy, StrategyContext};

/// Area under the learning curve via the trapezoid rule, normalized to the
/// curve length: endpoints weigh once, interior points twice.
pub fn auc_f1(curve: &[f64]) -> Result<f64> {
    let n = curve.len();
    if n < 2 {
        return Err(Error::CurveTooShort(n));
    }
    let interior: f64 = curve[1..n - 1].iter().sum();
    Ok((curve[0] + 2.0 * interior + curve[n - 1]) / (2.0 * (n - 1) as f64))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub strategies: Vec<String>,
    pub repeats: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub run: ALRunConfig,
}

impl Default for BenchConfig {
    fn default() -> BenchConfig {
        BenchConfig {
            strategies: vec!["rand".into(), "lc".into(), "mm".into(), "ent".into()],
            repeats: 3,
            test_fraction: 0.5,
            seed: 0,
            run: ALRunConfig::default(),
        }
    }
}

/// One completed cell repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub strategy: String,
    pub repeat: usize,
    pub auc_f1: f64,
    pub curve: LearningCurve,
}

/// A failed cell repeat, kept for the report and the exit status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunFailure {
    pub dataset: String,
    pub strategy: String,
    pub repeat: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub datasets: Vec<String>,
    pub strategies: Vec<String>,
    pub repeats: usize,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

impl ExperimentResult {
    pub fn all_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Mean AUC-F1 over the completed repeats of one cell, `None` when every
    /// repeat of the cell failed.
    pub fn cell_mean(&self, dataset: &str, strategy: &str) -> Option<f64> {
        let values: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.dataset == dataset && r.strategy == strategy)
            .map(|r| r.auc_f1)
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }

    /// Per-dataset cell means in strategy order.
    pub fn mean_rows(&self) -> Vec<Vec<Option<f64>>> {
        self.datasets
            .iter()
            .map(|d| {
                self.strategies
                    .iter()
                    .map(|s| self.cell_mean(d, s))
                    .collect()
            })
            .collect()
    }

    /// Per-dataset ranks (0 = best) computed on the full-precision means.
    pub fn rank_rows(&self) -> Vec<Vec<Option<usize>>> {
        self.mean_rows().iter().map(|row| competition_ranks(row)).collect()
    }

    /// Mean rank per strategy over the datasets where the cell completed.
    pub fn mean_ranks(&self) -> Vec<Option<f64>> {
        let ranks = self.rank_rows();
        (0..self.strategies.len())
            .map(|s| {
                let col: Vec<f64> = ranks.iter().filter_map(|row| row[s]).map(|r| r as f64).collect();
                if col.is_empty() {
                    None
                } else {
                    Some(col.iter().sum::<f64>() / col.len() as f64)
                }
            })
            .collect()
    }
}

/// Competition ranking on "higher is better" values: tied values share the
/// best rank among them and the next distinct value skips past the tie.
pub fn competition_ranks(values: &[Option<f64>]) -> Vec<Option<usize>> {
    let mut ranks = vec![None; values.len()];
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            let better = values
                .iter()
                .filter_map(|w| *w)
                .filter(|w| w > v)
                .count();
            ranks[i] = Some(better);
        }
    }
    ranks
}

/// Run the full benchmark grid in parallel. Pool partitions are derived per
/// (dataset, repeat) so every strategy sees identical starting conditions,
/// and each strategy draws its queries from a stream keyed by its own name,
/// so cells never perturb one another. Failed cells are recorded, not fatal.
pub fn run_benchmark(
    datasets: &[Arc<Dataset>],
    config: &BenchConfig,
    ctx: &StrategyContext,
) -> Result<ExperimentResult> {
    // Fail fast on unknown strategy names before spending compute.
    for name in &config.strategies {
        make_strategy(name, ctx)?;
    }
    if config.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }

    let mut tasks = Vec::new();
    for dataset in datasets {
        for strategy in &config.strategies {
            for repeat in 0..config.repeats {
                tasks.push((Arc::clone(dataset), strategy.clone(), repeat));
            }
        }
    }

    let outcomes: Vec<std::result::Result<RunRecord, RunFailure>> = tasks
        .into_par_iter()
        .map(|(dataset, strategy, repeat)| {
            run_cell(dataset, &strategy, repeat, config, ctx)
        })
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(run) => runs.push(run),
            Err(failure) => {
                log::error!(
                    "run failed: {} / {} repeat {}: {}",
                    failure.dataset,
                    failure.strategy,
                    failure.repeat,
                    failure.message
                );
                failures.push(failure);
            }
        }
    }

    Ok(ExperimentResult {
        datasets: datasets.iter().map(|d| d.name.clone()).collect(),
        strategies: config.strategies.clone(),
        repeats: config.repeats,
        runs,
        failures,
    })
}

fn run_cell(
    dataset: Arc<Dataset>,
    strategy: &str,
    repeat: usize,
    config: &BenchConfig,
    ctx: &StrategyContext,
) -> std::result::Result<RunRecord, RunFailure> {
    let fail = |message: String| RunFailure {
        dataset: dataset.name.clone(),
        strategy: strategy.to_string(),
        repeat,
        message,
    };
    let rep = repeat as u64;
    let mut pool_rng = rng_from_seed(derive_seed(
        config.seed,
        &[tag("pool"), tag(&dataset.name), rep],
    ));
    let pool = init_pool(Arc::clone(&dataset), config.test_fraction, &mut pool_rng)
        .map_err(|e| fail(e.to_string()))?;
    let strat = make_strategy(strategy, ctx).map_err(|e| fail(e.to_string()))?;
    let run_seed = derive_seed(config.seed, &[tag("run"), tag(&dataset.name), rep]);
    let curve = run_al(pool, strat.as_ref(), &config.run, run_seed)
        .map_err(|e| fail(e.to_string()))?;
    let auc = auc_f1(&curve.f1).map_err(|e| fail(e.to_string()))?;
    Ok(RunRecord {
        dataset: dataset.name.clone(),
        strategy: strategy.to_string(),
        repeat,
        auc_f1: auc,
        curve,
    })
}
