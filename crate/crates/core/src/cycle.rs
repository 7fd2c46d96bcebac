//! The active-learning loop: fit, evaluate, query, label, repeat.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::PoolState;
use crate::error::{Error, Result};
use crate::forest::{eval_on_ids, ForestConfig};
use crate::rng::{stream, tag};
use crate::strategies::{fit_learner, QueryStrategy};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ALRunConfig {
    /// Samples labeled per query.
    pub b: usize,
    /// Query cycles after the initial fit; the loop also stops when the
    /// unlabeled pool empties.
    pub max_cycles: usize,
    pub forest: ForestConfig,
}

impl Default for ALRunConfig {
    fn default() -> ALRunConfig {
        ALRunConfig {
            b: 5,
            max_cycles: 50,
            forest: ForestConfig::default(),
        }
    }
}

/// Test-split macro F1 after each fit, plus bookkeeping for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub strategy: String,
    pub dataset: String,
    /// Macro F1 on the test split at cycle t (index 0 = before any query).
    pub f1: Vec<f64>,
    /// Labeled-set size when each F1 was measured.
    pub labeled_counts: Vec<usize>,
    /// Wall-clock seconds spent inside strategy selection, per query.
    pub query_seconds: Vec<f64>,
}

/// Enforce the query protocol: distinct ids, all unlabeled, exactly
/// min(b, |U|) of them.
fn validate_query(pool: &PoolState, query: &[usize], b: usize) -> Result<()> {
    let want = b.min(pool.unlabeled().len());
    if query.len() != want {
        return Err(Error::ProtocolViolation(format!(
            "query returned {} ids, expected {want}",
            query.len()
        )));
    }
    let mut seen = std::collections::HashSet::with_capacity(query.len());
    for id in query {
        if !seen.insert(*id) {
            return Err(Error::ProtocolViolation(format!("duplicate query id {id}")));
        }
        if !pool.unlabeled().contains(id) {
            return Err(Error::ProtocolViolation(format!(
                "query id {id} is not in the unlabeled pool"
            )));
        }
    }
    Ok(())
}

/// Drive one full active-learning run over an initialized pool. The learner
/// is refit on the labeled set each cycle with a seed derived from
/// `run_seed`; the strategy draws from its own derived stream so adding a
/// strategy never perturbs another's randomness.
pub fn run_al(
    mut pool: PoolState,
    strategy: &dyn QueryStrategy,
    config: &ALRunConfig,
    run_seed: u64,
) -> Result<LearningCurve> {
    let mut curve = LearningCurve {
        strategy: strategy.name().to_string(),
        dataset: pool.dataset.name.clone(),
        f1: Vec::with_capacity(config.max_cycles + 1),
        labeled_counts: Vec::with_capacity(config.max_cycles + 1),
        query_seconds: Vec::with_capacity(config.max_cycles),
    };
    let mut strategy_rng = stream(run_seed, &[tag("strategy"), tag(strategy.name())]);

    for cycle in 0..=config.max_cycles {
        let model = fit_learner(&pool, &config.forest, run_seed, cycle)?;
        let (_, f1) = eval_on_ids(&model, &pool.dataset, pool.test())?;
        curve.f1.push(f1);
        curve.labeled_counts.push(pool.labeled().len());

        if cycle == config.max_cycles || pool.unlabeled().is_empty() {
            break;
        }

        let started = Instant::now();
        let query = strategy.select(&pool, &model, config.b, &mut strategy_rng)?;
        curve.query_seconds.push(started.elapsed().as_secs_f64());
        validate_query(&pool, &query, config.b)?;
        pool.label(&query)?;
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{init_pool, Dataset, Matrix};
    use crate::forest::ForestModel;
    use crate::rng::rng_from_seed;
    use crate::strategies::{make_strategy, StrategyContext};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn blob_pool(n_per_class: usize, seed: u64) -> PoolState {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut rng = rng_from_seed(seed);
        use rand::Rng;
        for c in 0..2usize {
            let center = c as f64;
            for _ in 0..n_per_class {
                rows.push(vec![
                    center + rng.gen_range(-0.15..0.15),
                    center + rng.gen_range(-0.15..0.15),
                ]);
                labels.push(c);
            }
        }
        let ds = Arc::new(Dataset {
            name: "blobs".into(),
            features: Matrix::from_rows(&rows),
            labels,
            n_classes: 2,
            feature_scale: None,
        });
        init_pool(ds, 0.4, &mut rng_from_seed(seed ^ 1)).unwrap()
    }

    fn small_config() -> ALRunConfig {
        let mut cfg = ALRunConfig::default();
        cfg.b = 3;
        cfg.max_cycles = 4;
        cfg.forest.n_trees = 15;
        cfg
    }

    #[test]
    fn curve_lengths_and_label_counts() {
        let pool = blob_pool(20, 7);
        let initial = pool.labeled().len();
        let strat = make_strategy("rand", &StrategyContext::default()).unwrap();
        let cfg = small_config();
        let curve = run_al(pool, strat.as_ref(), &cfg, 11).unwrap();
        assert_eq!(curve.f1.len(), cfg.max_cycles + 1);
        assert_eq!(curve.labeled_counts.len(), cfg.max_cycles + 1);
        assert_eq!(curve.query_seconds.len(), cfg.max_cycles);
        for (t, &count) in curve.labeled_counts.iter().enumerate() {
            assert_eq!(count, initial + t * cfg.b);
        }
        assert_eq!(curve.strategy, "rand");
        assert_eq!(curve.dataset, "blobs");
    }

    #[test]
    fn stops_when_pool_exhausted() {
        let pool = blob_pool(5, 3); // 10 samples, 4 test, 2 labeled, 4 unlabeled
        let unlabeled = pool.unlabeled().len();
        let strat = make_strategy("rand", &StrategyContext::default()).unwrap();
        let mut cfg = small_config();
        cfg.max_cycles = 50;
        let curve = run_al(pool, strat.as_ref(), &cfg, 1).unwrap();
        let cycles_needed = unlabeled.div_ceil(cfg.b);
        assert_eq!(curve.f1.len(), cycles_needed + 1);
        assert_eq!(
            *curve.labeled_counts.last().unwrap(),
            2 + unlabeled
        );
    }

    #[test]
    fn run_is_deterministic() {
        let strat = make_strategy("rand", &StrategyContext::default()).unwrap();
        let cfg = small_config();
        let a = run_al(blob_pool(20, 7), strat.as_ref(), &cfg, 5).unwrap();
        let mut b = run_al(blob_pool(20, 7), strat.as_ref(), &cfg, 5).unwrap();
        // Wall-clock timings differ run to run; everything else must match.
        b.query_seconds = a.query_seconds.clone();
        assert_eq!(a, b);
    }

    struct Misbehaving {
        mode: &'static str,
    }

    impl QueryStrategy for Misbehaving {
        fn name(&self) -> &'static str {
            "misbehaving"
        }

        fn select(
            &self,
            pool: &PoolState,
            _model: &ForestModel,
            b: usize,
            _rng: &mut ChaCha8Rng,
        ) -> crate::Result<Vec<usize>> {
            let u = pool.unlabeled();
            Ok(match self.mode {
                "duplicate" => vec![u[0]; b],
                "labeled" => {
                    let mut q = vec![pool.labeled()[0]];
                    q.extend(u.iter().take(b - 1));
                    q
                }
                _ => vec![u[0]],
            })
        }
    }

    #[test]
    fn protocol_violations_are_rejected() {
        for mode in ["duplicate", "labeled", "short"] {
            let pool = blob_pool(20, 7);
            let strat = Misbehaving { mode };
            let err = run_al(pool, &strat, &small_config(), 1).unwrap_err();
            assert!(matches!(err, Error::ProtocolViolation(_)), "{mode}: {err}");
        }
    }

    #[test]
    fn learning_improves_f1_on_separable_blobs() {
        let pool = blob_pool(40, 2);
        let strat = make_strategy("rand", &StrategyContext::default()).unwrap();
        let mut cfg = small_config();
        cfg.max_cycles = 8;
        let curve = run_al(pool, strat.as_ref(), &cfg, 9).unwrap();
        assert!(
            curve.f1.last().unwrap() >= curve.f1.first().unwrap(),
            "F1 fell from {} to {}",
            curve.f1.first().unwrap(),
            curve.f1.last().unwrap()
        );
        assert!(*curve.f1.last().unwrap() > 0.9);
    }
}
