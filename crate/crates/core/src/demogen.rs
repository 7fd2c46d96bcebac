//! Expert demonstration harvesting: the greedy roll-out expert scores each
//! candidate action by the accuracy the learner would reach after labeling
//! it, and the resulting state/score pairs form the policy training corpus.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_synthetic, init_pool, normalize_minmax, sample_spec, PoolState};
use crate::encoding::{
    encode_batch, encode_single, presample_batch, presample_single, CandidateSet,
    Metric, SingleEncoding,
};
use crate::error::{Error, Result};
use crate::forest::{fit_subset, ForestConfig, ForestModel};
use crate::policy::{concat_batch, concat_single, select_action, CorpusMeta, DemoCorpus, Variant};
use crate::rng::{stream, tag};
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarvestConfig {
    /// Number of synthetic datasets (default 2,000).
    pub alpha: usize,
    /// Active-learning cycles harvested per dataset.
    pub beta: usize,
    /// Candidate actions per state.
    pub k: usize,
    /// Query batch size.
    pub b: usize,
    /// Random action sets drawn before pre-sampling.
    pub j: usize,
    pub variant: Variant,
    pub metric: Metric,
    pub test_fraction: f64,
    pub seed: u64,
    pub forest: ForestConfig,
}

impl HarvestConfig {
    pub fn new(variant: Variant, seed: u64) -> HarvestConfig {
        HarvestConfig {
            alpha: 2000,
            beta: 10,
            k: 20,
            b: 5,
            j: match variant {
                Variant::Single => 10,
                Variant::Batch => 750,
            },
            variant,
            metric: Metric::Euclidean,
            test_fraction: 0.5,
            seed,
            forest: ForestConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha == 0 || self.beta == 0 || self.k == 0 || self.b == 0 || self.j == 0 {
            return Err(Error::Config("harvest counts must be positive".into()));
        }
        if self.variant == Variant::Batch && self.j < self.k {
            return Err(Error::Config(format!(
                "batch variant needs j >= k ({} < {})",
                self.j, self.k
            )));
        }
        Ok(())
    }

    /// Minimum unlabeled-pool size for a dataset to survive all beta cycles.
    fn min_pool(&self) -> usize {
        match self.variant {
            // The last cycle still needs k distinct candidates.
            Variant::Single => (self.beta - 1) * self.b + self.k,
            // Batches of b must be formable at every cycle.
            Variant::Batch => self.beta * self.b,
        }
    }
}

/// Refit the learner on L plus the hypothetically labeled action `extra`
/// (ground truth is known for synthetic data) and return the accuracy on the
/// pool's held-out test split.
pub fn rollout_score(
    pool: &PoolState,
    extra: &[usize],
    forest: &ForestConfig,
    fit_seed: u64,
) -> Result<f64> {
    for id in extra {
        if pool.labeled().contains(id) {
            return Err(Error::ProtocolViolation(format!(
                "roll-out action {id} is already labeled"
            )));
        }
    }
    let mut ids: Vec<usize> = pool.labeled().to_vec();
    ids.extend_from_slice(extra);
    let model = fit_subset(&pool.dataset, &ids, forest, fit_seed)?;
    let (acc, _) = crate::forest::eval_on_ids(&model, &pool.dataset, pool.test())?;
    Ok(acc)
}

/// One harvested state: the policy input vector, the k roll-out accuracies,
/// and the expert's chosen query.
pub struct ExpertStep {
    pub input: Vec<f64>,
    pub accs: Vec<f64>,
    pub query: Vec<usize>,
}

/// Draw candidates, encode them, score every action by roll-out and pick the
/// expert query (top-b samples for single, argmax batch for batch).
pub fn expert_step<R: Rng>(
    pool: &PoolState,
    model: &ForestModel,
    config: &HarvestConfig,
    rollout_seed: u64,
    rng: &mut R,
) -> Result<ExpertStep> {
    let dataset = pool.dataset.as_ref();
    let candidates = match config.variant {
        Variant::Single => presample_single(pool, config.j, config.k, config.metric, rng)?,
        Variant::Batch => presample_batch(
            pool,
            model,
            config.j,
            config.k,
            config.b,
            config.metric,
            rng,
        )?,
    };

    let (input, accs) = match &candidates {
        CandidateSet::Single(slots) => {
            let mut encodings = Vec::with_capacity(slots.len());
            let mut accs = Vec::with_capacity(slots.len());
            for slot in slots {
                match slot {
                    Some(id) => {
                        encodings.push(encode_single(
                            *id,
                            dataset,
                            model,
                            pool.labeled(),
                            pool.unlabeled(),
                            config.metric,
                        )?);
                        accs.push(rollout_score(pool, &[*id], &config.forest, rollout_seed)?);
                    }
                    None => {
                        encodings.push(SingleEncoding::ZERO);
                        accs.push(0.0);
                    }
                }
            }
            (concat_single(&encodings), accs)
        }
        CandidateSet::Batch(batches) => {
            let m = dataset.max_distance();
            let mut encodings = Vec::with_capacity(batches.len());
            let mut accs = Vec::with_capacity(batches.len());
            for batch in batches {
                encodings.push(encode_batch(batch, dataset, model, config.metric, m)?);
                accs.push(rollout_score(pool, batch, &config.forest, rollout_seed)?);
            }
            (concat_batch(&encodings), accs)
        }
    };

    let query = select_action(&accs, &candidates, config.b);
    Ok(ExpertStep { input, accs, query })
}

/// Records harvested from a single dataset, or `None` when the dataset is
/// too small for beta cycles of b labels.
fn harvest_dataset(config: &HarvestConfig, dataset_idx: usize) -> Result<Option<Vec<(Vec<f64>, Vec<f64>)>>> {
    let idx = dataset_idx as u64;
    let mut spec_rng = stream(config.seed, &[tag("spec"), idx]);
    let spec = sample_spec(&mut spec_rng);
    let dataset = Arc::new(normalize_minmax(&generate_synthetic(&spec)?));
    let mut pool_rng = stream(config.seed, &[tag("pool"), idx]);
    // A dataset whose test split swallows a whole class is unusable, just
    // like one whose pool cannot sustain beta cycles; both are skipped.
    let mut pool = match init_pool(dataset, config.test_fraction, &mut pool_rng) {
        Ok(pool) => pool,
        Err(Error::PoolInit(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if pool.unlabeled().len() < config.min_pool() {
        return Ok(None);
    }

    let mut records = Vec::with_capacity(config.beta);
    for cycle in 0..config.beta {
        let c = cycle as u64;
        let model = fit_subset(
            &pool.dataset,
            pool.labeled(),
            &config.forest,
            crate::rng::derive_seed(config.seed, &[tag("fit"), idx, c]),
        )?;
        let mut cand_rng = stream(config.seed, &[tag("cand"), idx, c]);
        let rollout_seed = crate::rng::derive_seed(config.seed, &[tag("roll"), idx, c]);
        let step = expert_step(&pool, &model, config, rollout_seed, &mut cand_rng)?;
        records.push((step.input, step.accs));
        pool.label(&step.query)?;
        pool.check_partition()?;
    }
    Ok(Some(records))
}

/// Run the full harvest: alpha datasets x beta cycles, parallel across
/// datasets with per-dataset derived seeds; corpus order is by dataset
/// index, so the result is independent of scheduling.
pub fn harvest(config: &HarvestConfig) -> Result<DemoCorpus> {
    config.validate()?;
    let per_dataset: Vec<Option<Vec<(Vec<f64>, Vec<f64>)>>> = (0..config.alpha)
        .into_par_iter()
        .map(|i| harvest_dataset(config, i))
        .collect::<Result<_>>()?;

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    let mut skipped = 0usize;
    for (i, recs) in per_dataset.into_iter().enumerate() {
        match recs {
            Some(recs) => {
                for (input, accs) in recs {
                    inputs.push(input);
                    targets.push(accs);
                }
            }
            None => {
                skipped += 1;
                log::warn!("dataset {i} too small for {} cycles of {} labels, skipped", config.beta, config.b);
            }
        }
    }
    log::info!(
        "harvest complete: {} records from {} datasets ({} skipped)",
        inputs.len(),
        config.alpha - skipped,
        skipped
    );

    let corpus = DemoCorpus {
        variant: config.variant,
        k: config.k,
        inputs,
        targets,
        meta: CorpusMeta {
            alpha: config.alpha,
            beta: config.beta,
            seed: config.seed,
        },
    };
    corpus.validate()?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, Matrix};
    use crate::forest::accuracy;
    use crate::rng::rng_from_seed;

    fn toy_config(variant: Variant, seed: u64) -> HarvestConfig {
        let mut cfg = HarvestConfig::new(variant, seed);
        cfg.alpha = 2;
        cfg.beta = 3;
        cfg.k = 5;
        cfg.b = 2;
        cfg.j = match variant {
            Variant::Single => 4,
            Variant::Batch => 12,
        };
        cfg.forest.n_trees = 15;
        cfg
    }

    /// Two classes, class 1 split over two clusters; L covers only one of
    /// them.
    fn missing_cluster_pool() -> PoolState {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        // cluster A: class 0 near (0.1, 0.1)
        for i in 0..8 {
            rows.push(vec![0.08 + 0.005 * i as f64, 0.1]);
            labels.push(0);
        }
        // cluster B: class 1 near (0.9, 0.9)
        for i in 0..8 {
            rows.push(vec![0.88 + 0.005 * i as f64, 0.9]);
            labels.push(1);
        }
        // cluster C: class 1 near (0.9, 0.1) — unrepresented in L
        for i in 0..8 {
            rows.push(vec![0.88 + 0.005 * i as f64, 0.1]);
            labels.push(1);
        }
        let ds = Arc::new(Dataset {
            name: "clusters".into(),
            features: Matrix::from_rows(&rows),
            labels,
            n_classes: 2,
            feature_scale: None,
        });
        // Hand-built partition: L = one point from A and one from B; test =
        // every odd-indexed point; U = the rest.
        let labeled = vec![0, 8];
        let test: Vec<usize> = (0..24).filter(|i| i % 2 == 1).collect();
        let unlabeled: Vec<usize> = (0..24)
            .filter(|i| i % 2 == 0 && *i != 0 && *i != 8)
            .collect();
        PoolState::from_parts(ds, labeled, unlabeled, test).unwrap()
    }

    #[test]
    fn empty_rollout_equals_current_accuracy() {
        let pool = missing_cluster_pool();
        let cfg = ForestConfig {
            n_trees: 25,
            ..ForestConfig::default()
        };
        let score = rollout_score(&pool, &[], &cfg, 7).unwrap();
        let model = fit_subset(&pool.dataset, pool.labeled(), &cfg, 7).unwrap();
        let (acc, _) = crate::forest::eval_on_ids(&model, &pool.dataset, pool.test()).unwrap();
        assert_eq!(score, acc);
    }

    #[test]
    fn missing_cluster_candidate_scores_higher() {
        let pool = missing_cluster_pool();
        let cfg = ForestConfig {
            n_trees: 25,
            ..ForestConfig::default()
        };
        // Candidate 16 sits in the unrepresented cluster C; candidate 2 is
        // nearly a duplicate of the labeled point 0.
        let in_missing = rollout_score(&pool, &[16], &cfg, 3).unwrap();
        let duplicate = rollout_score(&pool, &[2], &cfg, 3).unwrap();
        assert!(
            in_missing > duplicate,
            "missing-cluster {in_missing} vs duplicate {duplicate}"
        );
    }

    #[test]
    fn rollout_rejects_labeled_action() {
        let pool = missing_cluster_pool();
        let labeled = pool.labeled()[0];
        assert!(matches!(
            rollout_score(&pool, &[labeled], &ForestConfig::default(), 1),
            Err(Error::ProtocolViolation(_))
        ));
    }

    #[test]
    fn expert_scores_match_independent_refits() {
        // Brute-force oracle: independently refit per candidate.
        let pool = missing_cluster_pool();
        let mut cfg = toy_config(Variant::Single, 5);
        cfg.forest.n_trees = 25;
        let model = fit_subset(&pool.dataset, pool.labeled(), &cfg.forest, 2).unwrap();
        let step = expert_step(&pool, &model, &cfg, 11, &mut rng_from_seed(6)).unwrap();

        // Re-draw the same candidates and score them by hand.
        let cands =
            presample_single(&pool, cfg.j, cfg.k, cfg.metric, &mut rng_from_seed(6)).unwrap();
        if let CandidateSet::Single(slots) = cands {
            for (slot, &acc) in slots.iter().zip(&step.accs) {
                let id = slot.expect("pool is large enough");
                let mut ids = pool.labeled().to_vec();
                ids.push(id);
                let m = fit_subset(&pool.dataset, &ids, &cfg.forest, 11).unwrap();
                let rows: Vec<Vec<f64>> = pool
                    .test()
                    .iter()
                    .map(|&i| pool.dataset.features.row(i).to_vec())
                    .collect();
                let labels: Vec<usize> = pool.test().iter().map(|&i| pool.dataset.labels[i]).collect();
                let oracle = accuracy(&m, &Matrix::from_rows(&rows), &labels).unwrap();
                assert_eq!(acc, oracle);
            }
        } else {
            panic!("expected single candidates");
        }
    }

    #[test]
    fn expert_picks_dominating_candidate() {
        let pool = missing_cluster_pool();
        let mut cfg = toy_config(Variant::Single, 5);
        cfg.b = 1;
        cfg.j = 1;
        cfg.forest.n_trees = 25;
        let model = fit_subset(&pool.dataset, pool.labeled(), &cfg.forest, 2).unwrap();
        let step = expert_step(&pool, &model, &cfg, 11, &mut rng_from_seed(6)).unwrap();
        let best = step
            .accs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        // The query is the candidate at the argmax accuracy (ties lowest).
        let cands =
            presample_single(&pool, cfg.j, cfg.k, cfg.metric, &mut rng_from_seed(6)).unwrap();
        if let CandidateSet::Single(slots) = cands {
            assert_eq!(step.query, vec![slots[best].unwrap()]);
        }
    }

    #[test]
    fn harvest_record_count_is_alpha_beta() {
        // Seed chosen so neither sampled dataset is skipped.
        for seed in 0..20u64 {
            let cfg = toy_config(Variant::Single, seed);
            let corpus = harvest(&cfg).unwrap();
            if corpus.inputs.len() == cfg.alpha * cfg.beta {
                assert_eq!(corpus.input_width(), 5 * cfg.k);
                return;
            }
        }
        panic!("no seed in 0..20 produced an unskipped pair of datasets");
    }

    #[test]
    fn harvest_is_deterministic() {
        let cfg = toy_config(Variant::Single, 3);
        let a = harvest(&cfg).unwrap();
        let b = harvest(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn harvest_batch_variant_widths() {
        let cfg = toy_config(Variant::Batch, 4);
        let corpus = harvest(&cfg).unwrap();
        assert_eq!(corpus.variant, Variant::Batch);
        for input in &corpus.inputs {
            assert_eq!(input.len(), 3 * cfg.k);
        }
        for tgt in &corpus.targets {
            assert_eq!(tgt.len(), cfg.k);
        }
    }

    #[test]
    fn target_vectors_contain_their_max() {
        let cfg = toy_config(Variant::Single, 3);
        let corpus = harvest(&cfg).unwrap();
        assert!(!corpus.targets.is_empty());
        for tgt in &corpus.targets {
            let max = tgt.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(tgt.iter().any(|&t| t == max));
        }
    }
}
