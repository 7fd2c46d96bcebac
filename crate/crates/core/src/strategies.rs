//! Query strategies: classic uncertainty baselines, query-by-committee, the
//! omniscient roll-out expert, and the two learned policies.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::PoolState;
use crate::demogen::{expert_step, HarvestConfig};
use crate::encoding::{
    encode_batch, encode_single, presample_batch, random_single_candidates, uncertainty_ladder,
    CandidateSet, Metric,
};
use crate::error::{Error, Result};
use crate::forest::{self, ForestConfig, ForestModel};
use crate::policy::{concat_batch, concat_single, select_action, PolicyNet, Variant};
use crate::rng::derive_seed;

/// All registered strategy names, in report order.
pub const STRATEGY_NAMES: [&str; 8] = [
    "rand",
    "lc",
    "mm",
    "ent",
    "qbc",
    "imital-single",
    "imital-batch",
    "expert",
];

/// A pool-based query strategy: given the current model and pool, pick up to
/// `b` distinct unlabeled sample ids.
pub trait QueryStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>>;
}

/// Shared resources strategies may need beyond the pool and current model.
#[derive(Clone)]
pub struct StrategyContext {
    pub metric: Metric,
    /// Candidate count for the learned policies and the expert.
    pub k: usize,
    /// Pre-sampling draw counts.
    pub j_single: usize,
    pub j_batch: usize,
    /// Forest configuration for committee members and expert roll-outs.
    pub forest: ForestConfig,
    /// Cap on the unlabeled reference set when computing mean distances at
    /// inference time; keeps per-query cost flat in the pool size.
    pub du_reference_cap: usize,
    pub policy_single: Option<Arc<PolicyNet>>,
    pub policy_batch: Option<Arc<PolicyNet>>,
}

impl Default for StrategyContext {
    fn default() -> StrategyContext {
        StrategyContext {
            metric: Metric::Euclidean,
            k: 20,
            j_single: 10,
            j_batch: 750,
            forest: ForestConfig::default(),
            du_reference_cap: 1000,
            policy_single: None,
            policy_batch: None,
        }
    }
}

/// Look up a strategy by its registry name.
pub fn make_strategy(name: &str, ctx: &StrategyContext) -> Result<Box<dyn QueryStrategy>> {
    match name {
        "rand" => Ok(Box::new(RandomStrategy)),
        "lc" => Ok(Box::new(LeastConfident)),
        "mm" => Ok(Box::new(MinMargin)),
        "ent" => Ok(Box::new(MaxEntropy)),
        "qbc" => Ok(Box::new(Committee {
            members: 5,
            trees_per_member: 25,
        })),
        "expert" => Ok(Box::new(ExpertStrategy { ctx: ctx.clone() })),
        "imital-single" => match &ctx.policy_single {
            Some(net) => Ok(Box::new(ImitalSingle {
                net: Arc::clone(net),
                ctx: ctx.clone(),
            })),
            None => Err(Error::MissingArtifact(
                "imital-single needs a trained single-variant policy (run the train stage first)"
                    .into(),
            )),
        },
        "imital-batch" => match &ctx.policy_batch {
            Some(net) => Ok(Box::new(ImitalBatch {
                net: Arc::clone(net),
                ctx: ctx.clone(),
            })),
            None => Err(Error::MissingArtifact(
                "imital-batch needs a trained batch-variant policy (run the train stage first)"
                    .into(),
            )),
        },
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}

/// Class probabilities for every unlabeled sample, in pool order.
fn pool_probas(pool: &PoolState, model: &ForestModel) -> Result<Vec<Vec<f64>>> {
    pool.unlabeled()
        .iter()
        .map(|&id| forest::predict_proba_row(model, pool.dataset.features.row(id)))
        .collect()
}

/// Pick the b ids with the smallest score; ties go to the lower sample id.
fn take_smallest(pool: &PoolState, scores: &[f64], b: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &c| {
        scores[a]
            .partial_cmp(&scores[c])
            .unwrap()
            .then(pool.unlabeled()[a].cmp(&pool.unlabeled()[c]))
    });
    order
        .into_iter()
        .take(b.min(scores.len()))
        .map(|i| pool.unlabeled()[i])
        .collect()
}

pub struct RandomStrategy;

impl QueryStrategy for RandomStrategy {
    fn name(&self) -> &'static str {
        "rand"
    }

    fn select(
        &self,
        pool: &PoolState,
        _model: &ForestModel,
        b: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        let u = pool.unlabeled();
        let take = b.min(u.len());
        let picked = rand::seq::index::sample(rng, u.len(), take);
        Ok(picked.iter().map(|i| u[i]).collect())
    }
}

/// Least confident: query where the top class probability is smallest.
pub struct LeastConfident;

impl QueryStrategy for LeastConfident {
    fn name(&self) -> &'static str {
        "lc"
    }

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        let scores: Vec<f64> = pool_probas(pool, model)?
            .iter()
            .map(|p| uncertainty_ladder(p).0)
            .collect();
        Ok(take_smallest(pool, &scores, b))
    }
}

/// Minimal margin between the two most probable classes.
pub struct MinMargin;

impl QueryStrategy for MinMargin {
    fn name(&self) -> &'static str {
        "mm"
    }

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        let scores: Vec<f64> = pool_probas(pool, model)?
            .iter()
            .map(|p| {
                let (u1, u2, _) = uncertainty_ladder(p);
                u1 - u2
            })
            .collect();
        Ok(take_smallest(pool, &scores, b))
    }
}

/// Maximal predictive entropy (negated so the smallest score wins).
pub struct MaxEntropy;

impl QueryStrategy for MaxEntropy {
    fn name(&self) -> &'static str {
        "ent"
    }

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        let scores: Vec<f64> = pool_probas(pool, model)?
            .iter()
            .map(|p| -entropy(p))
            .collect();
        Ok(take_smallest(pool, &scores, b))
    }
}

fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// Query-by-committee with vote entropy over bootstrap-trained forests.
pub struct Committee {
    pub members: usize,
    pub trees_per_member: usize,
}

impl QueryStrategy for Committee {
    fn name(&self) -> &'static str {
        "qbc"
    }

    fn select(
        &self,
        pool: &PoolState,
        _model: &ForestModel,
        b: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        let dataset = pool.dataset.as_ref();
        let labeled = pool.labeled();
        if labeled.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let cfg = ForestConfig {
            n_trees: self.trees_per_member,
            ..ForestConfig::default()
        };
        let mut votes = vec![vec![0usize; dataset.n_classes]; pool.unlabeled().len()];
        for _ in 0..self.members {
            // Bootstrap resample of the labeled set.
            let ids: Vec<usize> = (0..labeled.len())
                .map(|_| labeled[rng.gen_range(0..labeled.len())])
                .collect();
            let member = forest::fit_subset(dataset, &ids, &cfg, rng.gen())?;
            for (row, &id) in votes.iter_mut().zip(pool.unlabeled()) {
                let proba = forest::predict_proba_row(&member, dataset.features.row(id))?;
                row[forest::argmax_class(&proba)] += 1;
            }
        }
        let scores: Vec<f64> = votes
            .iter()
            .map(|counts| {
                let fractions: Vec<f64> = counts
                    .iter()
                    .map(|&v| v as f64 / self.members as f64)
                    .collect();
                -entropy(&fractions)
            })
            .collect();
        Ok(take_smallest(pool, &scores, b))
    }
}

/// The greedy omniscient expert: scores candidates by refitting with their
/// ground-truth labels, exactly as during demonstration harvesting.
pub struct ExpertStrategy {
    ctx: StrategyContext,
}

impl QueryStrategy for ExpertStrategy {
    fn name(&self) -> &'static str {
        "expert"
    }

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        if pool.unlabeled().len() <= b {
            return Ok(pool.unlabeled().to_vec());
        }
        let mut cfg = HarvestConfig::new(Variant::Single, 0);
        cfg.k = self.ctx.k;
        cfg.b = b;
        cfg.j = self.ctx.j_single;
        cfg.metric = self.ctx.metric;
        cfg.forest = self.ctx.forest.clone();
        let rollout_seed: u64 = rng.gen();
        let step = expert_step(pool, model, &cfg, rollout_seed, rng)?;
        Ok(step.query)
    }
}

/// Deterministic evenly spaced subsample of the unlabeled ids, capping the
/// reference set used for mean-distance features.
fn capped_references(unlabeled: &[usize], cap: usize) -> Vec<usize> {
    if unlabeled.len() <= cap || cap == 0 {
        return unlabeled.to_vec();
    }
    (0..cap)
        .map(|i| unlabeled[i * unlabeled.len() / cap])
        .collect()
}

/// Learned single-sample policy: encode k random candidates and take the b
/// highest-scored ones.
pub struct ImitalSingle {
    net: Arc<PolicyNet>,
    ctx: StrategyContext,
}

impl QueryStrategy for ImitalSingle {
    fn name(&self) -> &'static str {
        "imital-single"
    }

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        if pool.unlabeled().len() <= b {
            return Ok(pool.unlabeled().to_vec());
        }
        let dataset = pool.dataset.as_ref();
        let candidates = random_single_candidates(pool, self.net.output_width(), rng);
        let du_refs = capped_references(pool.unlabeled(), self.ctx.du_reference_cap);
        let encodings = match &candidates {
            CandidateSet::Single(slots) => slots
                .iter()
                .map(|slot| match slot {
                    Some(id) => encode_single(
                        *id,
                        dataset,
                        model,
                        pool.labeled(),
                        &du_refs,
                        self.ctx.metric,
                    ),
                    None => Ok(crate::encoding::SingleEncoding::ZERO),
                })
                .collect::<Result<Vec<_>>>()?,
            CandidateSet::Batch(_) => unreachable!("single candidates requested"),
        };
        let scores = self.net.forward(&concat_single(&encodings))?;
        Ok(select_action(&scores, &candidates, b))
    }
}

/// Learned batch policy: pre-sample k candidate batches and take the argmax.
pub struct ImitalBatch {
    net: Arc<PolicyNet>,
    ctx: StrategyContext,
}

impl QueryStrategy for ImitalBatch {
    fn name(&self) -> &'static str {
        "imital-batch"
    }

    fn select(
        &self,
        pool: &PoolState,
        model: &ForestModel,
        b: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<usize>> {
        if pool.unlabeled().len() <= b {
            return Ok(pool.unlabeled().to_vec());
        }
        let dataset = pool.dataset.as_ref();
        let k = self.net.output_width();
        let candidates = presample_batch(
            pool,
            model,
            self.ctx.j_batch,
            k,
            b,
            self.ctx.metric,
            rng,
        )?;
        let encodings = match &candidates {
            CandidateSet::Batch(batches) => batches
                .iter()
                .map(|batch| {
                    encode_batch(batch, dataset, model, self.ctx.metric, dataset.max_distance())
                })
                .collect::<Result<Vec<_>>>()?,
            CandidateSet::Single(_) => unreachable!("batch candidates requested"),
        };
        let scores = self.net.forward(&concat_batch(&encodings))?;
        Ok(select_action(&scores, &candidates, b))
    }
}

/// Fit the learner on the labeled set with a seed derived from the run seed
/// and cycle; shared by the cycle driver and tests.
pub fn fit_learner(
    pool: &PoolState,
    config: &ForestConfig,
    run_seed: u64,
    cycle: usize,
) -> Result<ForestModel> {
    let seed = derive_seed(run_seed, &[crate::rng::tag("learner"), cycle as u64]);
    forest::fit_subset(&pool.dataset, pool.labeled(), config, seed)
}
