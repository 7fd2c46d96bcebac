//! State/action encodings for the ranking policy: the uncertainty ladder,
//! mean distances to the labeled and unlabeled sets, batch statistics, and
//! the pre-sampling heuristics for both variants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PoolState};
use crate::error::{Error, Result};
use crate::forest::{argmax_class, predict_proba_row, ForestModel};

pub const SINGLE_WIDTH: usize = 5;
pub const BATCH_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Config(format!("unknown distance metric '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

pub fn distance(metric: Metric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                if na == nb {
                    0.0
                } else {
                    1.0
                }
            } else {
                1.0 - dot / (na * nb)
            }
        }
    }
}

/// Top three class probabilities in descending order; slots beyond the class
/// count are 0.
pub fn uncertainty_ladder(proba_row: &[f64]) -> (f64, f64, f64) {
    let mut sorted: Vec<f64> = proba_row.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let get = |i: usize| sorted.get(i).copied().unwrap_or(0.0);
    (get(0), get(1), get(2))
}

/// Arithmetic mean of d(x, r) over the reference rows `ref_ids`.
pub fn mean_dist(
    dataset: &Dataset,
    x_id: usize,
    ref_ids: &[usize],
    metric: Metric,
) -> Result<f64> {
    mean_dist_excluding(dataset, x_id, ref_ids, metric, false)
}

/// Like [`mean_dist`] but optionally skipping `x_id` itself in the reference
/// set (used for the unlabeled-set mean, where x is a member).
pub fn mean_dist_excluding(
    dataset: &Dataset,
    x_id: usize,
    ref_ids: &[usize],
    metric: Metric,
    exclude_self: bool,
) -> Result<f64> {
    let x = dataset.features.row(x_id);
    let mut sum = 0.0;
    let mut count = 0usize;
    for &r in ref_ids {
        if exclude_self && r == x_id {
            continue;
        }
        sum += distance(metric, x, dataset.features.row(r));
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyReferenceSet);
    }
    Ok(sum / count as f64)
}

/// The five-tuple fed to the single-variant policy for one candidate:
/// (u1, u2, u3, mean distance to labeled, mean distance to unlabeled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleEncoding {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub dl: f64,
    pub du: f64,
}

impl SingleEncoding {
    pub const ZERO: SingleEncoding = SingleEncoding {
        u1: 0.0,
        u2: 0.0,
        u3: 0.0,
        dl: 0.0,
        du: 0.0,
    };

    pub fn to_array(self) -> [f64; SINGLE_WIDTH] {
        [self.u1, self.u2, self.u3, self.dl, self.du]
    }
}

/// Encode one unlabeled sample against explicit labeled/unlabeled reference
/// id sets. The sample itself is excluded from the unlabeled mean.
pub fn encode_single(
    x_id: usize,
    dataset: &Dataset,
    model: &ForestModel,
    labeled_ref: &[usize],
    unlabeled_ref: &[usize],
    metric: Metric,
) -> Result<SingleEncoding> {
    let proba = predict_proba_row(model, dataset.features.row(x_id))?;
    let (u1, u2, u3) = uncertainty_ladder(&proba);
    let dl = mean_dist(dataset, x_id, labeled_ref, metric)?;
    let du = mean_dist_excluding(dataset, x_id, unlabeled_ref, metric, true)?;
    Ok(SingleEncoding { u1, u2, u3, dl, du })
}

/// Modal-fraction agreement over predicted labels: (m-1)/(b-1) where m is
/// the count of the most common prediction. 1 = complete agreement, 0 =
/// pairwise distinct.
pub fn predicted_unity(predicted: &[usize]) -> f64 {
    let b = predicted.len();
    assert!(!predicted.is_empty(), "predicted unity needs samples");
    // A singleton batch agrees with itself completely.
    if b == 1 {
        return 1.0;
    }
    let max_label = predicted.iter().max().copied().unwrap_or(0);
    let mut counts = vec![0usize; max_label + 1];
    for &p in predicted {
        counts[p] += 1;
    }
    let m = counts.into_iter().max().unwrap();
    (m - 1) as f64 / (b - 1) as f64
}

/// The batch-variant triple: mean u1, the pairwise-distance term with its
/// 1/(2bM) factor (both summation orders, zero diagonal, as printed), and
/// predicted unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEncoding {
    pub mean_u1: f64,
    pub norm_pairwise_dist: f64,
    pub pu: f64,
}

impl BatchEncoding {
    pub const ZERO: BatchEncoding = BatchEncoding {
        mean_u1: 0.0,
        norm_pairwise_dist: 0.0,
        pu: 0.0,
    };

    pub fn to_array(self) -> [f64; BATCH_WIDTH] {
        [self.mean_u1, self.norm_pairwise_dist, self.pu]
    }
}

pub fn encode_batch(
    batch_ids: &[usize],
    dataset: &Dataset,
    model: &ForestModel,
    metric: Metric,
    max_distance: f64,
) -> Result<BatchEncoding> {
    let b = batch_ids.len();
    let mut u1_sum = 0.0;
    let mut preds = Vec::with_capacity(b);
    for &id in batch_ids {
        let proba = predict_proba_row(model, dataset.features.row(id))?;
        let (u1, _, _) = uncertainty_ladder(&proba);
        u1_sum += u1;
        preds.push(argmax_class(&proba));
    }
    let mut dist_sum = 0.0;
    for &i in batch_ids {
        for &j in batch_ids {
            dist_sum += distance(metric, dataset.features.row(i), dataset.features.row(j));
        }
    }
    Ok(BatchEncoding {
        mean_u1: u1_sum / b as f64,
        norm_pairwise_dist: dist_sum / (2.0 * b as f64 * max_distance),
        pu: predicted_unity(&preds),
    })
}

/// The k candidate actions handed to the policy in one query step. Single
/// positions may carry a sentinel (`None`) when the pool is smaller than k;
/// sentinel slots encode as zeros and are skipped during selection.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSet {
    Single(Vec<Option<usize>>),
    Batch(Vec<Vec<usize>>),
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        match self {
            CandidateSet::Single(v) => v.len(),
            CandidateSet::Batch(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draw one candidate set of up to `k` distinct unlabeled ids, padding with
/// sentinels when the pool is smaller than k.
fn draw_single_set<R: Rng>(unlabeled: &[usize], k: usize, rng: &mut R) -> Vec<Option<usize>> {
    let take = k.min(unlabeled.len());
    let picked = rand::seq::index::sample(rng, unlabeled.len(), take);
    let mut set: Vec<Option<usize>> = picked.iter().map(|i| Some(unlabeled[i])).collect();
    set.resize(k, None);
    set
}

/// Draw j random candidate sets of k unlabeled ids and keep the one with the
/// highest total mean-distance-to-labeled; first-drawn set wins ties.
pub fn presample_single<R: Rng>(
    pool: &PoolState,
    j: usize,
    k: usize,
    metric: Metric,
    rng: &mut R,
) -> Result<CandidateSet> {
    let dataset = pool.dataset.as_ref();
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    for _ in 0..j.max(1) {
        let set = draw_single_set(pool.unlabeled(), k, rng);
        let mut score = 0.0;
        for id in set.iter().flatten() {
            score += mean_dist(dataset, *id, pool.labeled(), metric)?;
        }
        let better = match &best {
            Some((bs, _)) => score > *bs,
            None => true,
        };
        if better {
            best = Some((score, set));
        }
    }
    Ok(CandidateSet::Single(best.unwrap().1))
}

/// Purely random candidate draw (the recommended inference path for the
/// single variant: the trained net works on arbitrary random input).
pub fn random_single_candidates<R: Rng>(
    pool: &PoolState,
    k: usize,
    rng: &mut R,
) -> CandidateSet {
    CandidateSet::Single(draw_single_set(pool.unlabeled(), k, rng))
}

/// Integer partition of k into the distance / uncertainty / random
/// pre-sampling quotas (2/5, 2/5, remainder).
pub fn batch_quota(k: usize) -> (usize, usize, usize) {
    let dist = ((2.0 * k as f64) / 5.0).round() as usize;
    let unc = ((2.0 * k as f64) / 5.0).round() as usize;
    let dist = dist.min(k);
    let unc = unc.min(k - dist);
    (dist, unc, k - dist - unc)
}

/// Batch-variant pre-sampling: draw j random b-sized batches, keep the top
/// 2k/5 by total pairwise distance, the top 2k/5 by mean u1 among the rest,
/// and fill the remaining k/5 uniformly at random. Ties break by draw order.
pub fn presample_batch<R: Rng>(
    pool: &PoolState,
    model: &ForestModel,
    j: usize,
    k: usize,
    b: usize,
    metric: Metric,
    rng: &mut R,
) -> Result<CandidateSet> {
    if j < k {
        return Err(Error::PresampleTooFew { j, k });
    }
    let dataset = pool.dataset.as_ref();
    let unlabeled = pool.unlabeled();
    if unlabeled.len() < b {
        return Err(Error::PoolInit(format!(
            "unlabeled pool of {} cannot form batches of {b}",
            unlabeled.len()
        )));
    }

    let mut batches: Vec<Vec<usize>> = Vec::with_capacity(j);
    for _ in 0..j {
        let picked = rand::seq::index::sample(rng, unlabeled.len(), b);
        batches.push(picked.iter().map(|i| unlabeled[i]).collect());
    }

    // Score every drawn batch once.
    let mut dist_scores = Vec::with_capacity(j);
    let mut unc_scores = Vec::with_capacity(j);
    for batch in &batches {
        let mut dist = 0.0;
        for &a in batch {
            for &c in batch {
                dist += distance(metric, dataset.features.row(a), dataset.features.row(c));
            }
        }
        dist_scores.push(dist);
        let mut u1_sum = 0.0;
        for &id in batch {
            let proba = predict_proba_row(model, dataset.features.row(id))?;
            u1_sum += uncertainty_ladder(&proba).0;
        }
        unc_scores.push(u1_sum);
    }

    let (n_dist, n_unc, n_rand) = batch_quota(k);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; j];

    // Stable sorts keep draw order on ties.
    let mut by_dist: Vec<usize> = (0..j).collect();
    by_dist.sort_by(|&a, &c| dist_scores[c].partial_cmp(&dist_scores[a]).unwrap());
    for &i in by_dist.iter().take(n_dist) {
        taken[i] = true;
        chosen.push(i);
    }

    let mut by_unc: Vec<usize> = (0..j).filter(|&i| !taken[i]).collect();
    by_unc.sort_by(|&a, &c| unc_scores[c].partial_cmp(&unc_scores[a]).unwrap());
    for &i in by_unc.iter().take(n_unc) {
        taken[i] = true;
        chosen.push(i);
    }

    let remainder: Vec<usize> = (0..j).filter(|&i| !taken[i]).collect();
    let picked = rand::seq::index::sample(rng, remainder.len(), n_rand.min(remainder.len()));
    for p in picked {
        chosen.push(remainder[p]);
    }

    Ok(CandidateSet::Batch(
        chosen.into_iter().map(|i| batches[i].clone()).collect(),
    ))
}
