//! Labeled/unlabeled/test partition of a dataset.

use std::sync::Arc;

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// The three-way partition driving an active-learning run. Sample ids index
/// into the shared dataset; the partition is total and disjoint.
#[derive(Debug, Clone)]
pub struct PoolState {
    pub dataset: Arc<Dataset>,
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
    test: Vec<usize>,
}

impl PoolState {
    /// Build a pool from an explicit partition, validating it.
    pub fn from_parts(
        dataset: Arc<Dataset>,
        labeled: Vec<usize>,
        unlabeled: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<PoolState> {
        let pool = PoolState {
            dataset,
            labeled,
            unlabeled,
            test,
        };
        pool.check_partition()?;
        Ok(pool)
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    /// Move `ids` from the unlabeled pool into the labeled set, revealing
    /// their ground-truth labels (the simulated oracle).
    pub fn label(&mut self, ids: &[usize]) -> Result<()> {
        for &id in ids {
            let pos = self.unlabeled.iter().position(|&u| u == id).ok_or_else(|| {
                Error::ProtocolViolation(format!("id {id} queried but not unlabeled"))
            })?;
            self.unlabeled.remove(pos);
            self.labeled.push(id);
        }
        Ok(())
    }

    pub fn check_partition(&self) -> Result<()> {
        let n = self.dataset.n_samples();
        let mut seen = vec![0u8; n];
        for &id in self.labeled.iter().chain(&self.unlabeled).chain(&self.test) {
            if id >= n {
                return Err(Error::PoolInit(format!("id {id} out of range")));
            }
            seen[id] += 1;
        }
        if seen.iter().any(|&s| s != 1) {
            return Err(Error::PoolInit("ids do not partition the dataset".into()));
        }
        Ok(())
    }
}

/// Split a dataset into test and train at `test_fraction`, then seed the
/// labeled set with exactly one random sample per class; the remainder of
/// the train split becomes the unlabeled pool.
pub fn init_pool<R: Rng>(
    dataset: Arc<Dataset>,
    test_fraction: f64,
    rng: &mut R,
) -> Result<PoolState> {
    let n = dataset.n_samples();
    let c = dataset.n_classes;
    let mut ids: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        ids.swap(i, j);
    }
    let n_test = ((n as f64) * test_fraction).round() as usize;
    let test: Vec<usize> = ids[..n_test].to_vec();
    let train: Vec<usize> = ids[n_test..].to_vec();

    // One random labeled sample per class. The shuffled train order already
    // is a uniform random order, so the first occurrence of each class is a
    // uniform draw from that class.
    let mut labeled: Vec<usize> = Vec::with_capacity(c);
    let mut have = vec![false; c];
    for &id in &train {
        let y = dataset.labels[id];
        if !have[y] {
            have[y] = true;
            labeled.push(id);
        }
    }
    if let Some(missing) = have.iter().position(|&h| !h) {
        return Err(Error::PoolInit(format!(
            "class {missing} absent from the train split"
        )));
    }
    let unlabeled: Vec<usize> = train
        .iter()
        .copied()
        .filter(|id| !labeled.contains(id))
        .collect();

    let pool = PoolState {
        dataset,
        labeled,
        unlabeled,
        test,
    };
    pool.check_partition()?;
    Ok(pool)
}
