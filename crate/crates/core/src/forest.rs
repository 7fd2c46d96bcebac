//! From-scratch random-forest classifier used as the active-learning
//! learner. Class probabilities are leaf class fractions averaged over the
//! trees.

use rand::seq::index::sample as index_sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` = unlimited depth.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features considered per split; `None` = floor(sqrt(d)).
    pub n_split_features: Option<usize>,
    /// Fit trees in parallel. Per-tree seeds are derived from the fit seed,
    /// so the result is independent of scheduling.
    pub parallel: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            n_split_features: None,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf class fractions for one sample.
    fn leaf_fractions(&self, row: &[f64], out: &mut [f64]) {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => {
                    let total: u32 = counts.iter().sum();
                    for (o, &c) in out.iter_mut().zip(counts) {
                        *o = c as f64 / total as f64;
                    }
                    return;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
    pub n_features: usize,
    pub rng_seed: u64,
}

/// Train a forest: each tree on a bootstrap resample with greedy
/// Gini-impurity splits at midpoints between consecutive sorted values.
pub fn fit(
    features: &Matrix,
    labels: &[usize],
    n_classes: usize,
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    let n = features.rows();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(Error::InvalidDataset(format!(
            "label {bad} out of range [0, {n_classes})"
        )));
    }
    let d = features.cols();
    let m = config
        .n_split_features
        .unwrap_or_else(|| (d as f64).sqrt() as usize)
        .clamp(1, d);

    let build = |t: usize| -> Tree {
        let mut rng = rng_from_seed(derive_seed(seed, &[t as u64]));
        let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut builder = TreeBuilder {
            features,
            labels,
            n_classes,
            m,
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split.max(2),
            nodes: Vec::new(),
        };
        builder.grow(bootstrap, 0, &mut rng);
        Tree {
            nodes: builder.nodes,
        }
    };

    let trees: Vec<Tree> = if config.parallel {
        (0..config.n_trees).into_par_iter().map(build).collect()
    } else {
        (0..config.n_trees).map(build).collect()
    };

    Ok(ForestModel {
        trees,
        n_classes,
        n_features: d,
        rng_seed: seed,
    })
}

/// Fit on a subset of dataset rows (typically the labeled set).
pub fn fit_subset(
    dataset: &Dataset,
    ids: &[usize],
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    let rows: Vec<Vec<f64>> = ids.iter().map(|&i| dataset.features.row(i).to_vec()).collect();
    let labels: Vec<usize> = ids.iter().map(|&i| dataset.labels[i]).collect();
    fit(&Matrix::from_rows(&rows), &labels, dataset.n_classes, config, seed)
}

struct TreeBuilder<'a> {
    features: &'a Matrix,
    labels: &'a [usize],
    n_classes: usize,
    m: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn class_counts(&self, ids: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &i in ids {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Grow the subtree for `ids`; returns its node index.
    fn grow<R: Rng>(&mut self, ids: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let counts = self.class_counts(&ids);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.max_depth.is_some_and(|md| depth >= md);
        if pure || depth_capped || ids.len() < self.min_samples_split {
            return self.push_leaf(counts);
        }

        let d = self.features.cols();
        let candidates = index_sample(rng, d, self.m.min(d));
        let mut best: Option<(f64, usize, f64)> = None; // (impurity, feature, threshold)
        for feature in candidates {
            if let Some((imp, thr)) = self.best_threshold(&ids, feature) {
                let better = match best {
                    Some((bi, _, _)) => imp < bi,
                    None => true,
                };
                if better {
                    best = Some((imp, feature, thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            // no candidate feature separates the samples
            return self.push_leaf(counts);
        };

        let (left_ids, right_ids): (Vec<usize>, Vec<usize>) = ids
            .into_iter()
            .partition(|&i| self.features.get(i, feature) <= threshold);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: vec![] }); // placeholder
        let left = self.grow(left_ids, depth + 1, rng);
        let right = self.grow(right_ids, depth + 1, rng);
        self.nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }

    fn push_leaf(&mut self, counts: Vec<u32>) -> usize {
        self.nodes.push(Node::Leaf { counts });
        self.nodes.len() - 1
    }

    /// Exhaustive sweep over midpoints between consecutive sorted unique
    /// values; returns the minimum weighted Gini impurity and its threshold.
    fn best_threshold(&self, ids: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut sorted: Vec<usize> = ids.to_vec();
        sorted.sort_by(|&a, &b| {
            self.features
                .get(a, feature)
                .partial_cmp(&self.features.get(b, feature))
                .unwrap()
        });
        let n = sorted.len() as f64;
        let mut left = vec![0u32; self.n_classes];
        let mut right = self.class_counts(&sorted);
        let mut best: Option<(f64, f64)> = None;
        for w in 0..sorted.len() - 1 {
            let i = sorted[w];
            let y = self.labels[i];
            left[y] += 1;
            right[y] -= 1;
            let v = self.features.get(i, feature);
            let next = self.features.get(sorted[w + 1], feature);
            if v == next {
                continue; // equal values cannot be separated
            }
            let nl = (w + 1) as f64;
            let nr = n - nl;
            let imp = (nl * gini(&left, nl) + nr * gini(&right, nr)) / n;
            let better = match best {
                Some((bi, _)) => imp < bi,
                None => true,
            };
            if better {
                best = Some((imp, (v + next) / 2.0));
            }
        }
        best
    }
}

fn gini(counts: &[u32], total: f64) -> f64 {
    let mut acc = 0.0;
    for &c in counts {
        let p = c as f64 / total;
        acc += p * p;
    }
    1.0 - acc
}

/// Class-probability matrix: row r is the mean over trees of the leaf class
/// fractions for sample r. Rows sum to 1.
pub fn predict_proba(model: &ForestModel, features: &Matrix) -> Result<Matrix> {
    if features.cols() != model.n_features {
        return Err(Error::WidthMismatch {
            expected: model.n_features,
            got: features.cols(),
        });
    }
    let mut out = Matrix::zeros(features.rows(), model.n_classes);
    let mut buf = vec![0.0; model.n_classes];
    for r in 0..features.rows() {
        let row = features.row(r);
        let mut acc = vec![0.0; model.n_classes];
        for tree in &model.trees {
            tree.leaf_fractions(row, &mut buf);
            for (a, &b) in acc.iter_mut().zip(&buf) {
                *a += b;
            }
        }
        let nt = model.trees.len() as f64;
        for (c, a) in acc.iter().enumerate() {
            out.set(r, c, a / nt);
        }
    }
    Ok(out)
}

/// Probability row for a single sample.
pub fn predict_proba_row(model: &ForestModel, row: &[f64]) -> Result<Vec<f64>> {
    if row.len() != model.n_features {
        return Err(Error::WidthMismatch {
            expected: model.n_features,
            got: row.len(),
        });
    }
    let mut buf = vec![0.0; model.n_classes];
    let mut acc = vec![0.0; model.n_classes];
    for tree in &model.trees {
        tree.leaf_fractions(row, &mut buf);
        for (a, &b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
    }
    let nt = model.trees.len() as f64;
    for a in &mut acc {
        *a /= nt;
    }
    Ok(acc)
}

/// Argmax class with ties broken by the lowest class id.
pub fn argmax_class(proba_row: &[f64]) -> usize {
    let mut best = 0usize;
    for (c, &p) in proba_row.iter().enumerate().skip(1) {
        if p > proba_row[best] {
            best = c;
        }
    }
    best
}

pub fn predict(model: &ForestModel, features: &Matrix) -> Result<Vec<usize>> {
    let proba = predict_proba(model, features)?;
    Ok((0..features.rows()).map(|r| argmax_class(proba.row(r))).collect())
}

/// Fraction of argmax predictions equal to the labels.
pub fn accuracy(model: &ForestModel, features: &Matrix, labels: &[usize]) -> Result<f64> {
    let preds = predict(model, features)?;
    let correct = preds.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Unweighted mean of per-class F1; a class with neither true nor predicted
/// samples contributes 0.
pub fn f1_macro(model: &ForestModel, features: &Matrix, labels: &[usize]) -> Result<f64> {
    let preds = predict(model, features)?;
    Ok(f1_macro_from_predictions(&preds, labels, model.n_classes))
}

pub fn f1_macro_from_predictions(preds: &[usize], labels: &[usize], n_classes: usize) -> f64 {
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fnn = vec![0usize; n_classes];
    for (&p, &y) in preds.iter().zip(labels) {
        if p == y {
            tp[y] += 1;
        } else {
            fp[p] += 1;
            fnn[y] += 1;
        }
    }
    let mut sum = 0.0;
    for c in 0..n_classes {
        let prec_den = tp[c] + fp[c];
        let rec_den = tp[c] + fnn[c];
        if prec_den == 0 && rec_den == 0 {
            continue; // contributes 0
        }
        let p = if prec_den > 0 { tp[c] as f64 / prec_den as f64 } else { 0.0 };
        let r = if rec_den > 0 { tp[c] as f64 / rec_den as f64 } else { 0.0 };
        if p + r > 0.0 {
            sum += 2.0 * p * r / (p + r);
        }
    }
    sum / n_classes as f64
}

/// Evaluate accuracy/F1 on a subset of dataset rows.
pub fn eval_on_ids(model: &ForestModel, dataset: &Dataset, ids: &[usize]) -> Result<(f64, f64)> {
    let preds: Vec<usize> = ids
        .iter()
        .map(|&i| predict_proba_row(model, dataset.features.row(i)).map(|p| argmax_class(&p)))
        .collect::<Result<_>>()?;
    let labels: Vec<usize> = ids.iter().map(|&i| dataset.labels[i]).collect();
    let correct = preds.iter().zip(&labels).filter(|(p, y)| p == y).count();
    let acc = correct as f64 / labels.len() as f64;
    let f1 = f1_macro_from_predictions(&preds, &labels, model.n_classes);
    Ok((acc, f1))
}

// Model file format (version 1):
//   "ALRF 1 <n_trees> <n_classes> <n_features> <seed>"
//   per tree: "tree <n_nodes>" then one node per line,
//   "S <feature> <threshold> <left> <right>" or "L <count>*C".
pub fn save(model: &ForestModel, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "ALRF 1 {} {} {} {}",
        model.trees.len(),
        model.n_classes,
        model.n_features,
        model.rng_seed
    );
    for tree in &model.trees {
        let _ = writeln!(out, "tree {}", tree.nodes.len());
        for node in &tree.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = writeln!(out, "S {feature} {threshold} {left} {right}");
                }
                Node::Leaf { counts } => {
                    out.push('L');
                    for c in counts {
                        let _ = write!(out, " {c}");
                    }
                    out.push('\n');
                }
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ForestModel> {
    let text = std::fs::read_to_string(path)?;
    let bad = |msg: &str| Error::ModelFile(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 6 || parts[0] != "ALRF" || parts[1] != "1" {
        return Err(bad("bad header"));
    }
    let n_trees: usize = parts[2].parse().map_err(|_| bad("bad tree count"))?;
    let n_classes: usize = parts[3].parse().map_err(|_| bad("bad class count"))?;
    let n_features: usize = parts[4].parse().map_err(|_| bad("bad feature count"))?;
    let rng_seed: u64 = parts[5].parse().map_err(|_| bad("bad seed"))?;

    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let tl = lines.next().ok_or_else(|| bad("truncated file"))?;
        let n_nodes: usize = tl
            .strip_prefix("tree ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("bad tree header"))?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let line = lines.next().ok_or_else(|| bad("truncated tree"))?;
            let mut it = line.split(' ');
            match it.next() {
                Some("S") => {
                    let feature: usize =
                        it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad split"))?;
                    let threshold: f64 =
                        it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad split"))?;
                    let left: usize =
                        it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad split"))?;
                    let right: usize =
                        it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad split"))?;
                    nodes.push(Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    });
                }
                Some("L") => {
                    let counts: Vec<u32> = it
                        .map(|v| v.parse().map_err(|_| bad("bad leaf count")))
                        .collect::<Result<_>>()?;
                    if counts.len() != n_classes {
                        return Err(bad("leaf width mismatch"));
                    }
                    nodes.push(Node::Leaf { counts });
                }
                _ => return Err(bad("unknown node tag")),
            }
        }
        trees.push(Tree { nodes });
    }
    Ok(ForestModel {
        trees,
        n_classes,
        n_features,
        rng_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> (Matrix, Vec<usize>) {
        (
            Matrix::from_rows(&[
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ]),
            vec![0, 1, 1, 0],
        )
    }

    #[test]
    fn single_class_predicts_with_probability_one() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]);
        let y = vec![1, 1, 1];
        let model = fit(&x, &y, 2, &ForestConfig::default(), 3).unwrap();
        let proba = predict_proba(&model, &x).unwrap();
        for r in 0..3 {
            assert_eq!(proba.row(r), &[0.0, 1.0]);
        }
    }

    #[test]
    fn xor_is_shattered() {
        let (x, y) = xor_data();
        let cfg = ForestConfig {
            n_trees: 50,
            n_split_features: Some(2),
            ..ForestConfig::default()
        };
        let model = fit(&x, &y, 2, &cfg, 17).unwrap();
        // Oracle: unbounded trees can shatter 4 points, so train
        // accuracy must reach 1.0.
        assert_eq!(accuracy(&model, &x, &y).unwrap(), 1.0);
    }

    #[test]
    fn fit_is_deterministic_and_scheduling_independent() {
        let (x, y) = xor_data();
        let serial = ForestConfig {
            parallel: false,
            ..ForestConfig::default()
        };
        let parallel = ForestConfig {
            parallel: true,
            ..ForestConfig::default()
        };
        let a = fit(&x, &y, 2, &serial, 5).unwrap();
        let b = fit(&x, &y, 2, &serial, 5).unwrap();
        let c = fit(&x, &y, 2, &parallel, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn empty_training_set_errors() {
        let x = Matrix::zeros(0, 2);
        assert!(matches!(
            fit(&x, &[], 2, &ForestConfig::default(), 1),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn two_tree_mean_is_half() {
        // Hand-built forest: tree A gives class 0 fraction 1.0, tree B 0.0.
        let model = ForestModel {
            trees: vec![
                Tree {
                    nodes: vec![Node::Leaf { counts: vec![4, 0] }],
                },
                Tree {
                    nodes: vec![Node::Leaf { counts: vec![0, 4] }],
                },
            ],
            n_classes: 2,
            n_features: 1,
            rng_seed: 0,
        };
        let x = Matrix::from_rows(&[vec![0.3]]);
        let proba = predict_proba(&model, &x).unwrap();
        assert_eq!(proba.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn one_tree_forest_equals_leaf_fractions() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 0, 1, 1];
        let cfg = ForestConfig {
            n_trees: 1,
            ..ForestConfig::default()
        };
        let model = fit(&x, &y, 2, &cfg, 9).unwrap();
        let proba = predict_proba(&model, &x).unwrap();
        let mut buf = vec![0.0; 2];
        for r in 0..4 {
            model.trees[0].leaf_fractions(x.row(r), &mut buf);
            assert_eq!(proba.row(r), buf.as_slice());
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let (x, y) = xor_data();
        let model = fit(&x, &y, 2, &ForestConfig::default(), 1).unwrap();
        let proba = predict_proba(&model, &x).unwrap();
        for r in 0..4 {
            let sum: f64 = proba.row(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(proba.row(r).iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn width_mismatch_rejected() {
        let (x, y) = xor_data();
        let model = fit(&x, &y, 2, &ForestConfig::default(), 1).unwrap();
        let narrow = Matrix::from_rows(&[vec![0.0]]);
        assert!(matches!(
            predict_proba(&model, &narrow),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn accuracy_tie_breaks_to_lowest_class() {
        let model = ForestModel {
            trees: vec![Tree {
                nodes: vec![Node::Leaf { counts: vec![1, 1] }],
            }],
            n_classes: 2,
            n_features: 1,
            rng_seed: 0,
        };
        let x = Matrix::from_rows(&[vec![0.0]]);
        // (0.5, 0.5) with true label 1 counts as wrong: argmax -> class 0.
        assert_eq!(accuracy(&model, &x, &[1]).unwrap(), 0.0);
        assert_eq!(accuracy(&model, &x, &[0]).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_three_of_four() {
        let (x, y) = xor_data();
        let cfg = ForestConfig {
            n_trees: 50,
            n_split_features: Some(2),
            ..ForestConfig::default()
        };
        let model = fit(&x, &y, 2, &cfg, 17).unwrap();
        let wrong = vec![0, 1, 1, 1]; // one label off from the shattered fit
        assert_eq!(accuracy(&model, &x, &wrong).unwrap(), 0.75);
    }

    #[test]
    fn f1_macro_hand_cases() {
        // All predictions class 0, balanced truth: F1 = (2/3 + 0)/2 = 1/3.
        let preds = vec![0, 0, 0, 0];
        let labels = vec![0, 0, 1, 1];
        let f1 = f1_macro_from_predictions(&preds, &labels, 2);
        assert!((f1 - 1.0 / 3.0).abs() < 1e-12);

        // Single-class truth predicted perfectly with C=2: (1 + 0)/2 = 0.5.
        let preds = vec![0, 0];
        let labels = vec![0, 0];
        let f1 = f1_macro_from_predictions(&preds, &labels, 2);
        assert!((f1 - 0.5).abs() < 1e-12);

        // Perfect predictions.
        let preds = vec![0, 1, 1];
        let labels = vec![0, 1, 1];
        assert_eq!(f1_macro_from_predictions(&preds, &labels, 2), 1.0);
    }

    #[test]
    fn depth_one_split_matches_exhaustive_gini_oracle() {
        // Brute-force oracle: exhaustive threshold search on one feature.
        let values = vec![0.1, 0.4, 0.5, 0.9, 1.3, 2.0];
        let labels = vec![0, 0, 1, 0, 1, 1];
        let x = Matrix::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>());

        let mut oracle_best = (f64::INFINITY, f64::NAN);
        let n = values.len() as f64;
        for w in 0..values.len() - 1 {
            if values[w] == values[w + 1] {
                continue;
            }
            let thr = (values[w] + values[w + 1]) / 2.0;
            let mut l = [0u32; 2];
            let mut r = [0u32; 2];
            for (v, &y) in values.iter().zip(&labels) {
                if *v <= thr {
                    l[y] += 1;
                } else {
                    r[y] += 1;
                }
            }
            let nl = (l[0] + l[1]) as f64;
            let nr = (r[0] + r[1]) as f64;
            let imp = (nl * gini(&l, nl) + nr * gini(&r, nr)) / n;
            if imp < oracle_best.0 {
                oracle_best = (imp, thr);
            }
        }

        let builder = TreeBuilder {
            features: &x,
            labels: &labels,
            n_classes: 2,
            m: 1,
            max_depth: Some(1),
            min_samples_split: 2,
            nodes: Vec::new(),
        };
        let (imp, thr) = builder.best_threshold(&(0..values.len()).collect::<Vec<_>>(), 0).unwrap();
        assert_eq!(thr, oracle_best.1);
        assert!((imp - oracle_best.0).abs() < 1e-12);
    }

    #[test]
    fn serialization_round_trip() {
        let (x, y) = xor_data();
        let model = fit(&x, &y, 2, &ForestConfig::default(), 21).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.alrf");
        save(&model, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn seed_fixed_identical_serialization() {
        let (x, y) = xor_data();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a");
        let p2 = dir.path().join("b");
        save(&fit(&x, &y, 2, &ForestConfig::default(), 8).unwrap(), &p1).unwrap();
        save(&fit(&x, &y, 2, &ForestConfig::default(), 8).unwrap(), &p2).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap()
        );
    }
}
