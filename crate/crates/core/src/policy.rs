//! The feed-forward ranking network: architecture, supervised training on
//! demonstration records, inference, and serialization.
//!
//! Single variant: 5k -> 1100 -> 1100 -> k. Batch variant: 3k -> 900 ->
//! 900 -> 900 -> k. Hidden layers use elu, the output layer sigmoid (softmax
//! available behind a config switch). Training is mini-batch RMSprop on mean
//! squared error with dropout on the hidden layers and a
//! reduce-on-plateau/early-stop schedule.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::encoding::{BatchEncoding, CandidateSet, SingleEncoding, BATCH_WIDTH, SINGLE_WIDTH};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Single,
    Batch,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Single => "single",
            Variant::Batch => "batch",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        match s {
            "single" => Ok(Variant::Single),
            "batch" => Ok(Variant::Batch),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }

    pub fn encoding_width(&self) -> usize {
        match self {
            Variant::Single => SINGLE_WIDTH,
            Variant::Batch => BATCH_WIDTH,
        }
    }

    pub fn input_width(&self, k: usize) -> usize {
        self.encoding_width() * k
    }

    /// Full layer widths, input to output.
    pub fn layer_widths(&self, k: usize) -> Vec<usize> {
        match self {
            Variant::Single => vec![5 * k, 1100, 1100, k],
            Variant::Batch => vec![3 * k, 900, 900, 900, k],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// in x out
    w: Array2<f64>,
    b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    pub variant: Variant,
    pub k: usize,
    /// Softmax instead of sigmoid on the output layer.
    pub output_softmax: bool,
    layers: Vec<Layer>,
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

fn elu_prime_from_pre(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        z.exp()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl PolicyNet {
    /// Fresh net with fan-in-scaled uniform weights.
    pub fn new(variant: Variant, k: usize, output_softmax: bool, seed: u64) -> PolicyNet {
        Self::with_widths(variant, k, output_softmax, &variant.layer_widths(k), seed)
    }

    /// Custom widths (used by tests for small gradient-check nets).
    pub fn with_widths(
        variant: Variant,
        k: usize,
        output_softmax: bool,
        widths: &[usize],
        seed: u64,
    ) -> PolicyNet {
        let mut rng = rng_from_seed(seed);
        let mut layers = Vec::with_capacity(widths.len() - 1);
        for pair in widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w = Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-bound..bound));
            let b = Array1::zeros(fan_out);
            layers.push(Layer { w, b });
        }
        PolicyNet {
            variant,
            k,
            output_softmax,
            layers,
        }
    }

    /// Build a net from explicit layer weights; each entry is (w, b) with w
    /// shaped in x out. Used for hand-crafted probe nets in tests.
    pub fn from_weights(
        variant: Variant,
        k: usize,
        output_softmax: bool,
        weights: Vec<(Array2<f64>, Array1<f64>)>,
    ) -> Result<PolicyNet> {
        if weights.is_empty() {
            return Err(Error::Config("a net needs at least one layer".into()));
        }
        for (i, (w, b)) in weights.iter().enumerate() {
            if w.ncols() != b.len() {
                return Err(Error::WidthMismatch {
                    expected: w.ncols(),
                    got: b.len(),
                });
            }
            if i > 0 && weights[i - 1].0.ncols() != w.nrows() {
                return Err(Error::WidthMismatch {
                    expected: weights[i - 1].0.ncols(),
                    got: w.nrows(),
                });
            }
        }
        Ok(PolicyNet {
            variant,
            k,
            output_softmax,
            layers: weights.into_iter().map(|(w, b)| Layer { w, b }).collect(),
        })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].w.nrows()
    }

    /// Perturb one weight in place; for finite-difference gradient checks.
    pub fn nudge_weight(&mut self, layer: usize, row: usize, col: usize, delta: f64) {
        self.layers[layer].w[(row, col)] += delta;
    }

    /// Perturb one bias in place; for finite-difference gradient checks.
    pub fn nudge_bias(&mut self, layer: usize, idx: usize, delta: f64) {
        self.layers[layer].b[idx] += delta;
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().w.ncols()
    }

    /// Deterministic inference scores for one input vector; dropout inactive.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_width() {
            return Err(Error::InputWidth {
                expected: self.input_width(),
                got: input.len(),
            });
        }
        let x = Array2::from_shape_vec((1, input.len()), input.to_vec()).unwrap();
        let (_, _, out) = self.forward_full(&x, None);
        Ok(out.row(0).to_vec())
    }

    /// Forward pass over a batch. Returns pre-activations and activations of
    /// the hidden layers plus the output activations. `dropout_masks`, when
    /// given, are multiplied into the hidden activations (inverted dropout).
    fn forward_full(
        &self,
        x: &Array2<f64>,
        dropout_masks: Option<&[Array2<f64>]>,
    ) -> (Vec<Array2<f64>>, Vec<Array2<f64>>, Array2<f64>) {
        let n_hidden = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(n_hidden);
        let mut act = Vec::with_capacity(n_hidden);
        let mut a = x.clone();
        for (li, layer) in self.layers[..n_hidden].iter().enumerate() {
            let mut z = a.dot(&layer.w);
            z += &layer.b;
            let mut h = z.mapv(elu);
            if let Some(masks) = dropout_masks {
                h *= &masks[li];
            }
            pre.push(z);
            act.push(h.clone());
            a = h;
        }
        let out_layer = self.layers.last().unwrap();
        let mut z = a.dot(&out_layer.w);
        z += &out_layer.b;
        let out = if self.output_softmax {
            let mut o = z;
            for mut row in o.rows_mut() {
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                row.mapv_inplace(|v| (v - max).exp());
                let sum = row.sum();
                row.mapv_inplace(|v| v / sum);
            }
            o
        } else {
            z.mapv(sigmoid)
        };
        (pre, act, out)
    }

    /// Mean squared error over the batch and the per-layer gradients.
    pub fn loss_and_grads(
        &self,
        x: &Array2<f64>,
        y: &Array2<f64>,
        dropout_masks: Option<&[Array2<f64>]>,
    ) -> (f64, Vec<(Array2<f64>, Array1<f64>)>) {
        let (pre, act, out) = self.forward_full(x, dropout_masks);
        let n = (x.nrows() * self.output_width()) as f64;
        let diff = &out - y;
        let loss = diff.mapv(|d| d * d).sum() / n;

        // d loss / d output activations
        let dout = diff.mapv(|d| 2.0 * d / n);
        // through the output nonlinearity
        let mut dz = if self.output_softmax {
            let mut dz = Array2::zeros(dout.raw_dim());
            for (r, (srow, drow)) in out.rows().into_iter().zip(dout.rows()).enumerate() {
                let dot: f64 = srow.iter().zip(drow.iter()).map(|(s, d)| s * d).sum();
                for (c, (&s, &d)) in srow.iter().zip(drow.iter()).enumerate() {
                    dz[(r, c)] = s * (d - dot);
                }
            }
            dz
        } else {
            &dout * &out.mapv(|s| s * (1.0 - s))
        };

        let mut grads: Vec<(Array2<f64>, Array1<f64>)> = vec![Default::default(); self.layers.len()];
        for li in (0..self.layers.len()).rev() {
            let a_prev = if li == 0 { x } else { &act[li - 1] };
            let gw = a_prev.t().dot(&dz);
            let gb = dz.sum_axis(Axis(0));
            grads[li] = (gw, gb);
            if li > 0 {
                let mut da = dz.dot(&self.layers[li].w.t());
                if let Some(masks) = dropout_masks {
                    da *= &masks[li - 1];
                }
                dz = da * pre[li - 1].mapv(elu_prime_from_pre);
            }
        }
        (loss, grads)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let widths: Vec<String> = std::iter::once(self.input_width().to_string())
            .chain(self.layers.iter().map(|l| l.w.ncols().to_string()))
            .collect();
        let _ = writeln!(
            out,
            "ALPOL 1 {} {} {} {}",
            self.variant.name(),
            self.k,
            if self.output_softmax { 1 } else { 0 },
            widths.join(" ")
        );
        for layer in &self.layers {
            for row in layer.w.rows() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
            let cells: Vec<String> = layer.b.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PolicyNet> {
        let text = std::fs::read_to_string(path)?;
        let bad = |msg: &str| Error::ModelFile(format!("{}: {msg}", path.display()));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() < 6 || parts[0] != "ALPOL" || parts[1] != "1" {
            return Err(bad("bad header"));
        }
        let variant = Variant::parse(parts[2])?;
        let k: usize = parts[3].parse().map_err(|_| bad("bad k"))?;
        let output_softmax = parts[4] == "1";
        let widths: Vec<usize> = parts[5..]
            .iter()
            .map(|v| v.parse().map_err(|_| bad("bad width")))
            .collect::<Result<_>>()?;
        if widths.len() < 2 {
            return Err(bad("too few layers"));
        }

        let parse_row = |line: Option<&str>, expect: usize| -> Result<Vec<f64>> {
            let line = line.ok_or_else(|| bad("truncated file"))?;
            let vals: Vec<f64> = line
                .split(' ')
                .map(|v| v.parse().map_err(|_| bad("bad value")))
                .collect::<Result<_>>()?;
            if vals.len() != expect {
                return Err(bad("shape mismatch"));
            }
            Ok(vals)
        };

        let mut layers = Vec::with_capacity(widths.len() - 1);
        for pair in widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let mut w = Array2::zeros((fan_in, fan_out));
            for r in 0..fan_in {
                let row = parse_row(lines.next(), fan_out)?;
                for (c, v) in row.into_iter().enumerate() {
                    w[(r, c)] = v;
                }
            }
            let b = Array1::from_vec(parse_row(lines.next(), fan_out)?);
            layers.push(Layer { w, b });
        }
        let net = PolicyNet {
            variant,
            k,
            output_softmax,
            layers,
        };
        if net.output_width() != k {
            return Err(bad("output width does not match k"));
        }
        Ok(net)
    }
}

/// Demonstration corpus: one record per harvested state, pairing the
/// concatenated candidate encodings with the k roll-out scores.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoCorpus {
    pub variant: Variant,
    pub k: usize,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub meta: CorpusMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub alpha: usize,
    pub beta: usize,
    pub seed: u64,
}

impl DemoCorpus {
    pub fn input_width(&self) -> usize {
        self.variant.input_width(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.targets.len() {
            return Err(Error::Corpus("input/target count mismatch".into()));
        }
        let iw = self.input_width();
        for (i, (inp, tgt)) in self.inputs.iter().zip(&self.targets).enumerate() {
            if inp.len() != iw {
                return Err(Error::Corpus(format!(
                    "record {i}: input width {} != {iw}",
                    inp.len()
                )));
            }
            if tgt.len() != self.k {
                return Err(Error::Corpus(format!(
                    "record {i}: target width {} != {}",
                    tgt.len(),
                    self.k
                )));
            }
        }
        Ok(())
    }

    // Corpus file format (version 1), one record per line so files can be
    // appended out-of-core:
    //   "ALDC 1 <variant> <k> <n_records> <alpha> <beta> <seed>"
    //   per record: input values, then "|", then k target values.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ALDC 1 {} {} {} {} {} {}",
            self.variant.name(),
            self.k,
            self.inputs.len(),
            self.meta.alpha,
            self.meta.beta,
            self.meta.seed
        );
        for (inp, tgt) in self.inputs.iter().zip(&self.targets) {
            for v in inp {
                let _ = write!(out, "{v} ");
            }
            out.push('|');
            for v in tgt {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DemoCorpus> {
        let text = std::fs::read_to_string(path)?;
        let bad = |msg: &str| Error::Corpus(format!("{}: {msg}", path.display()));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() != 8 || parts[0] != "ALDC" || parts[1] != "1" {
            return Err(bad("bad header"));
        }
        let variant = Variant::parse(parts[2])?;
        let k: usize = parts[3].parse().map_err(|_| bad("bad k"))?;
        let n: usize = parts[4].parse().map_err(|_| bad("bad record count"))?;
        let alpha: usize = parts[5].parse().map_err(|_| bad("bad alpha"))?;
        let beta: usize = parts[6].parse().map_err(|_| bad("bad beta"))?;
        let seed: u64 = parts[7].parse().map_err(|_| bad("bad seed"))?;

        let mut inputs = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("truncated file"))?;
            let (istr, tstr) = line.split_once('|').ok_or_else(|| bad("bad record"))?;
            let inp: Vec<f64> = istr
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| bad("bad input value")))
                .collect::<Result<_>>()?;
            let tgt: Vec<f64> = tstr
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| bad("bad target value")))
                .collect::<Result<_>>()?;
            inputs.push(inp);
            targets.push(tgt);
        }
        let corpus = DemoCorpus {
            variant,
            k,
            inputs,
            targets,
            meta: CorpusMeta { alpha, beta, seed },
        };
        corpus.validate()?;
        Ok(corpus)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_plateau_factor: f64,
    pub early_stopping: bool,
    pub max_epochs: usize,
    pub dropout: f64,
    pub validation_fraction: f64,
    /// No validation improvement > min_delta for this many epochs counts as
    /// a plateau; the first plateau divides the learning rate, the second
    /// stops training.
    pub plateau_patience: usize,
    pub plateau_min_delta: f64,
    /// Min-max normalize each record's target vector to [0, 1] (best action
    /// maps to 1). Raw roll-out accuracies when false.
    pub normalize_targets: bool,
    pub output_softmax: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            initial_lr: 0.001,
            lr_plateau_factor: 10.0,
            early_stopping: true,
            max_epochs: 1000,
            dropout: 0.2,
            validation_fraction: 0.3,
            plateau_patience: 10,
            plateau_min_delta: 1e-4,
            normalize_targets: true,
            output_softmax: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub lr_reductions: usize,
    pub stopped_early: bool,
}

/// Min-max normalize one target vector so the best action maps to 1. A
/// degenerate all-equal vector maps to all ones (every action is best).
fn normalize_record(t: &[f64]) -> Vec<f64> {
    let lo = t.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > 0.0 {
        t.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; t.len()]
    }
}

/// Train a policy net on a demonstration corpus.
pub fn train(corpus: &DemoCorpus, config: &TrainConfig, seed: u64) -> Result<(PolicyNet, TrainLog)> {
    corpus.validate()?;
    let n = corpus.inputs.len();
    if n == 0 {
        return Err(Error::Corpus("empty corpus".into()));
    }
    let k = corpus.k;
    let iw = corpus.input_width();

    let mut rng = rng_from_seed(seed);
    let mut net = PolicyNet::new(corpus.variant, k, config.output_softmax, rng.gen());

    // 70/30 train/validation split on a seeded shuffle.
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let n_val = ((n as f64) * config.validation_fraction).round() as usize;
    let n_train = n - n_val;
    let (train_ids, val_ids) = order.split_at(n_train);

    let to_matrix = |ids: &[usize]| -> (Array2<f64>, Array2<f64>) {
        let mut x = Array2::zeros((ids.len(), iw));
        let mut y = Array2::zeros((ids.len(), k));
        for (r, &i) in ids.iter().enumerate() {
            for (c, &v) in corpus.inputs[i].iter().enumerate() {
                x[(r, c)] = v;
            }
            let tgt = if config.normalize_targets {
                normalize_record(&corpus.targets[i])
            } else {
                corpus.targets[i].clone()
            };
            for (c, v) in tgt.into_iter().enumerate() {
                y[(r, c)] = v;
            }
        }
        (x, y)
    };
    let (x_train, y_train) = to_matrix(train_ids);
    let (x_val, y_val) = to_matrix(val_ids);

    // RMSprop state per layer.
    let mut cache: Vec<(Array2<f64>, Array1<f64>)> = net
        .layers
        .iter()
        .map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.raw_dim())))
        .collect();
    const RMS_DECAY: f64 = 0.9;
    const RMS_EPS: f64 = 1e-8;

    let mut lr = config.initial_lr;
    let mut log = TrainLog::default();
    let mut best_monitor = f64::INFINITY;
    let mut since_improvement = 0usize;
    let n_hidden = net.layers.len() - 1;
    let keep = 1.0 - config.dropout;

    let mut batch_order: Vec<usize> = (0..n_train).collect();
    for epoch in 0..config.max_epochs {
        for i in (1..n_train).rev() {
            let j = rng.gen_range(0..=i);
            batch_order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in batch_order.chunks(config.batch_size) {
            let bx = x_train.select(Axis(0), chunk);
            let by = y_train.select(Axis(0), chunk);
            let masks: Option<Vec<Array2<f64>>> = if config.dropout > 0.0 {
                Some(
                    (0..n_hidden)
                        .map(|li| {
                            let width = net.layers[li].w.ncols();
                            Array2::from_shape_fn((chunk.len(), width), |_| {
                                if rng.gen::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                        })
                        .collect(),
                )
            } else {
                None
            };
            let (loss, grads) = net.loss_and_grads(&bx, &by, masks.as_deref());
            epoch_loss += loss;
            batches += 1;
            for (li, (gw, gb)) in grads.into_iter().enumerate() {
                let (cw, cb) = &mut cache[li];
                cw.zip_mut_with(&gw, |c, &g| *c = RMS_DECAY * *c + (1.0 - RMS_DECAY) * g * g);
                cb.zip_mut_with(&gb, |c, &g| *c = RMS_DECAY * *c + (1.0 - RMS_DECAY) * g * g);
                let layer = &mut net.layers[li];
                ndarray::Zip::from(&mut layer.w)
                    .and(&gw)
                    .and(&*cw)
                    .for_each(|w, &g, &c| *w -= lr * g / (c + RMS_EPS).sqrt());
                ndarray::Zip::from(&mut layer.b)
                    .and(&gb)
                    .and(&*cb)
                    .for_each(|b, &g, &c| *b -= lr * g / (c + RMS_EPS).sqrt());
            }
        }
        let train_loss = epoch_loss / batches.max(1) as f64;
        let val_loss = if n_val > 0 {
            let (_, _, out) = net.forward_full(&x_val, None);
            (&out - &y_val).mapv(|d| d * d).sum() / (n_val * k) as f64
        } else {
            train_loss
        };
        log.epochs.push(EpochLog {
            epoch,
            lr,
            train_loss,
            val_loss,
        });

        // Plateau schedule: first plateau reduces the learning rate, the
        // second stops training.
        if config.early_stopping {
            if best_monitor - val_loss > config.plateau_min_delta {
                best_monitor = val_loss;
                since_improvement = 0;
            } else {
                since_improvement += 1;
                if since_improvement >= config.plateau_patience {
                    if log.lr_reductions == 0 {
                        lr /= config.lr_plateau_factor;
                        log.lr_reductions += 1;
                        since_improvement = 0;
                    } else {
                        log.stopped_early = true;
                        break;
                    }
                }
            }
        }
    }

    Ok((net, log))
}

/// Turn policy scores into queried ids. Single variant: ids of the b largest
/// scores (ties to the lowest candidate index), skipping sentinel slots.
/// Batch variant: the whole batch at the argmax score.
pub fn select_action(scores: &[f64], candidates: &CandidateSet, b: usize) -> Vec<usize> {
    match candidates {
        CandidateSet::Single(slots) => {
            let mut order: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_some()).collect();
            order.sort_by(|&a, &c| scores[c].partial_cmp(&scores[a]).unwrap().then(a.cmp(&c)));
            order
                .into_iter()
                .take(b)
                .map(|i| slots[i].unwrap())
                .collect()
        }
        CandidateSet::Batch(batches) => {
            let mut best = 0usize;
            for i in 1..batches.len() {
                if scores[i] > scores[best] {
                    best = i;
                }
            }
            batches[best].clone()
        }
    }
}

/// Concatenate k single encodings into one policy input vector.
pub fn concat_single(encodings: &[SingleEncoding]) -> Vec<f64> {
    let mut out = Vec::with_capacity(encodings.len() * SINGLE_WIDTH);
    for e in encodings {
        out.extend_from_slice(&e.to_array());
    }
    out
}

/// Concatenate k batch encodings into one policy input vector.
pub fn concat_batch(encodings: &[BatchEncoding]) -> Vec<f64> {
    let mut out = Vec::with_capacity(encodings.len() * BATCH_WIDTH);
    for e in encodings {
        out.extend_from_slice(&e.to_array());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_half_everywhere() {
        let mut net = PolicyNet::with_widths(Variant::Single, 4, false, &[20, 8, 4], 1);
        for layer in &mut net.layers {
            layer.w.fill(0.0);
            layer.b.fill(0.0);
        }
        let out = net.forward(&vec![0.3; 20]).unwrap();
        assert!(out.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_variant_widths_for_k20() {
        let net = PolicyNet::new(Variant::Single, 20, false, 7);
        assert_eq!(net.input_width(), 100);
        assert_eq!(net.output_width(), 20);
        let batch = PolicyNet::new(Variant::Batch, 20, false, 7);
        assert_eq!(batch.input_width(), 60);
        assert_eq!(batch.output_width(), 20);
    }

    #[test]
    fn width_mismatch_rejected() {
        let net = PolicyNet::with_widths(Variant::Single, 2, false, &[10, 4, 2], 1);
        assert!(matches!(
            net.forward(&[0.0; 9]),
            Err(Error::InputWidth { .. })
        ));
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.alpol");
        let net = PolicyNet::with_widths(Variant::Single, 3, false, &[15, 7, 3], 42);
        net.save(&path).unwrap();
        let back = PolicyNet::load(&path).unwrap();
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let input: Vec<f64> = (0..15).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a = net.forward(&input).unwrap();
            let b = back.forward(&input).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn truncated_file_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.alpol");
        let net = PolicyNet::with_widths(Variant::Single, 3, false, &[15, 7, 3], 42);
        net.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        std::fs::write(&path, cut).unwrap();
        assert!(PolicyNet::load(&path).is_err());
    }

    #[test]
    fn variant_tag_checked_by_caller() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.alpol");
        PolicyNet::with_widths(Variant::Batch, 3, false, &[9, 5, 3], 1)
            .save(&path)
            .unwrap();
        let net = PolicyNet::load(&path).unwrap();
        assert_eq!(net.variant, Variant::Batch);
    }

    fn fd_gradient_check(widths: &[usize], softmax: bool, seed: u64) -> f64 {
        let k = *widths.last().unwrap();
        let mut net = PolicyNet::with_widths(Variant::Single, k, softmax, widths, seed);
        let mut rng = rng_from_seed(seed + 1);
        let n = 3;
        let x = Array2::from_shape_fn((n, widths[0]), |_| rng.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((n, k), |_| rng.gen_range(0.0..1.0));
        let (_, grads) = net.loss_and_grads(&x, &y, None);

        let eps = 1e-6;
        let mut max_rel = 0.0f64;
        for li in 0..net.layers.len() {
            let (rows, cols) = (net.layers[li].w.nrows(), net.layers[li].w.ncols());
            for r in 0..rows {
                for c in 0..cols {
                    let orig = net.layers[li].w[(r, c)];
                    net.layers[li].w[(r, c)] = orig + eps;
                    let (lp, _) = net.loss_and_grads(&x, &y, None);
                    net.layers[li].w[(r, c)] = orig - eps;
                    let (lm, _) = net.loss_and_grads(&x, &y, None);
                    net.layers[li].w[(r, c)] = orig;
                    let fd = (lp - lm) / (2.0 * eps);
                    let an = grads[li].0[(r, c)];
                    let denom = fd.abs().max(an.abs()).max(1e-8);
                    max_rel = max_rel.max((fd - an).abs() / denom);
                }
            }
            for c in 0..net.layers[li].b.len() {
                let orig = net.layers[li].b[c];
                net.layers[li].b[c] = orig + eps;
                let (lp, _) = net.loss_and_grads(&x, &y, None);
                net.layers[li].b[c] = orig - eps;
                let (lm, _) = net.loss_and_grads(&x, &y, None);
                net.layers[li].b[c] = orig;
                let fd = (lp - lm) / (2.0 * eps);
                let an = grads[li].1[c];
                let denom = fd.abs().max(an.abs()).max(1e-8);
                max_rel = max_rel.max((fd - an).abs() / denom);
            }
        }
        max_rel
    }

    #[test]
    fn gradients_match_finite_differences() {
        // Two-hidden-layer toy net, sigmoid output.
        assert!(fd_gradient_check(&[10, 8, 6, 4], false, 3) < 1e-4);
        // Softmax output path.
        assert!(fd_gradient_check(&[6, 5, 3], true, 4) < 1e-4);
    }

    fn toy_corpus(n: usize, k: usize, seed: u64) -> DemoCorpus {
        let mut rng = rng_from_seed(seed);
        let iw = SINGLE_WIDTH * k;
        let inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..iw).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..k).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        DemoCorpus {
            variant: Variant::Single,
            k,
            inputs,
            targets,
            meta: CorpusMeta {
                alpha: 0,
                beta: 0,
                seed,
            },
        }
    }

    #[test]
    fn training_log_is_deterministic() {
        let corpus = toy_corpus(40, 3, 2);
        let cfg = TrainConfig {
            max_epochs: 5,
            ..TrainConfig::default()
        };
        let (_, log_a) = train(&corpus, &cfg, 9).unwrap();
        let (_, log_b) = train(&corpus, &cfg, 9).unwrap();
        assert_eq!(log_a, log_b);
    }

    #[test]
    fn corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.aldc");
        let corpus = toy_corpus(7, 4, 3);
        corpus.save(&path).unwrap();
        let back = DemoCorpus::load(&path).unwrap();
        assert_eq!(back, corpus);
    }

    #[test]
    fn select_action_top_b_with_ties() {
        let cands = CandidateSet::Single((0..6).map(|i| Some(i + 100)).collect());
        let scores = vec![0.1, 0.9, 0.3, 0.8, 0.2, 0.5];
        assert_eq!(select_action(&scores, &cands, 2), vec![101, 103]);
        let equal = vec![0.5; 6];
        assert_eq!(select_action(&equal, &cands, 3), vec![100, 101, 102]);
    }

    #[test]
    fn select_action_skips_sentinels() {
        let cands = CandidateSet::Single(vec![Some(10), None, Some(12), None]);
        let scores = vec![0.1, 0.9, 0.3, 0.9];
        assert_eq!(select_action(&scores, &cands, 2), vec![12, 10]);
    }

    #[test]
    fn select_action_batch_argmax() {
        let cands = CandidateSet::Batch(vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8], vec![9, 10]]);
        let scores = vec![0.2, 0.1, 0.3, 0.05, 0.9];
        assert_eq!(select_action(&scores, &cands, 2), vec![9, 10]);
    }

    #[test]
    fn ranking_invariance_under_monotone_transform() {
        let cands = CandidateSet::Single((0..5).map(Some).collect());
        let scores = vec![0.3, 0.7, 0.1, 0.9, 0.5];
        let transformed: Vec<f64> = scores.iter().map(|s| (s * 3.0f64).tanh() + 2.0).collect();
        assert_eq!(
            select_action(&scores, &cands, 2),
            select_action(&transformed, &cands, 2)
        );
    }

    #[test]
    fn normalize_record_best_action_is_one() {
        let t = normalize_record(&[0.2, 0.5, 0.4]);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 1.0);
        assert!((t[2] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(normalize_record(&[0.3, 0.3]), vec![1.0, 1.0]);
    }

    #[test]
    fn overfit_small_corpus() {
        // Run-to-convergence smoke oracle: a tiny corpus must be memorized.
        let corpus = toy_corpus(100, 3, 5);
        let cfg = TrainConfig {
            max_epochs: 800,
            early_stopping: false,
            dropout: 0.0,
            validation_fraction: 0.0,
            initial_lr: 0.002,
            ..TrainConfig::default()
        };
        let (net, log) = train(&corpus, &cfg, 11).unwrap();
        let final_loss = log.epochs.last().unwrap().train_loss;
        assert!(final_loss < 0.01, "final training MSE {final_loss}");
        // Spot-check the net agrees with what the log claims.
        let out = net.forward(&corpus.inputs[0]).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn loss_nonincreasing_on_linear_toy() {
        // Noiseless linearly-representable targets; majority over 10 seeds.
        let mut wins = 0;
        for seed in 0..10u64 {
            let mut rng = rng_from_seed(seed);
            let k = 2;
            let iw = SINGLE_WIDTH * k;
            let w_true: Vec<f64> = (0..iw).map(|_| rng.gen_range(-0.1..0.1)).collect();
            let inputs: Vec<Vec<f64>> = (0..60)
                .map(|_| (0..iw).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<f64>>())
                .collect();
            let targets: Vec<Vec<f64>> = inputs
                .iter()
                .map(|x| {
                    let s: f64 = x.iter().zip(&w_true).map(|(a, b)| a * b).sum();
                    vec![sigmoid(s), sigmoid(-s)]
                })
                .collect();
            let corpus = DemoCorpus {
                variant: Variant::Single,
                k,
                inputs,
                targets,
                meta: CorpusMeta {
                    alpha: 0,
                    beta: 0,
                    seed,
                },
            };
            let cfg = TrainConfig {
                max_epochs: 30,
                dropout: 0.0,
                early_stopping: false,
                normalize_targets: false,
                validation_fraction: 0.0,
                initial_lr: 0.00002,
                ..TrainConfig::default()
            };
            let (_, log) = train(&corpus, &cfg, seed).unwrap();
            let first = log.epochs.first().unwrap().train_loss;
            let last = log.epochs.last().unwrap().train_loss;
            let monotone = log
                .epochs
                .windows(2)
                .all(|w| w[1].train_loss <= w[0].train_loss + 1e-6);
            if monotone && last < first {
                wins += 1;
            }
        }
        assert!(wins > 5, "only {wins}/10 seeds were non-increasing");
    }
}
