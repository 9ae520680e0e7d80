//! A small fully-connected classifier trained from scratch, with dropout
//! kept active at prediction time so repeated forward passes draw Monte
//! Carlo samples from the approximate posterior predictive. Those sampled
//! probability vectors are exactly the [`SampleBatch`] the estimation and
//! uncertainty modules consume.
//!
//! Architecture: input -> one rectified hidden layer with inverted dropout
//! -> softmax. Inverted dropout scales surviving units by `1 / (1 - rate)`,
//! so the rate-0 path needs no rescaling anywhere. Training is plain
//! mini-batch gradient descent on cross-entropy with a fixed learning rate;
//! every random choice (init, shuffling, masks) comes from seeds derived
//! with [`crate::derive_seed`], so identical inputs give bit-identical
//! models.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::derive_seed;
use crate::dirichlet::{SampleBatch, SimplexPoint};
use crate::error::{Error, Result};

const CHECKPOINT_MAGIC: &[u8; 8] = b"DIRMIMLP";
const CHECKPOINT_VERSION: u32 = 1;

/// Training hyperparameters. `seed` drives initialization, shuffling, and
/// dropout masks.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub hidden_width: usize,
    /// Probability of zeroing a hidden unit; must be `< 1`. Zero disables
    /// all stochasticity in the network.
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden_width: 128,
            dropout_rate: 0.5,
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl ModelConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden_width == 0 {
            return Err(Error::Domain("ModelConfig: hidden_width is 0".into()));
        }
        if !self.dropout_rate.is_finite() || !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Domain(format!(
                "ModelConfig: dropout_rate = {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Domain(format!(
                "ModelConfig: learning_rate = {} must be finite and > 0",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Domain("ModelConfig: epochs is 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Domain("ModelConfig: batch_size is 0".into()));
        }
        Ok(())
    }
}

/// Per-parameter gradients of the cross-entropy loss, shaped like the
/// model's weight fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros(model: &TrainedModel) -> Gradients {
        Gradients {
            w1: vec![0.0; model.w1.len()],
            b1: vec![0.0; model.b1.len()],
            w2: vec![0.0; model.w2.len()],
            b2: vec![0.0; model.b2.len()],
        }
    }

    fn add(&mut self, other: &Gradients) {
        for (a, b) in self.w1.iter_mut().zip(&other.w1) {
            *a += b;
        }
        for (a, b) in self.b1.iter_mut().zip(&other.b1) {
            *a += b;
        }
        for (a, b) in self.w2.iter_mut().zip(&other.w2) {
            *a += b;
        }
        for (a, b) in self.b2.iter_mut().zip(&other.b2) {
            *a += b;
        }
    }
}

/// A trained (or freshly initialized) network. Weight fields are public so
/// callers can checkpoint-diff or run finite-difference probes; mutating
/// them invalidates nothing beyond the predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Hidden weights, `hidden_width x input_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Output weights, `class_count x hidden_width`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub input_dim: usize,
    pub hidden_width: usize,
    pub class_count: usize,
    pub config: ModelConfig,
    /// Full-dataset deterministic (mask-free) mean loss before training and
    /// after each epoch; not persisted in checkpoints.
    pub loss_history: Vec<f64>,
}

/// Seeded symmetric-uniform initialization scaled by `1/sqrt(fan_in)`,
/// biases zero.
pub fn init_model(
    input_dim: usize,
    class_count: usize,
    config: &ModelConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    if input_dim == 0 {
        return Err(Error::Shape("init_model: input_dim is 0".into()));
    }
    if class_count < 2 {
        return Err(Error::Domain(format!(
            "init_model: need at least 2 classes, got {class_count}"
        )));
    }
    let h = config.hidden_width;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0, 0));
    let mut uniform = |scale: f64| (rng.gen::<f64>() * 2.0 - 1.0) * scale;
    let s1 = 1.0 / (input_dim as f64).sqrt();
    let w1 = (0..h * input_dim).map(|_| uniform(s1)).collect();
    let s2 = 1.0 / (h as f64).sqrt();
    let w2 = (0..class_count * h).map(|_| uniform(s2)).collect();
    Ok(TrainedModel {
        w1,
        b1: vec![0.0; h],
        w2,
        b2: vec![0.0; class_count],
        input_dim,
        hidden_width: h,
        class_count,
        config: config.clone(),
        loss_history: Vec::new(),
    })
}

fn sample_mask(rng: &mut ChaCha8Rng, width: usize, rate: f64) -> Vec<f64> {
    if rate == 0.0 {
        return vec![1.0; width];
    }
    let keep_scale = 1.0 / (1.0 - rate);
    (0..width)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep_scale })
        .collect()
}

fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
}

impl TrainedModel {
    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "input has {} values, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    fn check_mask(&self, mask: &[f64]) -> Result<()> {
        if mask.len() != self.hidden_width {
            return Err(Error::Shape(format!(
                "mask has {} entries, hidden layer has {}",
                mask.len(),
                self.hidden_width
            )));
        }
        Ok(())
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label == 0 || label > self.class_count {
            return Err(Error::Shape(format!(
                "label {label} outside [1, {}]",
                self.class_count
            )));
        }
        Ok(())
    }

    /// Pre-activations and masked hidden activations for one input.
    fn hidden(&self, x: &[f64], mask: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.input_dim;
        let mut pre = self.b1.clone();
        for (j, p) in pre.iter_mut().enumerate() {
            let row = &self.w1[j * d..(j + 1) * d];
            *p += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        let act = pre
            .iter()
            .zip(mask)
            .map(|(&p, &m)| if p > 0.0 { p * m } else { 0.0 })
            .collect();
        (pre, act)
    }

    fn logits(&self, act: &[f64]) -> Vec<f64> {
        let h = self.hidden_width;
        let mut logits = self.b2.clone();
        for (c, l) in logits.iter_mut().enumerate() {
            let row = &self.w2[c * h..(c + 1) * h];
            *l += row.iter().zip(act).map(|(w, v)| w * v).sum::<f64>();
        }
        logits
    }

    /// One forward pass with an explicit dropout mask (entries 0 or the
    /// inverted-dropout keep scale), returning class probabilities.
    pub fn forward_probs(&self, x: &[f64], mask: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.check_mask(mask)?;
        let (_, act) = self.hidden(x, mask);
        let mut logits = self.logits(&act);
        softmax_in_place(&mut logits);
        Ok(logits)
    }

    /// Cross-entropy loss of one example under an explicit mask.
    pub fn forward_loss(&self, x: &[f64], label: usize, mask: &[f64]) -> Result<f64> {
        self.check_label(label)?;
        let probs = self.forward_probs(x, mask)?;
        Ok(-probs[label - 1].max(1e-300).ln())
    }

    /// Loss plus analytic gradients for one example under an explicit mask.
    /// The mask is part of the function being differentiated, so these
    /// gradients are directly comparable with finite differences of
    /// [`forward_loss`] at the same mask.
    pub fn forward_backward(
        &self,
        x: &[f64],
        label: usize,
        mask: &[f64],
    ) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        self.check_mask(mask)?;
        self.check_label(label)?;
        let d = self.input_dim;
        let h = self.hidden_width;
        let (pre, act) = self.hidden(x, mask);
        let mut probs = self.logits(&act);
        softmax_in_place(&mut probs);
        let loss = -probs[label - 1].max(1e-300).ln();

        let mut g = Gradients::zeros(self);
        // d loss / d logit_c = p_c - [c == label]
        let mut dlogit = probs;
        dlogit[label - 1] -= 1.0;
        for (c, &dl) in dlogit.iter().enumerate() {
            g.b2[c] = dl;
            for (j, &a) in act.iter().enumerate() {
                g.w2[c * h + j] = dl * a;
            }
        }
        for j in 0..h {
            let dact: f64 = dlogit
                .iter()
                .enumerate()
                .map(|(c, &dl)| dl * self.w2[c * h + j])
                .sum();
            let dpre = if pre[j] > 0.0 { dact * mask[j] } else { 0.0 };
            g.b1[j] = dpre;
            for (i, &xi) in x.iter().enumerate() {
                g.w1[j * d + i] = dpre * xi;
            }
        }
        Ok((loss, g))
    }

    fn step(&mut self, g: &Gradients, scale: f64) {
        for (w, gw) in self.w1.iter_mut().zip(&g.w1) {
            *w -= scale * gw;
        }
        for (w, gw) in self.b1.iter_mut().zip(&g.b1) {
            *w -= scale * gw;
        }
        for (w, gw) in self.w2.iter_mut().zip(&g.w2) {
            *w -= scale * gw;
        }
        for (w, gw) in self.b2.iter_mut().zip(&g.b2) {
            *w -= scale * gw;
        }
    }

    /// Deterministic (mask-free) mean cross-entropy over a dataset.
    pub fn mean_loss(&self, data: &LabeledDataset) -> Result<f64> {
        let ones = vec![1.0; self.hidden_width];
        let mut total = 0.0;
        for (x, &label) in data.features().iter().zip(data.labels()) {
            total += self.forward_loss(x, label, &ones)?;
        }
        Ok(total / data.len() as f64)
    }

    fn check_weights_finite(&self, context: &str) -> Result<()> {
        let all = [&self.w1, &self.b1, &self.w2, &self.b2];
        if all.iter().any(|v| v.iter().any(|w| !w.is_finite())) {
            return Err(Error::NonFinite(format!(
                "{context}: model weights left the finite range"
            )));
        }
        Ok(())
    }

    /// Draw `m` stochastic forward passes for one input, each with an
    /// independently resampled dropout mask. With `dropout_rate = 0` all
    /// samples are identical.
    pub fn predict_mc(&self, x: &[f64], m: usize, seed: u64) -> Result<SampleBatch> {
        if m == 0 {
            return Err(Error::Domain("predict_mc: m must be >= 1".into()));
        }
        self.check_input(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(m);
        for _ in 0..m {
            let mask = sample_mask(&mut rng, self.hidden_width, self.config.dropout_rate);
            points.push(SimplexPoint::new(self.forward_probs(x, &mask)?)?);
        }
        SampleBatch::new(points)
    }

    /// Accuracy of the mean-of-`m`-samples prediction on a test set. Ties
    /// between classes go to the lowest class index.
    pub fn evaluate(&self, test_set: &LabeledDataset, m: usize, seed: u64) -> Result<f64> {
        let mut correct = 0usize;
        for (i, (x, &label)) in test_set
            .features()
            .iter()
            .zip(test_set.labels())
            .enumerate()
        {
            let batch = self.predict_mc(x, m, derive_seed(seed, 2, i as u64))?;
            let mean = batch.mean();
            let mut best = 0;
            for (c, &p) in mean.iter().enumerate() {
                if p > mean[best] {
                    best = c;
                }
            }
            if best + 1 == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / test_set.len() as f64)
    }

    /// Write a checkpoint: 8-byte magic, little-endian u32 version and layer
    /// shapes, the config scalars, then `w1, b1, w2, b2` row-major as
    /// little-endian f64.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        for dim in [self.input_dim, self.hidden_width, self.class_count] {
            let v = u32::try_from(dim)
                .map_err(|_| Error::Shape(format!("save: dimension {dim} exceeds u32")))?;
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.config.dropout_rate.to_le_bytes());
        out.extend_from_slice(&self.config.learning_rate.to_le_bytes());
        out.extend_from_slice(&(self.config.epochs as u64).to_le_bytes());
        out.extend_from_slice(&(self.config.batch_size as u64).to_le_bytes());
        out.extend_from_slice(&self.config.seed.to_le_bytes());
        for tensor in [&self.w1, &self.b1, &self.w2, &self.b2] {
            for &w in tensor.iter() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Read back a checkpoint written by [`save`](Self::save).
    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cur = CheckpointCursor {
            path,
            bytes: &bytes,
            pos: 0,
        };
        let magic = cur.take(8)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::Parse(format!(
                "{}: not a model checkpoint (magic {magic:?})",
                path.display()
            )));
        }
        let version = cur.take_u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!(
                "{}: unsupported checkpoint version {version}",
                path.display()
            )));
        }
        let input_dim = cur.take_u32()? as usize;
        let hidden_width = cur.take_u32()? as usize;
        let class_count = cur.take_u32()? as usize;
        let dropout_rate = cur.take_f64()?;
        let learning_rate = cur.take_f64()?;
        let epochs = cur.take_u64()? as usize;
        let batch_size = cur.take_u64()? as usize;
        let seed = cur.take_u64()?;
        let w1 = cur.take_tensor(hidden_width * input_dim)?;
        let b1 = cur.take_tensor(hidden_width)?;
        let w2 = cur.take_tensor(class_count * hidden_width)?;
        let b2 = cur.take_tensor(class_count)?;
        let model = TrainedModel {
            w1,
            b1,
            w2,
            b2,
            input_dim,
            hidden_width,
            class_count,
            config: ModelConfig {
                hidden_width,
                dropout_rate,
                learning_rate,
                epochs,
                batch_size,
                seed,
            },
            loss_history: Vec::new(),
        };
        model.check_weights_finite("load")?;
        Ok(model)
    }
}

struct CheckpointCursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> CheckpointCursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Parse(format!(
                "{}: checkpoint truncated at byte {} (needed {n} more)",
                self.path.display(),
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn take_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn take_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn take_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn take_tensor(&mut self, len: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(len * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Train a fresh network on the dataset by seeded mini-batch gradient
/// descent. Deterministic given (dataset, config); aborts with an error if
/// the loss or any weight leaves the finite range.
pub fn train(train_set: &LabeledDataset, config: &ModelConfig) -> Result<TrainedModel> {
    if train_set.class_count() < 2 {
        return Err(Error::Domain(format!(
            "train: need at least 2 classes, dataset {} has {}",
            train_set.name(),
            train_set.class_count()
        )));
    }
    let mut model = init_model(train_set.feature_dim(), train_set.class_count(), config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1, 0));
    let n = train_set.len();
    model.loss_history.push(model.mean_loss(train_set)?);
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        // seeded Fisher-Yates shuffle
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(config.batch_size) {
            let mut acc = Gradients::zeros(&model);
            for &idx in chunk {
                let mask = sample_mask(&mut rng, model.hidden_width, config.dropout_rate);
                let (_, g) = model.forward_backward(
                    &train_set.features()[idx],
                    train_set.labels()[idx],
                    &mask,
                )?;
                acc.add(&g);
            }
            model.step(&acc, config.learning_rate / chunk.len() as f64);
        }
        model.check_weights_finite(&format!("train epoch {}", epoch + 1))?;
        let loss = model.mean_loss(train_set)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "train: loss became {loss} at epoch {}",
                epoch + 1
            )));
        }
        model.loss_history.push(loss);
    }
    Ok(model)
}
