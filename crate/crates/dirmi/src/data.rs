//! Dataset plumbing: IDX (MNIST-family) ingestion and emission, a synthetic
//! Gaussian-blobs generator for desk-scale experiments, seeded subsampling,
//! and the CSV formats used for experiment outputs (learning curves, score
//! dumps, probability-vector batches).
//!
//! Everything here is byte-deterministic given its inputs: floats are written
//! with Rust's shortest round-trip formatting and rows follow a documented
//! sort order, so identical runs produce identical files.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dirichlet::{SampleBatch, SimplexPoint};
use crate::error::{Error, Result};

/// One input row: feature values, finite, fixed dimension per dataset.
pub type FeatureVector = Vec<f64>;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// A classification dataset: features plus 1-based labels in `[1, C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    features: Vec<FeatureVector>,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledDataset {
    /// Validates: non-empty, features/labels same length, uniform finite
    /// feature dimension >= 1, labels in `[1, class_count]`.
    pub fn new(
        name: impl Into<String>,
        features: Vec<FeatureVector>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let name = name.into();
        if features.is_empty() {
            return Err(Error::Shape(format!("dataset {name}: no examples")));
        }
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "dataset {name}: {} feature rows vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        if class_count == 0 {
            return Err(Error::Shape(format!("dataset {name}: class_count is 0")));
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(Error::Shape(format!("dataset {name}: zero-width features")));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "dataset {name}: row {i} has {} values, expected {dim}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "dataset {name}: row {i} contains {v}"
                )));
            }
        }
        if let Some((i, &l)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l == 0 || l > class_count)
        {
            return Err(Error::Shape(format!(
                "dataset {name}: label {l} at row {i} outside [1, {class_count}]"
            )));
        }
        Ok(LabeledDataset {
            name,
            features,
            labels,
            class_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty() // always false by construction
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    /// 1-based labels, aligned with `features()`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// New dataset holding the given rows (duplicates allowed), in the
    /// given order.
    pub fn select(&self, indices: &[usize]) -> Result<LabeledDataset> {
        if indices.is_empty() {
            return Err(Error::Shape(format!(
                "dataset {}: empty selection",
                self.name
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Shape(format!(
                "dataset {}: index {bad} out of range (len {})",
                self.name,
                self.len()
            )));
        }
        Ok(LabeledDataset {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        })
    }
}

// ==================== IDX format ====================

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

struct IdxReader<'a> {
    path: &'a Path,
    bytes: Vec<u8>,
    pos: usize,
}

impl<'a> IdxReader<'a> {
    fn open(path: &'a Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| io_err(path, e))?;
        Ok(IdxReader { path, bytes, pos: 0 })
    }

    fn take_u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.bytes.len() {
            return Err(Error::IdxTruncated {
                path: self.path.to_path_buf(),
                expected: self.pos + 4,
                found: self.bytes.len(),
            });
        }
        let v = u32::from_be_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn take_payload(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::IdxTruncated {
                path: self.path.to_path_buf(),
                expected: self.pos + n,
                found: self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn expect_magic(&mut self, expected: u32) -> Result<()> {
        let found = self.take_u32()?;
        if found != expected {
            return Err(Error::IdxMagic {
                path: self.path.to_path_buf(),
                found,
                expected,
            });
        }
        Ok(())
    }
}

/// Read an IDX image/label pair into a dataset.
///
/// Big-endian layout: magic `0x00000803` (3-D uint8 tensor), then count,
/// rows, cols as u32, then `count*rows*cols` raw bytes; labels use magic
/// `0x00000801`, a u32 count, and `count` bytes. Pixels are scaled to
/// `[0, 1]` by division by 255 and labels shifted to 1-based.
///
/// `transpose` swaps each image's row/column axes while reading (some
/// distributions store images transposed).
pub fn read_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    transpose: bool,
) -> Result<LabeledDataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();

    let mut img = IdxReader::open(images_path)?;
    img.expect_magic(IDX_IMAGES_MAGIC)?;
    let count = img.take_u32()? as usize;
    let rows = img.take_u32()? as usize;
    let cols = img.take_u32()? as usize;
    let pixels = img.take_payload(count * rows * cols)?;

    let mut lab = IdxReader::open(labels_path)?;
    lab.expect_magic(IDX_LABELS_MAGIC)?;
    let label_count = lab.take_u32()? as usize;
    let raw_labels = lab.take_payload(label_count)?;

    if count != label_count {
        return Err(Error::IdxCountMismatch {
            images: count,
            labels: label_count,
        });
    }

    let features: Vec<FeatureVector> = (0..count)
        .map(|i| {
            let img = &pixels[i * rows * cols..(i + 1) * rows * cols];
            let mut row = Vec::with_capacity(rows * cols);
            if transpose {
                for c in 0..cols {
                    for r in 0..rows {
                        row.push(img[r * cols + c] as f64 / 255.0);
                    }
                }
            } else {
                row.extend(img.iter().map(|&b| b as f64 / 255.0));
            }
            row
        })
        .collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize + 1).collect();
    let class_count = labels.iter().copied().max().unwrap_or(0);

    let name = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".into());
    LabeledDataset::new(name, features, labels, class_count)
}

/// Write a dataset as an IDX image/label pair (the inverse of [`read_idx`]).
///
/// `rows * cols` must equal the feature dimension. Pixels are clamped to
/// `[0, 1]` and quantized to the nearest `/255` step, so values already on
/// that grid round-trip exactly; labels must fit `[1, 256]`.
pub fn write_idx(
    dataset: &LabeledDataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    if rows == 0 || cols == 0 || rows * cols != dataset.feature_dim() {
        return Err(Error::Shape(format!(
            "write_idx: {rows}x{cols} does not match feature dimension {}",
            dataset.feature_dim()
        )));
    }
    let too_big = u32::MAX as usize;
    if dataset.len() > too_big || rows > too_big || cols > too_big {
        return Err(Error::Shape("write_idx: dimension exceeds u32".into()));
    }
    if let Some(&l) = dataset.labels().iter().find(|&&l| l > 256) {
        return Err(Error::Shape(format!(
            "write_idx: label {l} does not fit an unsigned byte"
        )));
    }

    let mut img = Vec::with_capacity(16 + dataset.len() * rows * cols);
    img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    img.extend_from_slice(&(rows as u32).to_be_bytes());
    img.extend_from_slice(&(cols as u32).to_be_bytes());
    for row in dataset.features() {
        img.extend(
            row.iter()
                .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
        );
    }
    std::fs::write(images_path, img).map_err(|e| io_err(images_path, e))?;

    let mut lab = Vec::with_capacity(8 + dataset.len());
    lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    lab.extend(dataset.labels().iter().map(|&l| (l - 1) as u8));
    std::fs::write(labels_path, lab).map_err(|e| io_err(labels_path, e))
}

// ==================== synthetic data ====================

/// Isotropic Gaussian clusters around `classes` centers spaced evenly on a
/// circle of radius 5 in the first two feature dimensions (remaining
/// dimensions are pure noise). Deterministic given the seed; rows are
/// class-major and labels balanced.
pub fn synth_blobs(
    classes: usize,
    n_per_class: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if classes < 2 {
        return Err(Error::Domain(format!(
            "synth_blobs: need at least 2 classes, got {classes}"
        )));
    }
    if n_per_class == 0 {
        return Err(Error::Domain("synth_blobs: n_per_class is 0".into()));
    }
    if dim < 2 {
        return Err(Error::Domain(format!(
            "synth_blobs: need at least 2 dimensions, got {dim}"
        )));
    }
    if !spread.is_finite() || spread <= 0.0 {
        return Err(Error::Domain(format!(
            "synth_blobs: spread = {spread} must be finite and > 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(classes * n_per_class);
    let mut labels = Vec::with_capacity(classes * n_per_class);
    for c in 0..classes {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / classes as f64;
        let (cx, cy) = (5.0 * angle.cos(), 5.0 * angle.sin());
        for _ in 0..n_per_class {
            let mut row: FeatureVector = (0..dim)
                .map(|_| spread * rng.sample::<f64, _>(StandardNormal))
                .collect();
            row[0] += cx;
            row[1] += cy;
            features.push(row);
            labels.push(c + 1);
        }
    }
    LabeledDataset::new(
        format!("blobs-c{classes}-n{n_per_class}-d{dim}"),
        features,
        labels,
        classes,
    )
}

/// Draw `n` rows without replacement (seeded), keeping the original row
/// order among the survivors.
pub fn subsample(dataset: &LabeledDataset, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 || n > dataset.len() {
        return Err(Error::Shape(format!(
            "subsample: n = {n} outside [1, {}]",
            dataset.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    for i in 0..n {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    let mut keep = indices[..n].to_vec();
    keep.sort_unstable();
    let mut out = dataset.select(&keep)?;
    out.name = format!("{}-sub{n}", dataset.name);
    Ok(out)
}

// ==================== learning-curve CSV ====================

/// One accuracy checkpoint of an active-learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurveRecord {
    /// Acquisition strategy id (kebab-case).
    pub strategy: String,
    pub seed: u64,
    /// Acquisition iteration; 0 is the initial random set before any
    /// acquisition.
    pub iteration: usize,
    pub labeled_count: usize,
    pub test_accuracy: f64,
    /// Measured seconds for the iteration (train + score + select), or 0
    /// when timing is disabled for byte-reproducible outputs.
    pub wall_time_s: f64,
}

pub const CURVE_HEADER: &str = "strategy,seed,iteration,labeled_count,test_accuracy,wall_time_s";

/// Write learning-curve records as CSV, sorted by (strategy, seed,
/// iteration). Floats use shortest round-trip formatting.
pub fn write_curves(records: &[LearningCurveRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if records.is_empty() {
        return Err(Error::Shape("write_curves: no records".into()));
    }
    for r in records {
        if !(0.0..=1.0).contains(&r.test_accuracy) {
            return Err(Error::Domain(format!(
                "write_curves: test_accuracy {} outside [0, 1]",
                r.test_accuracy
            )));
        }
        if !r.wall_time_s.is_finite() || r.wall_time_s < 0.0 {
            return Err(Error::Domain(format!(
                "write_curves: wall_time_s {} must be finite and >= 0",
                r.wall_time_s
            )));
        }
    }
    let mut sorted: Vec<&LearningCurveRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.strategy, a.seed, a.iteration).cmp(&(&b.strategy, b.seed, b.iteration))
    });
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.strategy, r.seed, r.iteration, r.labeled_count, r.test_accuracy, r.wall_time_s
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Read back a learning-curve CSV written by [`write_curves`].
pub fn read_curves(path: impl AsRef<Path>) -> Result<Vec<LearningCurveRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h == CURVE_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "{}: expected header {CURVE_HEADER:?}, found {other:?}",
                path.display()
            )))
        }
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!(
                "{}: line {}: expected 6 fields, found {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let parse_err = |what: &str, v: &str| {
            Error::Parse(format!(
                "{}: line {}: bad {what} {v:?}",
                path.display(),
                lineno + 2
            ))
        };
        records.push(LearningCurveRecord {
            strategy: fields[0].to_string(),
            seed: fields[1].parse().map_err(|_| parse_err("seed", fields[1]))?,
            iteration: fields[2]
                .parse()
                .map_err(|_| parse_err("iteration", fields[2]))?,
            labeled_count: fields[3]
                .parse()
                .map_err(|_| parse_err("labeled_count", fields[3]))?,
            test_accuracy: fields[4]
                .parse()
                .map_err(|_| parse_err("test_accuracy", fields[4]))?,
            wall_time_s: fields[5]
                .parse()
                .map_err(|_| parse_err("wall_time_s", fields[5]))?,
        });
    }
    Ok(records)
}

// ==================== score-dump CSV ====================

/// One pool item's acquisition score at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDumpRecord {
    pub strategy: String,
    pub seed: u64,
    pub iteration: usize,
    /// Index into the run's unlabeled pool.
    pub pool_index: usize,
    pub score: f64,
    /// True when the analytic score fell back to its empirical counterpart.
    pub fallback: bool,
}

pub const SCORE_HEADER: &str = "strategy,seed,iteration,pool_index,score,fallback";

/// Write score dumps as CSV, sorted by (strategy, seed, iteration,
/// pool_index).
pub fn write_scores(records: &[ScoreDumpRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if records.is_empty() {
        return Err(Error::Shape("write_scores: no records".into()));
    }
    let mut sorted: Vec<&ScoreDumpRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.strategy, a.seed, a.iteration, a.pool_index).cmp(&(
            &b.strategy,
            b.seed,
            b.iteration,
            b.pool_index,
        ))
    });
    let mut out = String::from(SCORE_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.strategy, r.seed, r.iteration, r.pool_index, r.score, r.fallback
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

// ==================== probability-vector CSV ====================

/// Read a headerless CSV of probability rows (one simplex point per line,
/// same column count throughout) into a [`SampleBatch`].
///
/// Rows must be non-negative, finite, and sum to 1 within 1e-6; they are
/// then renormalized exactly. All violations are input errors.
pub fn read_simplex_csv(path: impl AsRef<Path>) -> Result<SampleBatch> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut points = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "{}: line {}: bad number {f:?}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => {
                if row.len() < 2 {
                    return Err(Error::Parse(format!(
                        "{}: line {}: need at least 2 probability columns, found {}",
                        path.display(),
                        lineno + 1,
                        row.len()
                    )));
                }
                width = Some(row.len());
            }
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!(
                    "{}: line {}: {} columns, expected {w}",
                    path.display(),
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        if let Some(&v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Parse(format!(
                "{}: line {}: probability {v} not in [0, 1]",
                path.display(),
                lineno + 1
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Parse(format!(
                "{}: line {}: row sums to {sum}, expected 1 within 1e-6",
                path.display(),
                lineno + 1
            )));
        }
        let point = SimplexPoint::normalized(row).map_err(|e| {
            Error::Parse(format!("{}: line {}: {e}", path.display(), lineno + 1))
        })?;
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::Parse(format!(
            "{}: no probability rows",
            path.display()
        )));
    }
    SampleBatch::new(points)
}

/// Write a batch as a headerless probability CSV (inverse of
/// [`read_simplex_csv`]).
pub fn write_simplex_csv(batch: &SampleBatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for point in batch.iter() {
        let row: Vec<String> = point.probs().iter().map(|p| p.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}
