//! Synthetic labelled vector datasets and their text format.

use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, fmt_f64, random_unit_vector, seeded_rng};
use crate::textio;

/// Labelled rows of `input_dim` reals; labels lie in `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDataset {
    input_dim: usize,
    class_count: usize,
    samples: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl VectorDataset {
    pub fn new(input_dim: usize, class_count: usize, samples: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if input_dim == 0 || class_count == 0 {
            return Err(Error::InvalidParameter("input dimension and class count must be positive".into()));
        }
        if samples.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: samples.len(), actual: labels.len() });
        }
        if let Some(row) = samples.iter().find(|r| r.len() != input_dim) {
            return Err(Error::DimensionMismatch { expected: input_dim, actual: row.len() });
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::IndexOutOfRange { index: y, count: class_count });
        }
        Ok(Self { input_dim, class_count, samples, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn sample(&self, i: usize) -> (&[f64], usize) {
        (&self.samples[i], self.labels[i])
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn per_class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            input_dim: self.input_dim,
            class_count: self.class_count,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Stratified split: a seeded `holdout` fraction of every class goes to
    /// the second dataset (at least one sample when the class has two or more).
    pub fn split(&self, holdout: f64, seed: u64) -> Result<(Self, Self)> {
        if !(0.0..1.0).contains(&holdout) {
            return Err(Error::InvalidParameter(format!("holdout fraction must be in [0, 1), got {holdout}")));
        }
        let mut rng = seeded_rng(seed);
        let mut keep = Vec::new();
        let mut held = Vec::new();
        for class in 0..self.class_count {
            let mut rows: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
            rows.shuffle(&mut rng);
            let mut n_held = (rows.len() as f64 * holdout).round() as usize;
            if holdout > 0.0 && rows.len() >= 2 {
                n_held = n_held.clamp(1, rows.len() - 1);
            }
            held.extend_from_slice(&rows[..n_held]);
            keep.extend_from_slice(&rows[n_held..]);
        }
        keep.sort_unstable();
        held.sort_unstable();
        Ok((self.subset(&keep), self.subset(&held)))
    }
}

/// Parameters of [`generate_gaussian_mixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub classes: usize,
    pub input_dim: usize,
    pub per_class: usize,
    /// Standard deviation of the isotropic noise around each class mean.
    pub spread: f64,
    /// Minimum angle between class means, radians.
    pub min_angle: f64,
    pub seed: u64,
}

impl MixtureConfig {
    pub fn new(classes: usize, input_dim: usize, per_class: usize, spread: f64, seed: u64) -> Self {
        Self { classes, input_dim, per_class, spread, min_angle: 0.3, seed }
    }
}

const MAX_ATTEMPTS: usize = 10_000;

fn draw_means<R: Rng>(rng: &mut R, cfg: &MixtureConfig) -> Result<Vec<Vec<f64>>> {
    let max_cos = cfg.min_angle.cos();
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(cfg.classes);
    for _ in 0..cfg.classes {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let cand = random_unit_vector(rng, cfg.input_dim);
            if means.iter().all(|m| dot(m, &cand) <= max_cos) {
                means.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::RejectionFailure { count: cfg.classes, min_angle: cfg.min_angle, attempts: MAX_ATTEMPTS });
        }
    }
    Ok(means)
}

fn validate_mixture(cfg: &MixtureConfig) -> Result<()> {
    if cfg.classes < 2 || cfg.per_class == 0 || cfg.input_dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "need >= 2 classes, >= 1 sample per class and a positive input dimension, got c={} per_class={} p={}",
            cfg.classes, cfg.per_class, cfg.input_dim
        )));
    }
    if !(cfg.spread >= 0.0 && cfg.spread.is_finite()) || !(cfg.min_angle >= 0.0) {
        return Err(Error::InvalidParameter("spread and minimum angle must be non-negative".into()));
    }
    Ok(())
}

/// Class means used by [`generate_gaussian_mixture`] for the same config.
pub fn mixture_means(cfg: &MixtureConfig) -> Result<Vec<Vec<f64>>> {
    validate_mixture(cfg)?;
    draw_means(&mut seeded_rng(cfg.seed), cfg)
}

/// Isotropic Gaussian clusters around seeded unit-vector means, rows grouped
/// by class.
pub fn generate_gaussian_mixture(cfg: &MixtureConfig) -> Result<VectorDataset> {
    validate_mixture(cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let means = draw_means(&mut rng, cfg)?;
    let mut samples = Vec::with_capacity(cfg.classes * cfg.per_class);
    let mut labels = Vec::with_capacity(cfg.classes * cfg.per_class);
    for (label, mean) in means.iter().enumerate() {
        for _ in 0..cfg.per_class {
            let row = mean
                .iter()
                .map(|m| {
                    let noise: f64 = rng.sample(StandardNormal);
                    m + cfg.spread * noise
                })
                .collect();
            samples.push(row);
            labels.push(label);
        }
    }
    VectorDataset::new(cfg.input_dim, cfg.classes, samples, labels)
}

/// Exponential long-tail profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTailSpec {
    /// Ratio of the smallest to the largest class, in `(0, 1]`.
    pub imbalance_factor: f64,
    pub max_per_class: usize,
}

impl LongTailSpec {
    /// Target count of class `k`: `round(max · μ^(k/(c−1)))`.
    pub fn class_sizes(&self, classes: usize) -> Result<Vec<usize>> {
        if !(self.imbalance_factor > 0.0 && self.imbalance_factor <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "imbalance factor must be in (0, 1], got {}",
                self.imbalance_factor
            )));
        }
        if self.max_per_class == 0 || classes == 0 {
            return Err(Error::InvalidParameter("max_per_class and class count must be positive".into()));
        }
        let denom = (classes.max(2) - 1) as f64;
        Ok((0..classes)
            .map(|k| (self.max_per_class as f64 * self.imbalance_factor.powf(k as f64 / denom)).round() as usize)
            .collect())
    }
}

/// Subsamples every class to its long-tail size, keeping a seeded random
/// selection of rows in their original order.
pub fn apply_long_tail(dataset: &VectorDataset, spec: &LongTailSpec, seed: u64) -> Result<VectorDataset> {
    let sizes = spec.class_sizes(dataset.class_count())?;
    let mut rng = seeded_rng(seed);
    let mut keep = Vec::new();
    for (class, &target) in sizes.iter().enumerate() {
        let rows: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == class).collect();
        if rows.len() < spec.max_per_class {
            return Err(Error::InsufficientSamples { class, available: rows.len(), required: spec.max_per_class });
        }
        keep.extend(index::sample(&mut rng, rows.len(), target).into_iter().map(|k| rows[k]));
    }
    keep.sort_unstable();
    Ok(dataset.subset(&keep))
}

pub fn format_dataset(dataset: &VectorDataset) -> String {
    let mut out = format!(
        "# protosphere-dataset v1 n={} p={} c={}\n",
        dataset.len(),
        dataset.input_dim,
        dataset.class_count
    );
    for (row, label) in dataset.samples.iter().zip(&dataset.labels) {
        for x in row {
            out += &fmt_f64(*x);
            out.push(',');
        }
        out += &label.to_string();
        out.push('\n');
    }
    out
}

pub fn save_dataset(path: &Path, dataset: &VectorDataset) -> Result<()> {
    textio::write_string(path, &format_dataset(dataset))
}

pub fn load_dataset(path: &Path) -> Result<VectorDataset> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    let fields = textio::parse_header(path, lines.next(), "protosphere-dataset")?;
    let n: usize = textio::header_field(path, &fields, "n")?;
    let p: usize = textio::header_field(path, &fields, "p")?;
    let c: usize = textio::header_field(path, &fields, "c")?;
    if p == 0 || c == 0 {
        return Err(Error::MalformedHeader { path: path.into(), reason: "p and c must be positive".into() });
    }
    let mut samples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let lineno = k + 2;
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != p + 1 {
            return Err(Error::WidthMismatch { path: path.into(), line: lineno, expected: p + 1, found: toks.len() });
        }
        let row = toks[..p].iter().map(|t| textio::parse_f64(path, lineno, t)).collect::<Result<Vec<_>>>()?;
        let raw = toks[p].trim();
        let label: usize = raw.parse().map_err(|_| Error::Parse {
            path: path.into(),
            line: lineno,
            reason: format!("invalid label `{raw}`"),
        })?;
        if label >= c {
            return Err(Error::LabelOutOfRange { path: path.into(), line: lineno, label, count: c });
        }
        samples.push(row);
        labels.push(label);
    }
    if samples.len() != n {
        return Err(Error::MalformedHeader {
            path: path.into(),
            reason: format!("header declares n={n} but file has {} rows", samples.len()),
        });
    }
    VectorDataset::new(p, c, samples, labels)
}
