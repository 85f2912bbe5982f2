//! Equidistributed prototype estimation on the unit hypersphere.
//!
//! Prototypes are spread by projected gradient descent on a Gaussian-potential
//! uniformity objective: each step moves the columns along the negative
//! Euclidean gradient and maps them back onto the sphere by ℓ2-normalization.
//! For `d = 2` the optimum is known in closed form ([`circle_prototypes`]).

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, fmt_f64, norm, normalize_in_place, random_unit_vector, seeded_rng, squared_distance};
use crate::textio;

/// Column norms must be within this of 1 for a matrix to be accepted.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;
/// Looser tolerance applied to vectors handed in by callers and to loaded files.
pub const INPUT_UNIT_TOLERANCE: f64 = 1e-6;

/// A fixed set of `count` unit vectors in `R^dim`, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeMatrix {
    dim: usize,
    count: usize,
    data: Vec<f64>,
}

impl PrototypeMatrix {
    /// Builds a matrix from columns, rejecting non-unit columns.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(columns, UNIT_NORM_TOLERANCE)
    }

    pub(crate) fn with_tolerance(columns: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let count = columns.len();
        let dim = columns.first().map_or(0, Vec::len);
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("prototype dimension must be >= 2, got {dim}")));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!("prototype count must be >= 2, got {count}")));
        }
        let mut data = Vec::with_capacity(dim * count);
        for (k, col) in columns.into_iter().enumerate() {
            if col.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: col.len() });
            }
            let n = norm(&col);
            if !n.is_finite() || (n - 1.0).abs() > tol {
                return Err(Error::NotUnitNorm { column: k, norm: n });
            }
            data.extend(col);
        }
        Ok(Self { dim, count, data })
    }

    /// Normalizes every column of a raw column-major buffer.
    pub fn from_raw_normalized(dim: usize, count: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * count {
            return Err(Error::DimensionMismatch { expected: dim * count, actual: data.len() });
        }
        for (k, col) in data.chunks_mut(dim).enumerate() {
            if normalize_in_place(col) == 0.0 {
                return Err(Error::NotUnitNorm { column: k, norm: 0.0 });
            }
        }
        Self::with_tolerance(data.chunks(dim).map(<[f64]>::to_vec).collect(), UNIT_NORM_TOLERANCE)
    }

    /// Draws `count` seeded standard-normal columns and normalizes them.
    pub fn random(dim: usize, count: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let cols = (0..count).map(|_| random_unit_vector(&mut rng, dim)).collect();
        Self::from_columns(cols)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    /// Column-major entries; column `k` occupies `k*dim..(k+1)*dim`.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Cosine similarity (plain dot product) between two prototypes.
    pub fn cosine(&self, i: usize, j: usize) -> f64 {
        dot(self.column(i), self.column(j))
    }

    /// Order-sensitive FNV-1a digest over the bit patterns of every entry.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for x in &self.data {
            for b in x.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Hyper-parameters of [`estimate_prototypes`].
#[derive(Debug, Clone, PartialEq)]
pub struct UniformityConfig {
    /// Kernel temperature `t` in `exp(-t‖u−v‖²)`.
    pub temperature: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Rows sampled per step; `None` uses every prototype.
    pub subset_size: Option<usize>,
    pub seed: u64,
}

impl Default for UniformityConfig {
    fn default() -> Self {
        Self { temperature: 2.0, learning_rate: 0.1, iterations: 1000, subset_size: None, seed: 0 }
    }
}

impl UniformityConfig {
    pub fn validate(&self, count: usize) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature must be > 0, got {}", self.temperature)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        if let Some(s) = self.subset_size {
            if s == 0 || s > count {
                return Err(Error::InvalidParameter(format!("subset size must be in [1, {count}], got {s}")));
            }
        }
        Ok(())
    }
}

/// Gaussian potential `exp(-t‖u−v‖²)` between two unit vectors.
pub fn gaussian_potential(u: &[f64], v: &[f64], t: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), actual: v.len() });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature must be > 0, got {t}")));
    }
    for (k, x) in [u, v].into_iter().enumerate() {
        let n = norm(x);
        if (n - 1.0).abs() > INPUT_UNIT_TOLERANCE {
            return Err(Error::NotUnitNorm { column: k, norm: n });
        }
    }
    Ok((-t * squared_distance(u, v)).exp())
}

fn check_subset(subset: &[usize], count: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut seen = vec![false; count];
    for &i in subset {
        if i >= count {
            return Err(Error::IndexOutOfRange { index: i, count });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

fn check_columns(data: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 || data.len() % dim != 0 {
        return Err(Error::DimensionMismatch { expected: dim, actual: data.len() });
    }
    Ok(data.len() / dim)
}

/// Uniformity objective over a raw column-major buffer (columns need not be
/// unit length). Self-pairs are part of the sum.
pub fn uniformity_loss_columns(data: &[f64], dim: usize, subset: &[usize], t: f64) -> Result<f64> {
    let count = check_columns(data, dim)?;
    check_subset(subset, count)?;
    let col = |k: usize| &data[k * dim..(k + 1) * dim];
    let total: f64 = subset
        .iter()
        .map(|&i| (0..count).map(|j| (-t * squared_distance(col(i), col(j))).exp()).sum::<f64>())
        .sum();
    Ok((total / subset.len() as f64).ln())
}

/// Euclidean gradient of [`uniformity_loss_columns`] with respect to every
/// entry, column-major like the input.
pub fn uniformity_gradient_columns(data: &[f64], dim: usize, subset: &[usize], t: f64) -> Result<Vec<f64>> {
    let count = check_columns(data, dim)?;
    check_subset(subset, count)?;
    let mut grad = vec![0.0; data.len()];
    let mut total = 0.0;
    let mut diff = vec![0.0; dim];
    for &i in subset {
        for j in 0..count {
            if i == j {
                total += 1.0;
                continue;
            }
            let (wi, wj) = (&data[i * dim..(i + 1) * dim], &data[j * dim..(j + 1) * dim]);
            for (d, (a, b)) in diff.iter_mut().zip(wi.iter().zip(wj)) {
                *d = a - b;
            }
            let g = (-t * dot(&diff, &diff)).exp();
            total += g;
            // d g / d w_i = -2t g (w_i - w_j), and the opposite sign for w_j.
            let scale = -2.0 * t * g;
            for k in 0..dim {
                grad[i * dim + k] += scale * diff[k];
                grad[j * dim + k] -= scale * diff[k];
            }
        }
    }
    grad.iter_mut().for_each(|g| *g /= total);
    Ok(grad)
}

/// Uniformity objective of a prototype matrix restricted to `subset` rows.
pub fn uniformity_loss(w: &PrototypeMatrix, subset: &[usize], t: f64) -> Result<f64> {
    uniformity_loss_columns(w.as_slice(), w.dim(), subset, t)
}

/// Gradient of [`uniformity_loss`] as a column-major `dim × count` buffer.
pub fn uniformity_gradient(w: &PrototypeMatrix, subset: &[usize], t: f64) -> Result<Vec<f64>> {
    uniformity_gradient_columns(w.as_slice(), w.dim(), subset, t)
}

/// Stepwise projected gradient descent on the uniformity objective.
///
/// Exposed so callers can observe intermediate configurations; most code
/// should use [`estimate_prototypes`].
pub struct UniformityOptimizer {
    dim: usize,
    count: usize,
    data: Vec<f64>,
    config: UniformityConfig,
    rng: ChaCha8Rng,
    iteration: usize,
}

impl UniformityOptimizer {
    pub fn new(dim: usize, count: usize, config: UniformityConfig) -> Result<Self> {
        if dim < 2 || count < 2 {
            return Err(Error::InvalidParameter(format!("need d >= 2 and c >= 2, got d={dim} c={count}")));
        }
        config.validate(count)?;
        let mut rng = seeded_rng(config.seed);
        let data = (0..count).flat_map(|_| random_unit_vector(&mut rng, dim)).collect();
        Ok(Self { dim, count, data, config, rng, iteration: 0 })
    }

    /// Starts from an existing configuration instead of a random draw.
    pub fn from_matrix(w: &PrototypeMatrix, config: UniformityConfig) -> Result<Self> {
        config.validate(w.count())?;
        let rng = seeded_rng(config.seed);
        Ok(Self { dim: w.dim(), count: w.count(), data: w.as_slice().to_vec(), config, rng, iteration: 0 })
    }

    fn next_subset(&mut self) -> Vec<usize> {
        match self.config.subset_size {
            Some(s) if s < self.count => {
                let mut idx = index::sample(&mut self.rng, self.count, s).into_vec();
                idx.sort_unstable();
                idx
            }
            _ => (0..self.count).collect(),
        }
    }

    /// One projected step. Returns the subset loss evaluated before the step.
    pub fn step(&mut self) -> f64 {
        let subset = self.next_subset();
        let t = self.config.temperature;
        let loss = uniformity_loss_columns(&self.data, self.dim, &subset, t).expect("subset is valid");
        let grad = uniformity_gradient_columns(&self.data, self.dim, &subset, t).expect("subset is valid");
        let lr = self.config.learning_rate;
        for (w, g) in self.data.iter_mut().zip(&grad) {
            *w -= lr * g;
        }
        for col in self.data.chunks_mut(self.dim) {
            normalize_in_place(col);
        }
        self.iteration += 1;
        loss
    }

    /// Runs the remaining configured iterations.
    pub fn run(&mut self) {
        while self.iteration < self.config.iterations {
            self.step();
        }
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Full-set objective of the current configuration.
    pub fn loss(&self) -> f64 {
        let all: Vec<usize> = (0..self.count).collect();
        uniformity_loss_columns(&self.data, self.dim, &all, self.config.temperature).expect("valid")
    }

    pub fn matrix(&self) -> PrototypeMatrix {
        PrototypeMatrix { dim: self.dim, count: self.count, data: self.data.clone() }
    }
}

/// Estimates `count` equidistributed prototypes in `R^dim`.
pub fn estimate_prototypes(dim: usize, count: usize, config: &UniformityConfig) -> Result<PrototypeMatrix> {
    let mut opt = UniformityOptimizer::new(dim, count, config.clone())?;
    opt.run();
    Ok(opt.matrix())
}

/// `count` points splitting the unit circle into equal slices, starting at angle 0.
pub fn circle_prototypes(count: usize) -> Result<PrototypeMatrix> {
    if count < 2 {
        return Err(Error::InvalidParameter(format!("circle split needs c >= 2, got {count}")));
    }
    let cols = (0..count)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / count as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    PrototypeMatrix::from_columns(cols)
}

/// Pairwise-geometry diagnostics over unordered pairs `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryReport {
    /// Mean pairwise angle in radians.
    pub apad: f64,
    pub min_cos: f64,
    pub max_cos: f64,
    /// Smallest cosine distance `1 − w_i·w_j`.
    pub min_pairwise_distance: f64,
    /// Largest deviation of a pairwise cosine from `−1/(c−1)`.
    pub etf_gap: f64,
}

pub fn geometry_report(w: &PrototypeMatrix) -> GeometryReport {
    let c = w.count();
    let bound = -1.0 / (c as f64 - 1.0);
    let mut angle_sum = 0.0;
    let mut pairs = 0usize;
    let (mut min_cos, mut max_cos, mut etf_gap) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for i in 0..c {
        for j in i + 1..c {
            let cos = w.cosine(i, j).clamp(-1.0, 1.0);
            angle_sum += cos.acos();
            pairs += 1;
            min_cos = min_cos.min(cos);
            max_cos = max_cos.max(cos);
            etf_gap = etf_gap.max((cos - bound).abs());
        }
    }
    GeometryReport {
        apad: angle_sum / pairs as f64,
        min_cos,
        max_cos,
        min_pairwise_distance: 1.0 - max_cos,
        etf_gap,
    }
}

impl fmt::Display for GeometryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "apad                  {:.6} rad ({:.3} deg)", self.apad, self.apad.to_degrees())?;
        writeln!(f, "min_cos               {:.6}", self.min_cos)?;
        writeln!(f, "max_cos               {:.6}", self.max_cos)?;
        writeln!(f, "min_pairwise_distance {:.6}", self.min_pairwise_distance)?;
        write!(f, "etf_gap               {:.6}", self.etf_gap)
    }
}

/// Angles of `d = 2` prototypes in `[0, 2π)`, sorted, and the gaps between
/// consecutive angles (including the wrap-around gap).
pub fn angular_gaps(w: &PrototypeMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    if w.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: w.dim() });
    }
    let mut angles: Vec<f64> = w.columns().map(|c| c[1].atan2(c[0]).rem_euclid(2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let gaps = (0..n)
        .map(|k| if k + 1 < n { angles[k + 1] - angles[k] } else { angles[0] + 2.0 * PI - angles[k] })
        .collect();
    Ok((angles, gaps))
}

/// Header values recorded alongside a prototype file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrototypeFileInfo {
    pub temperature: f64,
    pub seed: u64,
}

pub fn format_prototypes(w: &PrototypeMatrix, info: PrototypeFileInfo) -> String {
    let mut out = format!(
        "# protosphere-prototypes v1 d={} c={} t={} seed={}\n",
        w.dim(),
        w.count(),
        info.temperature,
        info.seed
    );
    for col in w.columns() {
        let row: Vec<String> = col.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn save_prototypes(path: &Path, w: &PrototypeMatrix, info: PrototypeFileInfo) -> Result<()> {
    textio::write_string(path, &format_prototypes(w, info))
}

pub fn load_prototypes(path: &Path) -> Result<(PrototypeMatrix, PrototypeFileInfo)> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    let fields = textio::parse_header(path, lines.next(), "protosphere-prototypes")?;
    let dim: usize = textio::header_field(path, &fields, "d")?;
    let count: usize = textio::header_field(path, &fields, "c")?;
    let info = PrototypeFileInfo {
        temperature: textio::header_field(path, &fields, "t")?,
        seed: textio::header_field(path, &fields, "seed")?,
    };
    let mut cols = Vec::with_capacity(count);
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let lineno = k + 2;
        let vals = line
            .split(',')
            .map(|tok| textio::parse_f64(path, lineno, tok))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != dim {
            return Err(Error::WidthMismatch { path: path.into(), line: lineno, expected: dim, found: vals.len() });
        }
        cols.push(vals);
    }
    if cols.len() != count {
        return Err(Error::MalformedHeader {
            path: path.into(),
            reason: format!("header declares c={count} but file has {} rows", cols.len()),
        });
    }
    Ok((PrototypeMatrix::with_tolerance(cols, INPUT_UNIT_TOLERANCE)?, info))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        v
    }

    fn antipodal() -> PrototypeMatrix {
        PrototypeMatrix::from_columns(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap()
    }

    #[test]
    fn kernel_values() {
        let u = e(3, 0);
        assert_eq!(gaussian_potential(&u, &u, 2.0).unwrap(), 1.0);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!((gaussian_potential(&u, &neg, 2.0).unwrap() - (-8.0f64).exp()).abs() < 1e-15);
        assert!((gaussian_potential(&u, &e(3, 1), 2.0).unwrap() - (-4.0f64).exp()).abs() < 1e-15);
        assert!((gaussian_potential(&u, &e(3, 1), 2.0).unwrap() - 1.8316e-2).abs() < 1e-6);
    }

    #[test]
    fn kernel_errors() {
        assert!(matches!(gaussian_potential(&e(2, 0), &e(3, 0), 2.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(gaussian_potential(&e(2, 0), &e(2, 1), 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(gaussian_potential(&e(2, 0), &e(2, 1), -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn loss_single_prototype_is_zero() {
        assert_eq!(uniformity_loss_columns(&[1.0, 0.0], 2, &[0], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn loss_antipodal_pair() {
        let l = uniformity_loss(&antipodal(), &[0, 1], 2.0).unwrap();
        let expected = (1.0 + (-8.0f64).exp()).ln();
        assert!((l - expected).abs() < 1e-15);
        assert!((l - 3.35406e-4).abs() < 1e-8);
    }

    #[test]
    fn loss_equilateral_matches_scalar_sum() {
        let w = circle_prototypes(3).unwrap();
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += gaussian_potential(w.column(i), w.column(j), 2.0).unwrap();
            }
        }
        // chord² between points 120° apart is 3.
        let closed = (1.0 + 2.0 * (-6.0f64).exp()).ln();
        let got = uniformity_loss(&w, &[0, 1, 2], 2.0).unwrap();
        assert!((got - (s / 3.0).ln()).abs() < 1e-14);
        assert!((got - closed).abs() < 1e-14);
    }

    #[test]
    fn loss_rejects_bad_subsets() {
        let w = antipodal();
        assert!(matches!(uniformity_loss(&w, &[], 2.0), Err(Error::EmptySubset)));
        assert!(matches!(uniformity_loss(&w, &[2], 2.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(uniformity_loss(&w, &[1, 1], 2.0), Err(Error::DuplicateIndex(1))));
    }

    #[test]
    fn antipodal_gradient_direction() {
        let g = uniformity_gradient(&antipodal(), &[0, 1], 2.0).unwrap();
        // dL/dw0 = (1/S) * 2 * (-2t g)(w0 - w1), S = 2 + 2g, g = e^-8.
        let gk = (-8.0f64).exp();
        let mag = 2.0 * (-4.0 * gk) * 2.0 / (2.0 + 2.0 * gk);
        assert!((g[0] - mag).abs() < 1e-15);
        assert!((g[2] + mag).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
        // Descent step moves w0 toward −w1 = (1, 0): the gradient is negative along x.
        assert!(g[0] < 0.0);
    }

    #[test]
    fn self_pairs_contribute_no_gradient() {
        let g = uniformity_gradient_columns(&[0.6, 0.8], 2, &[0], 2.0).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn circle_examples() {
        let w = circle_prototypes(4).unwrap();
        let expected = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (col, exp) in w.columns().zip(expected) {
            assert!((col[0] - exp[0]).abs() < 1e-15 && (col[1] - exp[1]).abs() < 1e-15);
        }
        let w2 = circle_prototypes(2).unwrap();
        assert!((w2.cosine(0, 1) + 1.0).abs() < 1e-15);
        let w3 = circle_prototypes(3).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((w3.cosine(i, j) + 0.5).abs() < 1e-15);
        }
        assert!(circle_prototypes(1).is_err());
    }

    #[test]
    fn report_antipodal() {
        let r = geometry_report(&antipodal());
        assert!((r.apad - PI).abs() < 1e-15);
        assert_eq!(r.min_cos, -1.0);
        assert_eq!(r.max_cos, -1.0);
        assert_eq!(r.min_pairwise_distance, 2.0);
        assert_eq!(r.etf_gap, 0.0);
    }

    #[test]
    fn report_equilateral_attains_bound() {
        let r = geometry_report(&circle_prototypes(3).unwrap());
        assert!(r.etf_gap < 1e-15);
        assert!((r.apad - 2.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = UniformityConfig { temperature: 0.0, ..Default::default() };
        assert!(estimate_prototypes(3, 4, &bad).is_err());
        let bad = UniformityConfig { subset_size: Some(5), ..Default::default() };
        assert!(estimate_prototypes(3, 4, &bad).is_err());
        assert!(estimate_prototypes(1, 4, &UniformityConfig::default()).is_err());
        assert!(estimate_prototypes(3, 1, &UniformityConfig::default()).is_err());
    }

    #[test]
    fn subset_estimation_is_deterministic() {
        let cfg = UniformityConfig { subset_size: Some(3), iterations: 50, seed: 9, ..Default::default() };
        let a = estimate_prototypes(4, 7, &cfg).unwrap();
        let b = estimate_prototypes(4, 7, &cfg).unwrap();
        assert_eq!(a, b);
        let other = estimate_prototypes(4, 7, &UniformityConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn from_columns_rejects_non_unit() {
        let err = PrototypeMatrix::from_columns(vec![vec![1.0, 0.0], vec![0.5, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::NotUnitNorm { column: 1, .. }));
        assert_eq!(err.to_string().split(" (").next().unwrap(), "unit-norm violation at column 1");
    }
}
