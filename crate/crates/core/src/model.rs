//! Toy feature extractor and the classification losses.
//!
//! The backbone is an affine/tanh stack whose output is divided by its
//! Euclidean norm, so every feature lies on the unit sphere. Gradients are
//! written by hand; the normalization Jacobian `(I − z zᵀ)/‖v‖` is part of
//! [`backward`].
//!
//! The alignment loss `½ (z·w − 1)²` touches only the assigned prototype. Its
//! gradient with respect to `z` is the vector `(z·w − 1) w`; the closed form
//! sometimes quoted for it, `−(1 − zᵀw) zᵀw`, is a scalar and is not used.

use std::path::Path;

use rand::Rng;

use crate::assignment::AssignmentMapping;
use crate::error::{Error, Result};
use crate::hypersphere::{PrototypeMatrix, INPUT_UNIT_TOLERANCE};
use crate::linalg::{dot, fmt_f64, norm, seeded_rng};
use crate::textio;

/// Read access to a set of class prototypes.
pub trait PrototypeSource {
    fn dim(&self) -> usize;
    fn count(&self) -> usize;
    fn prototype(&self, k: usize) -> &[f64];
}

impl PrototypeSource for PrototypeMatrix {
    fn dim(&self) -> usize {
        PrototypeMatrix::dim(self)
    }
    fn count(&self) -> usize {
        PrototypeMatrix::count(self)
    }
    fn prototype(&self, k: usize) -> &[f64] {
        self.column(k)
    }
}

/// Unconstrained prototype matrix of a learnable softmax classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    dim: usize,
    count: usize,
    pub(crate) data: Vec<f64>,
}

impl LinearClassifier {
    pub fn new(dim: usize, count: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * count {
            return Err(Error::DimensionMismatch { expected: dim * count, actual: data.len() });
        }
        Ok(Self { dim, count, data })
    }

    /// Uniform in `±1/√dim`, seeded.
    pub fn random(dim: usize, count: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let bound = 1.0 / (dim as f64).sqrt();
        let data = (0..dim * count).map(|_| rng.random_range(-bound..=bound)).collect();
        Self { dim, count, data }
    }

    pub fn from_prototypes(w: &PrototypeMatrix) -> Self {
        Self { dim: w.dim(), count: w.count(), data: w.as_slice().to_vec() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl PrototypeSource for LinearClassifier {
    fn dim(&self) -> usize {
        self.dim
    }
    fn count(&self) -> usize {
        self.count
    }
    fn prototype(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerLayout {
    inputs: usize,
    outputs: usize,
    weight_offset: usize,
    bias_offset: usize,
}

/// Parameters of the affine/tanh stack, stored in one flat buffer: for each
/// layer the row-major `outputs × inputs` weight block followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct BackboneParams {
    layer_dims: Vec<usize>,
    layout: Vec<LayerLayout>,
    values: Vec<f64>,
}

fn layout_for(layer_dims: &[usize]) -> Result<(Vec<LayerLayout>, usize)> {
    if layer_dims.len() < 2 || layer_dims.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "layer widths must be positive with at least an input and an output, got {layer_dims:?}"
        )));
    }
    let mut offset = 0;
    let layout = layer_dims
        .windows(2)
        .map(|w| {
            let l = LayerLayout {
                inputs: w[0],
                outputs: w[1],
                weight_offset: offset,
                bias_offset: offset + w[0] * w[1],
            };
            offset += w[0] * w[1] + w[1];
            l
        })
        .collect();
    Ok((layout, offset))
}

impl BackboneParams {
    /// Seeded uniform weights in `±1/√fan_in`, zero biases.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Self> {
        let (layout, total) = layout_for(layer_dims)?;
        let mut values = vec![0.0; total];
        let mut rng = seeded_rng(seed);
        for l in &layout {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            for v in &mut values[l.weight_offset..l.bias_offset] {
                *v = rng.random_range(-bound..=bound);
            }
        }
        Ok(Self { layer_dims: layer_dims.to_vec(), layout, values })
    }

    /// Builds parameters from explicit per-layer weights (row-major) and biases.
    pub fn from_layers(layer_dims: &[usize], weights: &[Vec<f64>], biases: &[Vec<f64>]) -> Result<Self> {
        let (layout, total) = layout_for(layer_dims)?;
        if weights.len() != layout.len() || biases.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), actual: weights.len().min(biases.len()) });
        }
        let mut values = Vec::with_capacity(total);
        for ((l, w), b) in layout.iter().zip(weights).zip(biases) {
            if w.len() != l.inputs * l.outputs {
                return Err(Error::DimensionMismatch { expected: l.inputs * l.outputs, actual: w.len() });
            }
            if b.len() != l.outputs {
                return Err(Error::DimensionMismatch { expected: l.outputs, actual: b.len() });
            }
            values.extend_from_slice(w);
            values.extend_from_slice(b);
        }
        Ok(Self { layer_dims: layer_dims.to_vec(), layout, values })
    }

    /// Single square layer with identity weights and zero bias.
    pub fn identity(dim: usize) -> Self {
        let w: Vec<f64> = (0..dim * dim).map(|k| if k % (dim + 1) == 0 { 1.0 } else { 0.0 }).collect();
        Self::from_layers(&[dim, dim], &[w], &[vec![0.0; dim]]).expect("consistent shapes")
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("at least two widths")
    }

    pub fn num_layers(&self) -> usize {
        self.layout.len()
    }

    /// All parameters in storage order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn layer_weights(&self, layer: usize) -> &[f64] {
        let l = self.layout[layer];
        &self.values[l.weight_offset..l.bias_offset]
    }

    pub fn layer_bias(&self, layer: usize) -> &[f64] {
        let l = self.layout[layer];
        &self.values[l.bias_offset..l.bias_offset + l.outputs]
    }

    /// Multiplies the final affine layer (weights and bias) by `factor`.
    pub fn scale_output_layer(&mut self, factor: f64) {
        let l = *self.layout.last().expect("at least one layer");
        for v in &mut self.values[l.weight_offset..l.bias_offset + l.outputs] {
            *v *= factor;
        }
    }
}

/// Intermediate values kept by a forward pass for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Inputs to each affine layer; `inputs[0]` is the sample itself.
    inputs: Vec<Vec<f64>>,
    pre_norm: Vec<f64>,
    pre_norm_len: f64,
    output: Vec<f64>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// The final affine output before normalization.
    pub fn pre_normalization(&self) -> &[f64] {
        &self.pre_norm
    }
}

fn affine(params: &BackboneParams, layer: usize, x: &[f64]) -> Vec<f64> {
    let l = params.layout[layer];
    let w = &params.values[l.weight_offset..l.bias_offset];
    let b = &params.values[l.bias_offset..l.bias_offset + l.outputs];
    w.chunks(l.inputs).zip(b).map(|(row, bias)| dot(row, x) + bias).collect()
}

pub fn forward_trace(params: &BackboneParams, x: &[f64]) -> Result<ForwardTrace> {
    if x.len() != params.input_dim() {
        return Err(Error::DimensionMismatch { expected: params.input_dim(), actual: x.len() });
    }
    let last = params.num_layers() - 1;
    let mut inputs = Vec::with_capacity(params.num_layers());
    let mut h = x.to_vec();
    for layer in 0..last {
        let a = affine(params, layer, &h);
        inputs.push(std::mem::replace(&mut h, a.into_iter().map(f64::tanh).collect()));
    }
    let pre_norm = affine(params, last, &h);
    inputs.push(h);
    let len = norm(&pre_norm);
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::DegenerateFeature);
    }
    let output = pre_norm.iter().map(|v| v / len).collect();
    Ok(ForwardTrace { inputs, pre_norm, pre_norm_len: len, output })
}

/// Unit-norm feature of one input.
pub fn forward(params: &BackboneParams, x: &[f64]) -> Result<Vec<f64>> {
    forward_trace(params, x).map(|t| t.output)
}

/// Gradients of `upstream · forward(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackboneGradients {
    /// Same layout as [`BackboneParams::values`].
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

/// Reverse pass through a recorded trace, accumulating parameter gradients
/// into `param_grad`. Returns the gradient with respect to the input.
pub fn backward_into(
    params: &BackboneParams,
    trace: &ForwardTrace,
    upstream: &[f64],
    param_grad: &mut [f64],
) -> Result<Vec<f64>> {
    let z = &trace.output;
    if upstream.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), actual: upstream.len() });
    }
    if param_grad.len() != params.values.len() {
        return Err(Error::DimensionMismatch { expected: params.values.len(), actual: param_grad.len() });
    }
    let radial = dot(z, upstream);
    let mut g: Vec<f64> = upstream.iter().zip(z).map(|(u, zi)| (u - zi * radial) / trace.pre_norm_len).collect();

    for layer in (0..params.num_layers()).rev() {
        let l = params.layout[layer];
        let input = &trace.inputs[layer];
        for (o, go) in g.iter().enumerate() {
            let row = &mut param_grad[l.weight_offset + o * l.inputs..l.weight_offset + (o + 1) * l.inputs];
            for (gw, xi) in row.iter_mut().zip(input) {
                *gw += go * xi;
            }
            param_grad[l.bias_offset + o] += go;
        }
        let w = &params.values[l.weight_offset..l.bias_offset];
        let mut gin = vec![0.0; l.inputs];
        for (row, go) in w.chunks(l.inputs).zip(&g) {
            for (gi, wi) in gin.iter_mut().zip(row) {
                *gi += go * wi;
            }
        }
        if layer > 0 {
            // `input` is tanh of the previous pre-activation.
            for (gi, h) in gin.iter_mut().zip(input) {
                *gi *= 1.0 - h * h;
            }
        }
        g = gin;
    }
    Ok(g)
}

pub fn backward(params: &BackboneParams, x: &[f64], upstream: &[f64]) -> Result<BackboneGradients> {
    let trace = forward_trace(params, x)?;
    let mut grad = vec![0.0; params.values.len()];
    let input = backward_into(params, &trace, upstream, &mut grad)?;
    Ok(BackboneGradients { params: grad, input })
}

fn check_pair(z: &[f64], w: &[f64]) -> Result<()> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: w.len(), actual: z.len() });
    }
    Ok(())
}

/// Alignment loss `½ (z·w − 1)²`.
pub fn lipm_loss(z: &[f64], w: &[f64]) -> Result<f64> {
    check_pair(z, w)?;
    let r = dot(z, w) - 1.0;
    Ok(0.5 * r * r)
}

/// `∇_z ½ (z·w − 1)² = (z·w − 1) w`.
pub fn lipm_grad(z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    check_pair(z, w)?;
    let r = dot(z, w) - 1.0;
    Ok(w.iter().map(|wi| r * wi).collect())
}

/// Alignment loss of one labelled feature against its assigned prototype.
pub fn sample_lipm_loss<P: PrototypeSource + ?Sized>(
    prototypes: &P,
    assignment: &AssignmentMapping,
    z: &[f64],
    label: usize,
) -> Result<f64> {
    lipm_loss(z, prototypes.prototype(assignment.prototype_of(label)))
}

/// Unit features with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBatch {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl FeatureBatch {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: features.len(), actual: labels.len() });
        }
        for (i, z) in features.iter().enumerate() {
            let n = norm(z);
            if (n - 1.0).abs() > INPUT_UNIT_TOLERANCE {
                return Err(Error::NotUnitNorm { column: i, norm: n });
            }
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

fn check_ce_inputs<P: PrototypeSource + ?Sized>(z: &[f64], y: usize, w: &P, a: &AssignmentMapping) -> Result<()> {
    if z.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), actual: z.len() });
    }
    if a.len() != w.count() {
        return Err(Error::ClassCountMismatch { dataset: a.len(), prototypes: w.count() });
    }
    if y >= a.len() {
        return Err(Error::IndexOutOfRange { index: y, count: a.len() });
    }
    Ok(())
}

/// Logits `z·w_{A(k)}` indexed by class label `k`.
pub fn class_logits<P: PrototypeSource + ?Sized>(z: &[f64], w: &P, a: &AssignmentMapping) -> Vec<f64> {
    (0..a.len()).map(|k| dot(z, w.prototype(a.prototype_of(k)))).collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `−log softmax(logits)[y]` with max subtraction.
pub fn cross_entropy(logits: &[f64], y: usize) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    lse - logits[y]
}

/// Softmax cross-entropy of one feature over all assigned prototypes.
pub fn sample_ce_loss<P: PrototypeSource + ?Sized>(z: &[f64], y: usize, w: &P, a: &AssignmentMapping) -> Result<f64> {
    check_ce_inputs(z, y, w, a)?;
    Ok(cross_entropy(&class_logits(z, w, a), y))
}

/// Mean softmax cross-entropy over a batch.
pub fn psc_ce_loss<P: PrototypeSource + ?Sized>(batch: &FeatureBatch, w: &P, a: &AssignmentMapping) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for (z, &y) in batch.features.iter().zip(&batch.labels) {
        total += sample_ce_loss(z, y, w, a)?;
    }
    Ok(total / batch.len() as f64)
}

/// Class-probability rows of a batch.
pub fn batch_probabilities<P: PrototypeSource + ?Sized>(
    batch: &FeatureBatch,
    w: &P,
    a: &AssignmentMapping,
) -> Result<Vec<Vec<f64>>> {
    batch
        .features
        .iter()
        .zip(&batch.labels)
        .map(|(z, &y)| {
            check_ce_inputs(z, y, w, a)?;
            Ok(softmax(&class_logits(z, w, a)))
        })
        .collect()
}

/// Attraction to the own prototype and repulsion from the others.
#[derive(Debug, Clone, PartialEq)]
pub struct PullPush {
    pub pull: Vec<f64>,
    pub push: Vec<f64>,
}

impl PullPush {
    pub fn total(&self) -> Vec<f64> {
        self.pull.iter().zip(&self.push).map(|(a, b)| a + b).collect()
    }
}

/// Split of the per-sample CE gradient with respect to the feature:
/// `pull = −(1 − p_y) w_{A(y)}`, `push = Σ_{j≠y} p_j w_{A(j)}`.
pub fn psc_ce_feature_grad<P: PrototypeSource + ?Sized>(
    z: &[f64],
    y: usize,
    w: &P,
    a: &AssignmentMapping,
) -> Result<PullPush> {
    check_ce_inputs(z, y, w, a)?;
    let p = softmax(&class_logits(z, w, a));
    let dim = z.len();
    let mut pull = vec![0.0; dim];
    let mut push = vec![0.0; dim];
    for (k, pk) in p.iter().enumerate() {
        let wk = w.prototype(a.prototype_of(k));
        if k == y {
            pull.iter_mut().zip(wk).for_each(|(g, x)| *g -= (1.0 - pk) * x);
        } else {
            push.iter_mut().zip(wk).for_each(|(g, x)| *g += pk * x);
        }
    }
    Ok(PullPush { pull, push })
}

/// Split of the CE gradient with respect to the prototype of class `class`.
///
/// `attract = −Σ_{i: y_i = class} (1 − p_{i,class}) z_i` and
/// `repel = Σ_{i: y_i ≠ class} p_{i,class} z_i`. Both are sums over the batch;
/// the gradient of the mean batch loss is `(attract + repel) / B`.
pub fn psc_prototype_grad(batch: &FeatureBatch, probs: &[Vec<f64>], class: usize) -> Result<PullPush> {
    if probs.len() != batch.len() {
        return Err(Error::DimensionMismatch { expected: batch.len(), actual: probs.len() });
    }
    let dim = batch.features.first().map_or(0, Vec::len);
    let mut attract = vec![0.0; dim];
    let mut repel = vec![0.0; dim];
    for (i, ((z, &y), row)) in batch.features.iter().zip(&batch.labels).zip(probs).enumerate() {
        let sum: f64 = row.iter().sum();
        if class >= row.len() || (sum - 1.0).abs() > 1e-9 || row.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::MalformedProbabilities(i));
        }
        let p = row[class];
        if y == class {
            attract.iter_mut().zip(z).for_each(|(g, x)| *g -= (1.0 - p) * x);
        } else {
            repel.iter_mut().zip(z).for_each(|(g, x)| *g += p * x);
        }
    }
    Ok(PullPush { pull: attract, push: repel })
}

/// Momentum SGD over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Sgd {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Vec<f64>,
}

impl Sgd {
    pub fn new(learning_rate: f64, momentum: f64, size: usize) -> Self {
        Self { learning_rate, momentum, velocity: vec![0.0; size] }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for ((p, v), g) in params.iter_mut().zip(&mut self.velocity).zip(grad) {
            *v = self.momentum * *v + g;
            *p -= self.learning_rate * *v;
        }
    }
}

fn tensor_line(name: &str, shape: &str, values: &[f64]) -> String {
    let vals: Vec<String> = values.iter().map(|&x| fmt_f64(x)).collect();
    format!("{name} {shape} {}\n", vals.join(","))
}

/// Serializes the backbone and, for the learnable baseline, its classifier.
pub fn format_checkpoint(params: &BackboneParams, classifier: Option<&LinearClassifier>) -> String {
    let dims: Vec<String> = params.layer_dims.iter().map(usize::to_string).collect();
    let mut out = format!("# protosphere-checkpoint v1 dims={}\n", dims.join(","));
    for (k, l) in params.layout.iter().enumerate() {
        out += &tensor_line(&format!("layer{k}.weight"), &format!("{}x{}", l.outputs, l.inputs), params.layer_weights(k));
        out += &tensor_line(&format!("layer{k}.bias"), &l.outputs.to_string(), params.layer_bias(k));
    }
    if let Some(c) = classifier {
        out += &tensor_line("classifier.weight", &format!("{}x{}", c.count, c.dim), &c.data);
    }
    out
}

pub fn save_checkpoint(path: &Path, params: &BackboneParams, classifier: Option<&LinearClassifier>) -> Result<()> {
    textio::write_string(path, &format_checkpoint(params, classifier))
}

pub fn load_checkpoint(path: &Path) -> Result<(BackboneParams, Option<LinearClassifier>)> {
    let text = textio::read_to_string(path)?;
    let mut lines = text.lines();
    let fields = textio::parse_header(path, lines.next(), "protosphere-checkpoint")?;
    let raw_dims: String = textio::header_field(path, &fields, "dims")?;
    let dims = raw_dims
        .split(',')
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::MalformedHeader { path: path.into(), reason: format!("invalid dims `{raw_dims}`") })?;
    let (layout, _) = layout_for(&dims)?;
    let mut weights = vec![None; layout.len()];
    let mut biases = vec![None; layout.len()];
    let mut classifier = None;
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let lineno = k + 2;
        let parse_err = |reason: String| Error::Parse { path: path.into(), line: lineno, reason };
        let mut parts = line.split(' ');
        let (Some(name), Some(shape), Some(body), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err("expected `name shape values`".into()));
        };
        let values = body.split(',').map(|t| textio::parse_f64(path, lineno, t)).collect::<Result<Vec<_>>>()?;
        let shape_len: usize = shape
            .split('x')
            .map(|s| s.parse::<usize>())
            .product::<std::result::Result<usize, _>>()
            .map_err(|_| parse_err(format!("invalid shape `{shape}`")))?;
        if shape_len != values.len() {
            return Err(Error::WidthMismatch { path: path.into(), line: lineno, expected: shape_len, found: values.len() });
        }
        if name == "classifier.weight" {
            let d = *dims.last().expect("validated");
            if values.len() % d != 0 {
                return Err(parse_err("classifier width does not match output dimension".into()));
            }
            classifier = Some(LinearClassifier::new(d, values.len() / d, values)?);
            continue;
        }
        let (layer, kind) = name
            .strip_prefix("layer")
            .and_then(|r| r.split_once('.'))
            .and_then(|(idx, kind)| Some((idx.parse::<usize>().ok()?, kind)))
            .ok_or_else(|| parse_err(format!("unknown tensor `{name}`")))?;
        if layer >= layout.len() {
            return Err(parse_err(format!("tensor `{name}` beyond declared depth")));
        }
        match kind {
            "weight" => weights[layer] = Some(values),
            "bias" => biases[layer] = Some(values),
            _ => return Err(parse_err(format!("unknown tensor `{name}`"))),
        }
    }
    let missing = |what: &str, k: usize| Error::MalformedHeader { path: path.into(), reason: format!("missing layer{k}.{what}") };
    let weights = weights.into_iter().enumerate().map(|(k, w)| w.ok_or_else(|| missing("weight", k))).collect::<Result<Vec<_>>>()?;
    let biases = biases.into_iter().enumerate().map(|(k, b)| b.ok_or_else(|| missing("bias", k))).collect::<Result<Vec<_>>>()?;
    Ok((BackboneParams::from_layers(&dims, &weights, &biases)?, classifier))
}
