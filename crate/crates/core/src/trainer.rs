//! Alternating optimization of the backbone and the label-to-prototype
//! assignment.
//!
//! Each mini-batch updates the class representatives with the fresh features,
//! takes one SGD step on the alignment loss against the currently assigned
//! prototypes, and every `τ` steps the assignment is re-solved from the
//! representatives. The prototype matrix itself is never modified.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::assignment::{assignment_churn, reassign, AssignmentMapping, ClassRepresentatives};
use crate::data::VectorDataset;
use crate::error::{Error, Result};
use crate::hypersphere::PrototypeMatrix;
use crate::linalg::{dot, seeded_rng};
use crate::model::{
    backward_into, class_logits, cross_entropy, forward, forward_trace, lipm_grad, lipm_loss, psc_ce_feature_grad,
    softmax, BackboneParams, LinearClassifier, PrototypeSource, Sgd,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossMode {
    /// Alignment regression to fixed prototypes with dynamic assignment.
    #[default]
    Lipm,
    /// Learnable softmax classifier with identity assignment.
    PscCe,
    /// Softmax cross-entropy over the fixed prototypes.
    FixedCe,
}

impl FromStr for LossMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lipm" => Ok(Self::Lipm),
            "psc_ce" => Ok(Self::PscCe),
            "fixed_ce" => Ok(Self::FixedCe),
            other => Err(Error::InvalidParameter(format!("unknown loss `{other}` (lipm, psc_ce, fixed_ce)"))),
        }
    }
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lipm => "lipm",
            Self::PscCe => "psc_ce",
            Self::FixedCe => "fixed_ce",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassWeighting {
    #[default]
    None,
    InverseFrequency,
}

impl FromStr for ClassWeighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "inverse-frequency" => Ok(Self::InverseFrequency),
            other => Err(Error::InvalidParameter(format!("unknown class weighting `{other}` (none, inverse-frequency)"))),
        }
    }
}

impl fmt::Display for ClassWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::InverseFrequency => "inverse-frequency",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialAssignment {
    #[default]
    Identity,
    /// Seeded random permutation.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub sgd_momentum: f64,
    /// Momentum of the class representatives.
    pub alpha: f64,
    /// Assignment updates per epoch.
    pub tau_prime: f64,
    pub class_weighting: ClassWeighting,
    pub loss_mode: LossMode,
    /// When false the initial assignment is kept for the whole run.
    pub dynamic_assignment: bool,
    pub initial_assignment: InitialAssignment,
    /// Hidden widths between the input and the prototype dimension.
    pub hidden_layers: Vec<usize>,
    /// Record elapsed milliseconds per epoch; off keeps histories bitwise reproducible.
    pub record_wall_time: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.05,
            sgd_momentum: 0.9,
            alpha: 0.9,
            tau_prime: 1.0,
            class_weighting: ClassWeighting::None,
            loss_mode: LossMode::Lipm,
            dynamic_assignment: true,
            initial_assignment: InitialAssignment::Identity,
            hidden_layers: vec![32],
            record_wall_time: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.sgd_momentum) {
            return bad(format!("sgd momentum must be in [0, 1), got {}", self.sgd_momentum));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(self.tau_prime > 0.0 && self.tau_prime.is_finite()) {
            return bad(format!("tau' must be > 0, got {}", self.tau_prime));
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden widths must be positive".into());
        }
        Ok(())
    }

    /// Steps between reassignments: `max(1, floor(steps_per_epoch / τ′))`.
    pub fn reassign_interval(&self, steps_per_epoch: usize) -> usize {
        ((steps_per_epoch as f64 / self.tau_prime).floor() as usize).max(1)
    }
}

/// Per-epoch training summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub eval_accuracy: f64,
    pub assignment_churn: f64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: BackboneParams,
    pub assignment: AssignmentMapping,
    pub representatives: ClassRepresentatives,
    /// Learned classifier of the softmax baseline; `None` for fixed prototypes.
    pub classifier: Option<LinearClassifier>,
    pub epoch: usize,
    pub history: Vec<MetricsRecord>,
}

impl TrainState {
    /// Accuracy of this state on `dataset`.
    pub fn evaluate(&self, w: &PrototypeMatrix, dataset: &VectorDataset) -> Result<f64> {
        match &self.classifier {
            Some(c) => evaluate(&self.params, c, &self.assignment, dataset),
            None => evaluate(&self.params, w, &self.assignment, dataset),
        }
    }
}

/// Inverse-frequency weights normalized so a balanced dataset gets all ones.
pub fn class_weights(counts: &[usize]) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(k));
    }
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    Ok(counts.iter().map(|&n| mean / n as f64).collect())
}

/// Label with the most similar assigned prototype; ties go to the lower label.
pub fn predict<P: PrototypeSource + ?Sized>(z: &[f64], w: &P, a: &AssignmentMapping) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for label in 0..a.len() {
        let s = dot(z, w.prototype(a.prototype_of(label)));
        if s > best.1 {
            best = (label, s);
        }
    }
    best.0
}

/// Fraction of samples whose predicted label matches.
pub fn evaluate<P: PrototypeSource + ?Sized>(
    params: &BackboneParams,
    w: &P,
    a: &AssignmentMapping,
    dataset: &VectorDataset,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.output_dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), actual: params.output_dim() });
    }
    if a.len() != w.count() || dataset.class_count() != w.count() {
        return Err(Error::ClassCountMismatch { dataset: dataset.class_count(), prototypes: w.count() });
    }
    let mut correct = 0usize;
    for (x, &y) in dataset.samples().iter().zip(dataset.labels()) {
        if predict(&forward(params, x)?, w, a) == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Runs the full schedule, evaluating on the training data.
pub fn train(dataset: &VectorDataset, w: &PrototypeMatrix, config: &TrainConfig) -> Result<TrainState> {
    Trainer::new(dataset, w, config)?.run(|_| Ok(()))
}

/// Step-by-step driver; [`train`] is the one-shot wrapper.
pub struct Trainer<'a> {
    dataset: &'a VectorDataset,
    eval: &'a VectorDataset,
    w: &'a PrototypeMatrix,
    config: TrainConfig,
    state: TrainState,
    weights: Vec<f64>,
    sgd: Sgd,
    classifier_sgd: Option<Sgd>,
    rng: rand_chacha::ChaCha8Rng,
    interval: usize,
    global_step: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(dataset: &'a VectorDataset, w: &'a PrototypeMatrix, config: &TrainConfig) -> Result<Self> {
        let params = BackboneParams::init(&layer_dims(dataset, w, config), config.seed)?;
        Self::with_params(dataset, dataset, w, config, params)
    }

    /// Starts from given backbone parameters and evaluates on `eval`.
    pub fn with_params(
        dataset: &'a VectorDataset,
        eval: &'a VectorDataset,
        w: &'a PrototypeMatrix,
        config: &TrainConfig,
        params: BackboneParams,
    ) -> Result<Self> {
        config.validate()?;
        let c = w.count();
        if dataset.class_count() != c || eval.class_count() != c {
            return Err(Error::ClassCountMismatch { dataset: dataset.class_count(), prototypes: c });
        }
        let counts = dataset.per_class_counts();
        if let Some(k) = counts.iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass(k));
        }
        if params.input_dim() != dataset.input_dim() || eval.input_dim() != dataset.input_dim() {
            return Err(Error::DimensionMismatch { expected: dataset.input_dim(), actual: params.input_dim() });
        }
        if params.output_dim() != w.dim() {
            return Err(Error::DimensionMismatch { expected: w.dim(), actual: params.output_dim() });
        }
        let weights = match config.class_weighting {
            ClassWeighting::None => vec![1.0; c],
            ClassWeighting::InverseFrequency => class_weights(&counts)?,
        };
        let (assignment, classifier) = match config.loss_mode {
            LossMode::PscCe => {
                let seed = config.seed.wrapping_add(0x5eed);
                (AssignmentMapping::identity(c), Some(LinearClassifier::random(w.dim(), c, seed)))
            }
            _ => match config.initial_assignment {
                InitialAssignment::Identity => (AssignmentMapping::identity(c), None),
                InitialAssignment::Random(seed) => (AssignmentMapping::random(c, seed), None),
            },
        };
        let steps_per_epoch = dataset.len().div_ceil(config.batch_size);
        let sgd = Sgd::new(config.learning_rate, config.sgd_momentum, params.values().len());
        let classifier_sgd = classifier
            .as_ref()
            .map(|cl| Sgd::new(config.learning_rate, config.sgd_momentum, cl.as_slice().len()));
        Ok(Self {
            dataset,
            eval,
            w,
            interval: config.reassign_interval(steps_per_epoch),
            config: config.clone(),
            state: TrainState {
                params,
                assignment,
                representatives: ClassRepresentatives::new(w.dim(), c),
                classifier,
                epoch: 0,
                history: Vec::new(),
            },
            weights,
            sgd,
            classifier_sgd,
            rng: seeded_rng(config.seed),
            global_step: 0,
        })
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    /// Steps between reassignments.
    pub fn reassign_interval(&self) -> usize {
        self.interval
    }

    fn reassigns(&self) -> bool {
        self.config.dynamic_assignment && self.config.loss_mode != LossMode::PscCe
    }

    /// One SGD step on a mini-batch; returns the summed (weighted) loss.
    fn step(&mut self, batch: &[usize]) -> Result<f64> {
        let b = batch.len() as f64;
        let mode = self.config.loss_mode;
        let mut grad = vec![0.0; self.state.params.values().len()];
        let mut cls_grad = self.state.classifier.as_ref().map(|c| vec![0.0; c.as_slice().len()]);
        let traces = batch
            .iter()
            .map(|&i| forward_trace(&self.state.params, self.dataset.sample(i).0))
            .collect::<Result<Vec<_>>>()?;

        if mode != LossMode::PscCe {
            for (&i, trace) in batch.iter().zip(&traces) {
                let y = self.dataset.sample(i).1;
                self.state.representatives.update(y, trace.output(), self.config.alpha)?;
            }
        }

        let mut loss = 0.0;
        for (&i, trace) in batch.iter().zip(&traces) {
            let y = self.dataset.sample(i).1;
            let weight = self.weights[y];
            let z = trace.output();
            let a = &self.state.assignment;
            let upstream = match mode {
                LossMode::Lipm => {
                    let target = self.w.column(a.prototype_of(y));
                    loss += weight * lipm_loss(z, target)?;
                    lipm_grad(z, target)?
                }
                LossMode::FixedCe => {
                    loss += weight * cross_entropy(&class_logits(z, self.w, a), y);
                    psc_ce_feature_grad(z, y, self.w, a)?.total()
                }
                LossMode::PscCe => {
                    let cl = self.state.classifier.as_ref().expect("baseline has a classifier");
                    let probs = softmax(&class_logits(z, cl, a));
                    loss += weight * cross_entropy(&class_logits(z, cl, a), y);
                    // ∂CE/∂w_k = (p_k − [k = y]) z, the attract/repel split summed.
                    let g = cls_grad.as_mut().expect("baseline has a classifier");
                    let dim = z.len();
                    for (k, pk) in probs.iter().enumerate() {
                        let coef = weight * (pk - if k == y { 1.0 } else { 0.0 }) / b;
                        for (gk, zk) in g[k * dim..(k + 1) * dim].iter_mut().zip(z) {
                            *gk += coef * zk;
                        }
                    }
                    psc_ce_feature_grad(z, y, cl, a)?.total()
                }
            };
            let scaled: Vec<f64> = upstream.iter().map(|g| g * weight / b).collect();
            backward_into(&self.state.params, trace, &scaled, &mut grad)?;
        }

        self.sgd.step(self.state.params.values_mut(), &grad);
        if let (Some(cl), Some(opt), Some(g)) = (self.state.classifier.as_mut(), self.classifier_sgd.as_mut(), cls_grad) {
            opt.step(&mut cl.data, &g);
        }
        self.global_step += 1;
        if self.reassigns() && self.global_step % self.interval == 0 && self.state.representatives.all_seen() {
            self.state.assignment = reassign(&self.state.representatives, self.w)?;
        }
        Ok(loss)
    }

    /// Trains one epoch and returns its metrics.
    pub fn run_epoch(&mut self) -> Result<MetricsRecord> {
        let started = self.config.record_wall_time.then(Instant::now);
        let before = self.state.assignment.clone();
        let mut order: Vec<usize> = (0..self.dataset.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        for batch in order.chunks(self.config.batch_size) {
            total += self.step(batch)?;
        }
        let record = MetricsRecord {
            epoch: self.state.epoch,
            train_loss: total / self.dataset.len() as f64,
            eval_accuracy: self.state.evaluate(self.w, self.eval)?,
            assignment_churn: assignment_churn(&before, &self.state.assignment)?,
            wall_time_ms: started.map_or(0, |t| t.elapsed().as_millis() as u64),
        };
        self.state.epoch += 1;
        self.state.history.push(record.clone());
        Ok(record)
    }

    /// Runs all remaining epochs, calling `on_epoch` after each.
    pub fn run(mut self, mut on_epoch: impl FnMut(&MetricsRecord) -> Result<()>) -> Result<TrainState> {
        while self.state.epoch < self.config.epochs {
            let record = self.run_epoch()?;
            on_epoch(&record)?;
        }
        Ok(self.state)
    }
}

fn layer_dims(dataset: &VectorDataset, w: &PrototypeMatrix, config: &TrainConfig) -> Vec<usize> {
    let mut dims = vec![dataset.input_dim()];
    dims.extend(&config.hidden_layers);
    dims.push(w.dim());
    dims
}

/// Appends one JSON record per line.
pub fn write_metrics_line(out: &mut impl Write, record: &MetricsRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

pub fn read_metrics_log(path: &Path) -> Result<Vec<MetricsRecord>> {
    let text = crate::textio::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse { path: path.into(), line: k + 1, reason: e.to_string() })
        })
        .collect()
}
