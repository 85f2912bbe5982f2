//! Command-line front end.
//!
//! Every command resolves its settings in three layers: explicit flags win
//! over entries of the optional `--config` file, which win over built-in
//! defaults. The fully resolved settings are written next to each artifact so
//! a run can be replayed with `--config <that file>`.
//!
//! Exit codes: 0 success, 1 runtime or IO failure, 2 usage or validation error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::assignment::{hungarian_solve, load_assignment, save_assignment, AssignmentMapping, CostMatrix};
use crate::data::{
    apply_long_tail, generate_gaussian_mixture, load_dataset, save_dataset, LongTailSpec, MixtureConfig, VectorDataset,
};
use crate::error::Error;
use crate::hypersphere::{
    angular_gaps, circle_prototypes, estimate_prototypes, geometry_report, load_prototypes, save_prototypes,
    PrototypeFileInfo, PrototypeMatrix, UniformityConfig,
};
use crate::linalg::seeded_rng;
use crate::model::{load_checkpoint, save_checkpoint, BackboneParams};
use crate::trainer::{
    evaluate, write_metrics_line, ClassWeighting, InitialAssignment, LossMode, TrainConfig, Trainer,
};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Library failures while reading or writing artifacts are runtime errors.
fn runtime(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Library failures from rejected settings are usage errors.
fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "protosphere", version, about = "Fixed hyperspherical prototypes with dynamic label assignment")]
struct Cli {
    /// key=value file providing defaults for any flag of the chosen command.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate prototypes on the unit sphere and print their geometry.
    Prototypes(PrototypesArgs),
    /// Train a backbone against fixed prototypes.
    Train(TrainArgs),
    /// Accuracy of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Print diagnostics for a prototype or assignment file.
    Inspect(InspectArgs),
    /// Time the assignment solver on random cost matrices.
    BenchAssign(BenchArgs),
    /// Generate a Gaussian-mixture dataset, optionally long-tailed.
    GenData(GenDataArgs),
}

#[derive(Args, Debug)]
struct PrototypesArgs {
    #[arg(long = "d")]
    dim: Option<usize>,
    #[arg(long = "c")]
    count: Option<usize>,
    /// Equal slices of the unit circle (requires --d 2).
    #[arg(long)]
    closed_form: bool,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Kernel temperature.
    #[arg(long)]
    t: Option<f64>,
    /// Prototypes sampled per iteration (default: all).
    #[arg(long)]
    subset: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Held-out dataset for per-epoch accuracy (default: the training data).
    #[arg(long)]
    eval_data: Option<PathBuf>,
    #[arg(long)]
    prototypes: Option<PathBuf>,
    /// Output directory for checkpoint, assignment, metrics and config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    /// Momentum of the class representatives.
    #[arg(long)]
    alpha: Option<f64>,
    /// Reassignments per epoch.
    #[arg(long)]
    tau_prime: Option<f64>,
    /// lipm, psc_ce or fixed_ce.
    #[arg(long)]
    loss: Option<LossMode>,
    /// none or inverse-frequency.
    #[arg(long)]
    class_weighting: Option<ClassWeighting>,
    /// Keep the initial assignment for the whole run.
    #[arg(long)]
    freeze_assignment: bool,
    /// identity or random.
    #[arg(long)]
    initial_assignment: Option<String>,
    /// Comma-separated hidden widths; empty for none.
    #[arg(long)]
    hidden: Option<String>,
    /// random, or identity (needs no hidden layers and matching input and prototype dimension).
    #[arg(long)]
    backbone_init: Option<String>,
    /// Record wall-clock milliseconds in the metrics log.
    #[arg(long)]
    wall_time: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    prototypes: Option<PathBuf>,
    /// Assignment file; identity when omitted.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InspectArgs {
    path: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated problem sizes.
    #[arg(long = "c")]
    sizes: Option<String>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; always echoed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    input_dim: Option<usize>,
    #[arg(long)]
    per_class: Option<usize>,
    /// Standard deviation of each cluster around its unit mean.
    #[arg(long)]
    spread: Option<f64>,
    /// Minimum angle between cluster means, in radians.
    #[arg(long)]
    min_angle: Option<f64>,
    /// Ratio of smallest to largest class; omit for balanced data.
    #[arg(long)]
    imbalance: Option<f64>,
    /// Largest class size under --imbalance (default: --per-class).
    #[arg(long)]
    max_per_class: Option<usize>,
    /// Fraction written to --eval-out instead of --out.
    #[arg(long)]
    holdout: Option<f64>,
    #[arg(long)]
    eval_out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Merges flags, config-file entries and defaults while recording the result.
struct Resolver {
    file: BTreeMap<String, String>,
    source: Option<PathBuf>,
    resolved: Vec<(String, String)>,
}

impl Resolver {
    fn new(config: Option<&Path>) -> CliResult<Self> {
        let Some(path) = config else {
            return Ok(Self { file: BTreeMap::new(), source: None, resolved: Vec::new() });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
        let mut file = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key=value, got `{line}`", path.display(), k + 1))
            })?;
            file.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { file, source: Some(path.to_path_buf()), resolved: Vec::new() })
    }

    fn from_file<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.file.get(key).filter(|s| !s.is_empty()) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                let src = self.source.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
                CliError::Usage(format!("{src}: invalid value `{raw}` for `{key}`"))
            }),
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((key.to_string(), value));
    }

    fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T> {
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        self.record(key, v.as_ref().map(|v| v.to_string()).unwrap_or_default());
        Ok(v)
    }

    fn required<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> CliResult<T> {
        self.optional(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required setting `--{key}`")))
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        let v = match flag {
            Some(p) => Some(p),
            None => self.file.get(key).filter(|s| !s.is_empty()).map(PathBuf::from),
        };
        self.record(key, v.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        Ok(v)
    }

    fn required_path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<PathBuf> {
        self.path(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required setting `--{key}`")))
    }

    /// A switch is on when the flag is given or the file says `true`.
    fn switch(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let v = flag || self.from_file::<bool>(key)?.unwrap_or(false);
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Rejects config entries that no setting of this command consumed.
    fn finish(&self) -> CliResult<()> {
        for key in self.file.keys() {
            if !self.resolved.iter().any(|(k, _)| k == key) {
                return Err(CliError::Usage(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    fn render(&self, command: &str) -> String {
        let mut out = format!("# protosphere resolved config: {command}\n");
        for (k, v) in &self.resolved {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    fn write(&self, command: &str, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.render(command))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

/// `<artifact>.config` next to a single-file artifact.
fn config_path_for(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".config");
    PathBuf::from(name)
}

/// Parses argv (including the program name) and runs the chosen command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut res = Resolver::new(cli.config.as_deref())?;
    match cli.command {
        Command::Prototypes(a) => cmd_prototypes(&mut res, a),
        Command::Train(a) => cmd_train(&mut res, a),
        Command::Eval(a) => cmd_eval(&mut res, a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::BenchAssign(a) => cmd_bench_assign(&mut res, a),
        Command::GenData(a) => cmd_gen_data(&mut res, a),
    }
}

fn cmd_prototypes(res: &mut Resolver, a: PrototypesArgs) -> CliResult<()> {
    let defaults = UniformityConfig::default();
    let dim = res.required("d", a.dim)?;
    let count = res.required("c", a.count)?;
    let closed_form = res.switch("closed-form", a.closed_form)?;
    let cfg = UniformityConfig {
        learning_rate: res.value("lr", a.lr, defaults.learning_rate)?,
        iterations: res.value("iterations", a.iterations, defaults.iterations)?,
        temperature: res.value("t", a.t, defaults.temperature)?,
        subset_size: res.optional("subset", a.subset)?,
        seed: res.value("seed", a.seed, defaults.seed)?,
    };
    let out = res.required_path("out", a.out)?;
    res.finish()?;

    if dim == 0 || count == 0 {
        return Err(CliError::Usage("--d and --c must be positive".into()));
    }
    let w = if closed_form {
        if dim != 2 {
            return Err(CliError::Usage(format!("--closed-form requires --d 2, got --d {dim}")));
        }
        circle_prototypes(count).map_err(usage)?
    } else {
        cfg.validate(count).map_err(usage)?;
        estimate_prototypes(dim, count, &cfg).map_err(usage)?
    };
    let info = PrototypeFileInfo { temperature: cfg.temperature, seed: cfg.seed };
    save_prototypes(&out, &w, info).map_err(runtime)?;
    res.write("prototypes", &config_path_for(&out))?;
    print_prototype_report(&w);
    Ok(())
}

fn print_prototype_report(w: &PrototypeMatrix) {
    println!("d={} c={}", w.dim(), w.count());
    println!("{}", geometry_report(w));
    if w.dim() == 2 && w.count() >= 2 {
        if let Ok((_, gaps)) = angular_gaps(w) {
            let deg: Vec<String> = gaps.iter().map(|g| format!("{:.2}", g.to_degrees())).collect();
            println!("angular gaps (deg): {}", deg.join(" "));
        }
    }
}

fn parse_hidden(raw: &str) -> CliResult<Vec<usize>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("invalid hidden width `{s}`"))))
        .collect()
}

fn load_dataset_checked(path: &Path) -> CliResult<VectorDataset> {
    load_dataset(path).map_err(runtime)
}

/// Diagnoses a dataset and prototype file that cannot be used together.
fn check_compatible(data: &VectorDataset, data_path: &Path, w: &PrototypeMatrix, w_path: &Path) -> CliResult<()> {
    if data.class_count() != w.count() {
        return Err(CliError::Usage(format!(
            "incompatible artifacts: dataset {} has c={} classes but prototype file {} has c={} prototypes",
            data_path.display(),
            data.class_count(),
            w_path.display(),
            w.count()
        )));
    }
    Ok(())
}

fn cmd_train(res: &mut Resolver, a: TrainArgs) -> CliResult<()> {
    let d = TrainConfig::default();
    let data_path = res.required_path("data", a.data)?;
    let eval_path = res.path("eval-data", a.eval_data)?;
    let w_path = res.required_path("prototypes", a.prototypes)?;
    let out_dir = res.required_path("out", a.out)?;
    let default_hidden: Vec<String> = d.hidden_layers.iter().map(|h| h.to_string()).collect();
    let seed = res.value("seed", a.seed, d.seed)?;
    let initial = res.value("initial-assignment", a.initial_assignment, "identity".to_string())?;
    let cfg = TrainConfig {
        epochs: res.value("epochs", a.epochs, d.epochs)?,
        batch_size: res.value("batch-size", a.batch_size, d.batch_size)?,
        learning_rate: res.value("lr", a.lr, d.learning_rate)?,
        sgd_momentum: res.value("momentum", a.momentum, d.sgd_momentum)?,
        alpha: res.value("alpha", a.alpha, d.alpha)?,
        tau_prime: res.value("tau-prime", a.tau_prime, d.tau_prime)?,
        loss_mode: res.value("loss", a.loss, d.loss_mode)?,
        class_weighting: res.value("class-weighting", a.class_weighting, d.class_weighting)?,
        dynamic_assignment: !res.switch("freeze-assignment", a.freeze_assignment)?,
        initial_assignment: match initial.as_str() {
            "identity" => InitialAssignment::Identity,
            "random" => InitialAssignment::Random(seed),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown initial assignment `{other}` (expected identity or random)"
                )))
            }
        },
        hidden_layers: parse_hidden(&res.value("hidden", a.hidden, default_hidden.join(","))?)?,
        record_wall_time: res.switch("wall-time", a.wall_time)?,
        seed,
    };
    let backbone_init = res.value("backbone-init", a.backbone_init, "random".to_string())?;
    res.finish()?;
    cfg.validate().map_err(usage)?;

    let train_set = load_dataset_checked(&data_path)?;
    let eval_set = match &eval_path {
        Some(p) => load_dataset_checked(p)?,
        None => train_set.clone(),
    };
    let (w, _) = load_prototypes(&w_path).map_err(runtime)?;
    check_compatible(&train_set, &data_path, &w, &w_path)?;
    if let Some(p) = &eval_path {
        check_compatible(&eval_set, p, &w, &w_path)?;
        if eval_set.input_dim() != train_set.input_dim() {
            return Err(CliError::Usage(format!(
                "incompatible artifacts: dataset {} has p={} but evaluation dataset {} has p={}",
                data_path.display(),
                train_set.input_dim(),
                p.display(),
                eval_set.input_dim()
            )));
        }
    }

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    res.write("train", &out_dir.join("config.txt"))?;

    let mut dims = vec![train_set.input_dim()];
    dims.extend(&cfg.hidden_layers);
    dims.push(w.dim());
    let params = match backbone_init.as_str() {
        "random" => BackboneParams::init(&dims, cfg.seed).map_err(usage)?,
        "identity" if dims.len() == 2 && dims[0] == dims[1] => BackboneParams::identity(dims[0]),
        "identity" => {
            return Err(CliError::Usage(format!(
                "identity backbone needs --hidden \"\" and equal dimensions, got layers {dims:?}"
            )))
        }
        other => return Err(CliError::Usage(format!("unknown backbone init `{other}` (expected random or identity)"))),
    };
    let trainer = Trainer::with_params(&train_set, &eval_set, &w, &cfg, params).map_err(usage)?;

    let metrics_path = out_dir.join("metrics.jsonl");
    let file = File::create(&metrics_path).map_err(|e| runtime(Error::io(&metrics_path, e)))?;
    let mut log = BufWriter::new(file);
    let state = trainer
        .run(|rec| {
            write_metrics_line(&mut log, rec).map_err(|e| Error::io(&metrics_path, e))?;
            println!(
                "epoch {:>4}  loss {:.6}  accuracy {:.4}  churn {:.4}",
                rec.epoch, rec.train_loss, rec.eval_accuracy, rec.assignment_churn
            );
            Ok(())
        })
        .map_err(runtime)?;
    log.flush().map_err(|e| runtime(Error::io(&metrics_path, e)))?;

    save_checkpoint(&out_dir.join("checkpoint.txt"), &state.params, state.classifier.as_ref()).map_err(runtime)?;
    save_assignment(&out_dir.join("assignment.txt"), &state.assignment).map_err(runtime)?;
    let final_acc = state.history.last().map(|r| r.eval_accuracy).unwrap_or(0.0);
    println!("final accuracy {final_acc:.2}");
    Ok(())
}

fn cmd_eval(res: &mut Resolver, a: EvalArgs) -> CliResult<()> {
    let ckpt_path = res.required_path("checkpoint", a.checkpoint)?;
    let w_path = res.required_path("prototypes", a.prototypes)?;
    let a_path = res.path("assignment", a.assignment)?;
    let data_path = res.required_path("data", a.data)?;
    res.finish()?;

    let (params, classifier) = load_checkpoint(&ckpt_path).map_err(runtime)?;
    let (w, _) = load_prototypes(&w_path).map_err(runtime)?;
    let data = load_dataset_checked(&data_path)?;
    check_compatible(&data, &data_path, &w, &w_path)?;
    let assignment = match &a_path {
        Some(p) => load_assignment(p).map_err(runtime)?,
        None => AssignmentMapping::identity(w.count()),
    };
    if assignment.len() != w.count() {
        return Err(CliError::Usage(format!(
            "incompatible artifacts: assignment {} covers {} classes but prototype file {} has c={}",
            a_path.as_deref().unwrap_or(Path::new("")).display(),
            assignment.len(),
            w_path.display(),
            w.count()
        )));
    }
    if params.input_dim() != data.input_dim() || params.output_dim() != w.dim() {
        return Err(CliError::Usage(format!(
            "incompatible artifacts: checkpoint {} maps {} -> {} but dataset {} has p={} and prototype file {} has d={}",
            ckpt_path.display(),
            params.input_dim(),
            params.output_dim(),
            data_path.display(),
            data.input_dim(),
            w_path.display(),
            w.dim()
        )));
    }
    let acc = match &classifier {
        Some(cl) => evaluate(&params, cl, &assignment, &data),
        None => evaluate(&params, &w, &assignment, &data),
    }
    .map_err(usage)?;
    println!("accuracy {acc:.4}");
    Ok(())
}

fn cmd_inspect(a: InspectArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", a.path.display())))?;
    let header = text.lines().next().unwrap_or("");
    if header.contains("protosphere-prototypes") {
        let (w, _) = load_prototypes(&a.path).map_err(runtime)?;
        print_prototype_report(&w);
    } else if header.contains("protosphere-assignment") {
        let mapping = load_assignment(&a.path).map_err(runtime)?;
        println!("{}", mapping.summary());
    } else {
        return Err(CliError::Runtime(format!(
            "{}: not a prototype or assignment file",
            a.path.display()
        )));
    }
    Ok(())
}

/// Mean milliseconds per solve on seeded uniform costs in [-1, 1].
pub fn bench_assign_one(c: usize, repeats: usize, seed: u64) -> crate::error::Result<f64> {
    use rand::Rng;
    let mut rng = seeded_rng(seed ^ c as u64);
    let entries: Vec<f64> = (0..c * c).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let cost = CostMatrix::new(c, entries)?;
    let mut total = 0.0;
    for _ in 0..repeats {
        let start = Instant::now();
        let a = hungarian_solve(&cost)?;
        total += start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(a);
    }
    Ok(total / repeats as f64)
}

fn cmd_bench_assign(res: &mut Resolver, a: BenchArgs) -> CliResult<()> {
    let raw = res.value("c", a.sizes, "250,500,1000".to_string())?;
    let repeats = res.value("repeats", a.repeats, 4)?;
    let seed = res.value("seed", a.seed, 0)?;
    let out = res.path("out", a.out)?;
    res.finish()?;

    let sizes: Vec<usize> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("invalid size `{s}`"))))
        .collect::<CliResult<_>>()?;
    if sizes.is_empty() || sizes.iter().any(|&c| c < 2) {
        return Err(CliError::Usage("--c needs sizes >= 2".into()));
    }
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be >= 1".into()));
    }
    let mut csv = String::from("c,mean_ms\n");
    for &c in &sizes {
        let ms = bench_assign_one(c, repeats, seed).map_err(runtime)?;
        let line = format!("{c},{ms:.3}\n");
        print!("{line}");
        csv.push_str(&line);
    }
    if let Some(path) = out {
        std::fs::write(&path, &csv).map_err(|e| runtime(Error::io(&path, e)))?;
        res.write("bench-assign", &config_path_for(&path))?;
    }
    Ok(())
}

fn cmd_gen_data(res: &mut Resolver, a: GenDataArgs) -> CliResult<()> {
    let classes = res.required("classes", a.classes)?;
    let input_dim = res.required("input-dim", a.input_dim)?;
    let per_class = res.value("per-class", a.per_class, 100)?;
    let spread = res.value("spread", a.spread, 0.1)?;
    let seed = res.value("seed", a.seed, 0)?;
    let mut mix = MixtureConfig::new(classes, input_dim, per_class, spread, seed);
    mix.min_angle = res.value("min-angle", a.min_angle, mix.min_angle)?;
    let imbalance = res.optional("imbalance", a.imbalance)?;
    let max_per_class = res.value("max-per-class", a.max_per_class, per_class)?;
    let holdout = res.optional("holdout", a.holdout)?;
    let eval_out = res.path("eval-out", a.eval_out)?;
    let out = res.required_path("out", a.out)?;
    res.finish()?;

    if holdout.is_some() != eval_out.is_some() {
        return Err(CliError::Usage("--holdout and --eval-out must be given together".into()));
    }
    let mut data = generate_gaussian_mixture(&mix).map_err(usage)?;
    if let Some(mu) = imbalance {
        let spec = LongTailSpec { imbalance_factor: mu, max_per_class };
        data = apply_long_tail(&data, &spec, seed).map_err(usage)?;
    }
    if let (Some(frac), Some(eval_path)) = (holdout, &eval_out) {
        let (train_set, eval_set) = data.split(frac, seed).map_err(usage)?;
        save_dataset(eval_path, &eval_set).map_err(runtime)?;
        res.write("gen-data", &config_path_for(eval_path))?;
        data = train_set;
    }
    save_dataset(&out, &data).map_err(runtime)?;
    res.write("gen-data", &config_path_for(&out))?;
    println!("wrote {} samples ({} classes) to {}", data.len(), data.class_count(), out.display());
    println!("per-class counts: {:?}", data.per_class_counts());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_list_parsing() {
        assert_eq!(parse_hidden("32,16").unwrap(), vec![32, 16]);
        assert_eq!(parse_hidden("").unwrap(), Vec::<usize>::new());
        assert!(parse_hidden("a").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut res = Resolver::new(None).unwrap();
        res.file.insert("lr".into(), "0.5".into());
        res.file.insert("epochs".into(), "7".into());
        assert_eq!(res.value("lr", Some(0.2), 0.1).unwrap(), 0.2);
        assert_eq!(res.value("epochs", None, 30usize).unwrap(), 7);
        assert_eq!(res.value("seed", None, 3u64).unwrap(), 3);
        assert!(res.finish().is_ok());
        assert_eq!(res.render("x"), "# protosphere resolved config: x\nlr=0.2\nepochs=7\nseed=3\n");
    }

    #[test]
    fn unknown_and_invalid_file_keys_are_usage_errors() {
        let mut res = Resolver::new(None).unwrap();
        res.file.insert("bogus".into(), "1".into());
        assert!(matches!(res.finish(), Err(CliError::Usage(_))));
        res.file.insert("lr".into(), "fast".into());
        assert!(matches!(res.value("lr", None, 0.1), Err(CliError::Usage(_))));
    }

    #[test]
    fn config_path_appends_suffix() {
        assert_eq!(config_path_for(Path::new("a/w.txt")), PathBuf::from("a/w.txt.config"));
    }
}
