//! Acceptance gate: one line per criterion, non-zero exit if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{
    identity_backbone, median, numeric_gradient, permutations, relative_error, rng, separable_fixture,
    spherical_fixture, unit_vector, SPHERICAL_CLASSES, SPHERICAL_DIM,
};
use protosphere::assignment::{format_assignment, load_assignment, save_assignment};
use protosphere::cli::bench_assign_one;
use protosphere::data::{format_dataset, load_dataset, save_dataset};
use protosphere::hypersphere::{
    angular_gaps, format_prototypes, load_prototypes, save_prototypes, uniformity_gradient_columns,
    uniformity_loss_columns,
};
use protosphere::model::{
    backward, batch_probabilities, format_checkpoint, forward, lipm_grad, lipm_loss, load_checkpoint,
    psc_ce_feature_grad, psc_prototype_grad, sample_ce_loss, save_checkpoint, LinearClassifier,
};
use protosphere::trainer::{read_metrics_log, write_metrics_line, InitialAssignment, LossMode, Trainer};
use protosphere::{
    apply_long_tail, circle_prototypes, estimate_prototypes, generate_gaussian_mixture, geometry_report,
    hungarian_solve, AssignmentMapping, BackboneParams, CostMatrix, FeatureBatch, LongTailSpec, MixtureConfig,
    PrototypeMatrix, TrainConfig, UniformityConfig,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn etf_convergence() -> Outcome {
    let start = Instant::now();
    let cfg = UniformityConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, c) in [(32, 10), (16, 8), (100, 100)] {
        let w = estimate_prototypes(d, c, &cfg).unwrap();
        let r = geometry_report(&w);
        let mut ok = r.etf_gap <= 0.02;
        if (d, c) == (100, 100) {
            ok &= (r.max_cos - 0.0).abs() <= 0.02 && (r.min_cos + 0.01).abs() <= 0.02;
        }
        pass &= ok;
        parts.push(format!(
            "({d},{c}) etf_gap={:.5} max_cos={:.4} min_cos={:.4} {}",
            r.etf_gap,
            r.max_cos,
            r.min_cos,
            if ok { "ok" } else { "MISS" }
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    outcome(pass, format!("{}; {secs:.1}s", parts.join("; ")))
}

fn closed_form_circle() -> Outcome {
    let cfg = UniformityConfig::default();
    let w = estimate_prototypes(2, 8, &cfg).unwrap();
    let (angles, gaps) = angular_gaps(&w).unwrap();
    let quarter = std::f64::consts::FRAC_PI_4;
    let worst_gap = gaps.iter().map(|g| (g - quarter).abs()).fold(0.0, f64::max);
    // Rotate the closed form onto the first optimized angle and compare sorted angles.
    let (closed_angles, _) = angular_gaps(&circle_prototypes(8).unwrap()).unwrap();
    let offset = angles[0] - closed_angles[0];
    let worst_angle = angles
        .iter()
        .zip(&closed_angles)
        .map(|(a, b)| {
            let d = (a - b - offset).rem_euclid(std::f64::consts::TAU);
            d.min(std::f64::consts::TAU - d)
        })
        .fold(0.0, f64::max);
    outcome(
        worst_gap <= 0.02 && worst_angle <= 0.02,
        format!("max |gap - pi/4| = {worst_gap:.2e} rad, max angle offset vs closed form = {worst_angle:.2e} rad"),
    )
}

fn degenerate_apad() -> Outcome {
    let (mut apad_diff, mut ratio) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let random = geometry_report(&PrototypeMatrix::random(10, 100, seed).unwrap());
        let cfg = UniformityConfig { seed, ..UniformityConfig::default() };
        let optimized = geometry_report(&estimate_prototypes(10, 100, &cfg).unwrap());
        apad_diff.push((random.apad - optimized.apad).abs());
        ratio.push(optimized.min_pairwise_distance / random.min_pairwise_distance);
    }
    let (d, r) = (median(apad_diff), median(ratio));
    outcome(
        d <= 0.05 && r >= 1.2,
        format!("median |APAD random - optimized| = {d:.4} rad, median min-distance ratio optimized/random = {r:.2}"),
    )
}

/// Log-likelihood objective over class representatives, minimized over bijections.
fn full_objective(sim: &[Vec<f64>], a: &[usize]) -> f64 {
    let c = sim.len();
    -(0..c)
        .map(|j| {
            let lse = (0..c).map(|k| sim[j][a[k]].exp()).sum::<f64>().ln();
            sim[j][a[j]] - lse
        })
        .sum::<f64>()
}

fn assignment_oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut checked = 0;
    for c in 2..=7 {
        let perms = permutations(c);
        for s in 0..100u64 {
            let mut r = rng(1000 * c as u64 + s);
            let entries: Vec<f64> = (0..c * c).map(|_| r.random_range(-1.0..1.0)).collect();
            let cost = CostMatrix::new(c, entries).unwrap();
            let a = hungarian_solve(&cost).unwrap();
            let best = perms
                .iter()
                .map(|p| cost.total(&AssignmentMapping::new(p.clone()).unwrap()))
                .fold(f64::INFINITY, f64::min);
            if cost.total(&a) != best {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    let mut objective_misses = 0;
    let mut worst_gap: f64 = 0.0;
    for c in 2..=6 {
        let perms = permutations(c);
        for s in 0..100u64 {
            let w = PrototypeMatrix::random(3, c, 7000 + 100 * c as u64 + s).unwrap();
            let mut r = rng(9000 + 100 * c as u64 + s);
            let q: Vec<Vec<f64>> = (0..c).map(|_| unit_vector(&mut r, 3)).collect();
            let sim: Vec<Vec<f64>> =
                q.iter().map(|z| w.columns().map(|wk| z.iter().zip(wk).map(|(a, b)| a * b).sum()).collect()).collect();
            let reps = protosphere::ClassRepresentatives::from_columns(&q).unwrap();
            let cost = protosphere::build_cost_matrix(&reps, &w).unwrap();
            let a = hungarian_solve(&cost).unwrap();
            let (best_perm, best) = perms
                .iter()
                .map(|p| (p, full_objective(&sim, p)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            let gap = full_objective(&sim, a.as_slice()) - best;
            worst_gap = worst_gap.max(gap);
            // The brute-force minimizer must also be a linear-assignment optimum.
            let best_cost = cost.total(&AssignmentMapping::new(best_perm.clone()).unwrap());
            if best_cost != cost.total(&a) || gap > 1e-12 {
                objective_misses += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && objective_misses == 0 && secs < 30.0,
        format!(
            "{checked} matrices, {mismatches} cost mismatches; full-objective misses {objective_misses} (worst gap {worst_gap:.1e}); {secs:.2}s"
        ),
    )
}

fn gradient_suite() -> Outcome {
    const N: u64 = 25;
    let mut worst = [0.0f64; 5];
    for s in 0..N {
        let mut r = rng(50 + s);
        let (d, c) = (r.random_range(2..=8), r.random_range(2..=12));

        let w = PrototypeMatrix::random(d, c, s).unwrap();
        let all: Vec<usize> = (0..c).collect();
        let analytic = uniformity_gradient_columns(w.as_slice(), d, &all, 2.0).unwrap();
        let numeric = numeric_gradient(w.as_slice(), 1e-6, |x| uniformity_loss_columns(x, d, &all, 2.0).unwrap());
        worst[0] = worst[0].max(relative_error(&analytic, &numeric));

        let z = unit_vector(&mut r, d);
        let target = unit_vector(&mut r, d);
        let numeric = numeric_gradient(&z, 1e-6, |zz| lipm_loss(zz, &target).unwrap());
        worst[1] = worst[1].max(relative_error(&lipm_grad(&z, &target).unwrap(), &numeric));

        let p = r.random_range(2..=5);
        let mut params = BackboneParams::init(&[p, r.random_range(2..=6), d], s).unwrap();
        params.values_mut().iter_mut().for_each(|v| *v = r.random_range(-1.0..1.0));
        let x: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
        let upstream = unit_vector(&mut r, d);
        let g = backward(&params, &x, &upstream).unwrap();
        let numeric = numeric_gradient(params.values(), 1e-6, |v| {
            let mut q = params.clone();
            q.values_mut().copy_from_slice(v);
            forward(&q, &x).unwrap().iter().zip(&upstream).map(|(a, b)| a * b).sum()
        });
        worst[2] = worst[2].max(relative_error(&g.params, &numeric));

        let a = AssignmentMapping::random(c, s);
        let y = r.random_range(0..c);
        let split = psc_ce_feature_grad(&z, y, &w, &a).unwrap();
        let numeric = numeric_gradient(&z, 1e-6, |zz| sample_ce_loss(zz, y, &w, &a).unwrap());
        worst[3] = worst[3].max(relative_error(&split.total(), &numeric));

        let b = r.random_range(3..=10);
        let feats: Vec<Vec<f64>> = (0..b).map(|_| unit_vector(&mut r, d)).collect();
        let labels: Vec<usize> = (0..b).map(|_| r.random_range(0..c)).collect();
        let batch = FeatureBatch::new(feats.clone(), labels.clone()).unwrap();
        let data: Vec<f64> = (0..d * c).map(|_| r.random_range(-1.0..1.0)).collect();
        let cl = LinearClassifier::new(d, c, data.clone()).unwrap();
        let id = AssignmentMapping::identity(c);
        let probs = batch_probabilities(&batch, &cl, &id).unwrap();
        let class = r.random_range(0..c);
        let split = psc_prototype_grad(&batch, &probs, class).unwrap();
        let column = data[class * d..(class + 1) * d].to_vec();
        let numeric = numeric_gradient(&column, 1e-6, |col| {
            let mut perturbed = data.clone();
            perturbed[class * d..(class + 1) * d].copy_from_slice(col);
            let cl = LinearClassifier::new(d, c, perturbed).unwrap();
            feats.iter().zip(&labels).map(|(z, &y)| sample_ce_loss(z, y, &cl, &id).unwrap()).sum()
        });
        worst[4] = worst[4].max(relative_error(&split.total(), &numeric));
    }
    let names = ["uniformity", "lipm", "backbone", "ce feature (pull+push)", "ce prototype (attract+repel)"];
    let detail: Vec<String> = names.iter().zip(&worst).map(|(n, e)| format!("{n} {e:.1e}")).collect();
    outcome(worst.iter().all(|&e| e < 1e-6), format!("{N} instances each, worst relative error: {}", detail.join(", ")))
}

fn dynamic_assignment_benefit() -> Outcome {
    let start = Instant::now();
    let w = estimate_prototypes(SPHERICAL_DIM, SPHERICAL_CLASSES, &UniformityConfig::default()).unwrap();
    let (mut dynamic, mut frozen, mut fixed_ce) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..5u64 {
        let fx = spherical_fixture(seed);
        let base = TrainConfig { epochs: 100, learning_rate: 1.0, hidden_layers: vec![64], seed, ..TrainConfig::default() };
        let arms = [
            (&mut dynamic, TrainConfig { ..base.clone() }),
            (
                &mut frozen,
                TrainConfig {
                    dynamic_assignment: false,
                    initial_assignment: InitialAssignment::Random(seed),
                    ..base.clone()
                },
            ),
            (&mut fixed_ce, TrainConfig { loss_mode: LossMode::FixedCe, dynamic_assignment: false, ..base.clone() }),
        ];
        for (acc, cfg) in arms {
            let params = BackboneParams::init(&[SPHERICAL_DIM, 64, SPHERICAL_DIM], seed).unwrap();
            let state = Trainer::with_params(&fx.train, &fx.eval, &w, &cfg, params).unwrap().run(|_| Ok(())).unwrap();
            acc.push(state.history.last().unwrap().eval_accuracy);
        }
    }
    let (md, mf, mc) = (median(dynamic), median(frozen), median(fixed_ce));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        md >= mf && md >= mc && secs < 300.0,
        format!("median accuracy dynamic {md:.3}, frozen random {mf:.3}, fixed-W CE {mc:.3}; {secs:.1}s"),
    )
}

fn churn_decay() -> Outcome {
    let fx = separable_fixture();
    let epochs = 12;
    let cfg = TrainConfig { epochs, learning_rate: 0.01, hidden_layers: vec![], ..TrainConfig::default() };
    let state = Trainer::with_params(&fx.data, &fx.data, &fx.w, &cfg, identity_backbone(3)).unwrap().run(|_| Ok(())).unwrap();
    let tail = &state.history[epochs - epochs / 4..];
    let trace: Vec<String> = state.history.iter().map(|r| format!("{:.3}", r.assignment_churn)).collect();
    outcome(
        tail.iter().all(|r| r.assignment_churn == 0.0) && state.history.iter().all(|r| r.assignment_churn >= 0.0),
        format!("churn by epoch [{}]", trace.join(" ")),
    )
}

fn timing_scaling() -> Outcome {
    let sizes = [250, 500, 1000];
    let times: Vec<f64> = sizes.iter().map(|&c| bench_assign_one(c, 4, 0).unwrap()).collect();
    let ratios = [times[1] / times[0], times[2] / times[1]];
    let pass = times.iter().all(|t| t.is_finite()) && ratios.iter().all(|&r| r <= 10.0) && times[2] < 30_000.0;
    outcome(
        pass,
        format!(
            "mean ms over 4 runs: c=250 {:.2}, c=500 {:.2}, c=1000 {:.2}; ratios {:.2}, {:.2}",
            times[0], times[1], times[2], ratios[0], ratios[1]
        ),
    )
}

fn long_tail_exactness() -> Outcome {
    let data = generate_gaussian_mixture(&MixtureConfig::new(10, 4, 100, 0.1, 3)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for mu in [0.005, 0.01, 0.02] {
        let spec = LongTailSpec { imbalance_factor: mu, max_per_class: 100 };
        let counts = apply_long_tail(&data, &spec, 1).unwrap().per_class_counts();
        let expected_tail = (100.0 * mu).round() as usize;
        pass &= counts[0] == 100 && counts[9] == expected_tail;
        parts.push(format!("mu={mu}: n0={} n9={} (expected {expected_tail})", counts[0], counts[9]));
    }
    outcome(pass, parts.join("; "))
}

fn run_cli(dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_protosphere")).current_dir(dir).args(args).output().unwrap();
    (o.status.code().unwrap_or(-1), o.stdout)
}

fn files_under(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Runs the full command sequence in `dir`, returning every file produced plus
/// the stdout of commands without file artifacts.
fn cli_session(dir: &Path) -> (Vec<(String, Vec<u8>)>, Vec<u8>, bool) {
    let mut ok = true;
    let mut printed = Vec::new();
    let mut step = |args: &[&str], keep_stdout: bool| {
        let (code, out) = run_cli(dir, args);
        ok &= code == 0;
        if keep_stdout {
            printed.extend(out);
        }
    };
    step(&["prototypes", "--d", "3", "--c", "6", "--seed", "4", "--out", "w.txt"], true);
    step(&["prototypes", "--d", "2", "--c", "6", "--closed-form", "--out", "circle.txt"], true);
    step(
        &[
            "gen-data", "--classes", "6", "--input-dim", "4", "--per-class", "30", "--imbalance", "0.2", "--holdout",
            "0.25", "--eval-out", "eval.txt", "--seed", "8", "--out", "train.txt",
        ],
        true,
    );
    step(&["train", "--data", "train.txt", "--eval-data", "eval.txt", "--prototypes", "w.txt", "--out", "run", "--epochs", "5", "--seed", "2"], true);
    step(&["train", "--data", "train.txt", "--prototypes", "w.txt", "--out", "psc", "--epochs", "3", "--loss", "psc_ce"], true);
    step(&["eval", "--checkpoint", "run/checkpoint.txt", "--prototypes", "w.txt", "--assignment", "run/assignment.txt", "--data", "eval.txt"], true);
    step(&["inspect", "w.txt"], true);
    step(&["inspect", "run/assignment.txt"], true);
    // Timings differ run to run; only the file set and resolved config are compared.
    step(&["bench-assign", "--c", "20,40", "--repeats", "2", "--out", "bench.csv"], false);
    let files = files_under(dir)
        .into_iter()
        .map(|(name, bytes)| {
            if name == "bench.csv" {
                let sizes: Vec<u8> = String::from_utf8(bytes)
                    .unwrap()
                    .lines()
                    .map(|l| l.split(',').next().unwrap().to_string() + "\n")
                    .collect::<String>()
                    .into_bytes();
                (name, sizes)
            } else {
                (name, bytes)
            }
        })
        .collect();
    (files, printed, ok)
}

fn determinism_and_persistence() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (files_a, out_a, ok_a) = cli_session(a.path());
    let (files_b, out_b, ok_b) = cli_session(b.path());
    let identical = files_a == files_b && out_a == out_b;

    // Save, load and save again must reproduce the bytes and the values.
    let dir = a.path();
    let mut broken: Vec<&str> = Vec::new();
    let mut check = |ok: bool, name: &'static str| {
        if !ok {
            broken.push(name);
        }
    };
    let (w, info) = load_prototypes(&dir.join("w.txt")).unwrap();
    save_prototypes(&dir.join("w2.txt"), &w, info).unwrap();
    check(std::fs::read(dir.join("w.txt")).unwrap() == std::fs::read(dir.join("w2.txt")).unwrap(), "prototype bytes");
    check(load_prototypes(&dir.join("w2.txt")).unwrap().0 == w, "prototype values");
    check(format_prototypes(&w, info) == std::fs::read_to_string(dir.join("w.txt")).unwrap(), "prototype format");

    let data = load_dataset(&dir.join("train.txt")).unwrap();
    save_dataset(&dir.join("train2.txt"), &data).unwrap();
    check(load_dataset(&dir.join("train2.txt")).unwrap() == data, "dataset values");
    check(std::fs::read_to_string(dir.join("train.txt")).unwrap() == format_dataset(&data), "dataset bytes");

    for run in ["run", "psc"] {
        let (params, cl) = load_checkpoint(&dir.join(run).join("checkpoint.txt")).unwrap();
        save_checkpoint(&dir.join(format!("{run}_ckpt2.txt")), &params, cl.as_ref()).unwrap();
        check(load_checkpoint(&dir.join(format!("{run}_ckpt2.txt"))).unwrap() == (params.clone(), cl.clone()), "checkpoint values");
        check(
            std::fs::read_to_string(dir.join(run).join("checkpoint.txt")).unwrap() == format_checkpoint(&params, cl.as_ref()),
            "checkpoint bytes",
        );
    }

    let assignment = load_assignment(&dir.join("run/assignment.txt")).unwrap();
    save_assignment(&dir.join("a2.txt"), &assignment).unwrap();
    check(load_assignment(&dir.join("a2.txt")).unwrap() == assignment, "assignment values");
    check(std::fs::read_to_string(dir.join("run/assignment.txt")).unwrap() == format_assignment(&assignment), "assignment bytes");

    let log = read_metrics_log(&dir.join("run/metrics.jsonl")).unwrap();
    let mut rewritten = Vec::new();
    for rec in &log {
        write_metrics_line(&mut rewritten, rec).unwrap();
    }
    check(rewritten == std::fs::read(dir.join("run/metrics.jsonl")).unwrap(), "metrics log");
    let lossless = broken.is_empty();

    outcome(
        ok_a && ok_b && identical && lossless,
        format!(
            "{} artifacts across two sessions identical: {identical}; all commands exited 0: {}; lossy round trips: [{}]",
            files_a.len(),
            ok_a && ok_b,
            broken.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ETF convergence of prototype estimation", etf_convergence),
        ("closed-form circle agreement", closed_form_circle),
        ("degenerate APAD of random prototypes", degenerate_apad),
        ("assignment oracle equivalence", assignment_oracle),
        ("gradient suite", gradient_suite),
        ("dynamic-assignment benefit at d << c", dynamic_assignment_benefit),
        ("assignment-churn decay", churn_decay),
        ("assignment timing scaling", timing_scaling),
        ("long-tail profile exactness", long_tail_exactness),
        ("determinism and persistence", determinism_and_persistence),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", k + 1, if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
