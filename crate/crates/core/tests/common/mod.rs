#![allow(dead_code)]

use protosphere::hypersphere::{estimate_prototypes, PrototypeMatrix, UniformityConfig};
use protosphere::model::BackboneParams;
use protosphere::{generate_gaussian_mixture, AssignmentMapping, MixtureConfig, VectorDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Central differences of a scalar function of a flat vector.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Unit-vector dataset where every sample of class `y` sits exactly on
/// prototype `hidden[y]`, so an identity backbone separates it perfectly once
/// the assignment equals `hidden`.
pub struct SeparableFixture {
    pub w: PrototypeMatrix,
    pub data: VectorDataset,
    pub hidden: AssignmentMapping,
}

pub fn separable_fixture() -> SeparableFixture {
    let (dim, classes, per_class) = (3, 8, 12);
    let w = estimate_prototypes(dim, classes, &UniformityConfig::default()).unwrap();
    let hidden = AssignmentMapping::random(classes, 7);
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for y in 0..classes {
        for _ in 0..per_class {
            samples.push(w.column(hidden.prototype_of(y)).to_vec());
            labels.push(y);
        }
    }
    let data = VectorDataset::new(dim, classes, samples, labels).unwrap();
    SeparableFixture { w, data, hidden }
}

pub fn identity_backbone(dim: usize) -> BackboneParams {
    BackboneParams::identity(dim)
}

/// Sixteen Gaussian clusters on the 2-sphere, split into train and holdout.
pub struct SphericalFixture {
    pub train: VectorDataset,
    pub eval: VectorDataset,
}

pub const SPHERICAL_CLASSES: usize = 16;
pub const SPHERICAL_DIM: usize = 3;

pub fn spherical_fixture(seed: u64) -> SphericalFixture {
    let cfg = MixtureConfig::new(SPHERICAL_CLASSES, SPHERICAL_DIM, 60, 0.15, 100 + seed);
    let full = generate_gaussian_mixture(&cfg).unwrap();
    let (train, eval) = full.split(0.25, seed).unwrap();
    SphericalFixture { train, eval }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
