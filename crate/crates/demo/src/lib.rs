//! WebAssembly bindings behind `www/index.html`.
//!
//! The page exposes three operations: stepping the prototype optimizer on the
//! circle or sphere, matching draggable class points to the prototypes, and
//! reading the geometry diagnostics of the current configuration.

use protosphere::hypersphere::{geometry_report, UniformityConfig, UniformityOptimizer};
use protosphere::{build_cost_matrix, hungarian_solve, ClassRepresentatives, PrototypeMatrix};
use wasm_bindgen::prelude::*;

fn js_err(e: protosphere::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Projected gradient descent on the uniformity objective, one step per call.
#[wasm_bindgen]
pub struct Estimator {
    inner: UniformityOptimizer,
}

#[wasm_bindgen]
impl Estimator {
    #[wasm_bindgen(constructor)]
    pub fn new(dim: usize, count: usize, learning_rate: f64, temperature: f64, seed: u64) -> Result<Estimator, JsError> {
        let cfg = UniformityConfig { learning_rate, temperature, seed, ..UniformityConfig::default() };
        Ok(Estimator { inner: UniformityOptimizer::new(dim, count, cfg).map_err(js_err)? })
    }

    /// Runs `n` iterations and returns the loss after the last one.
    pub fn step(&mut self, n: usize) -> f64 {
        for _ in 0..n {
            self.inner.step();
        }
        self.inner.loss()
    }

    pub fn iteration(&self) -> usize {
        self.inner.iteration()
    }

    /// Column-major coordinates, `dim` values per prototype.
    pub fn coordinates(&self) -> Vec<f64> {
        self.inner.matrix().as_slice().to_vec()
    }

    pub fn report(&self) -> String {
        geometry_report(&self.inner.matrix()).to_string()
    }
}

/// Geometry diagnostics of `count` unit columns packed column-major.
#[wasm_bindgen]
pub fn describe(dim: usize, coordinates: &[f64]) -> Result<String, JsError> {
    Ok(geometry_report(&matrix(dim, coordinates)?).to_string())
}

fn matrix(dim: usize, coordinates: &[f64]) -> Result<PrototypeMatrix, JsError> {
    if dim == 0 || coordinates.len() % dim != 0 {
        return Err(JsError::new("coordinate count is not a multiple of the dimension"));
    }
    let cols: Vec<Vec<f64>> = coordinates.chunks(dim).map(<[f64]>::to_vec).collect();
    PrototypeMatrix::from_columns(cols).map_err(js_err)
}

/// Optimal label-to-prototype matching: `result[j]` is the prototype index
/// for class point `j`. Class points are normalized before matching.
#[wasm_bindgen]
pub fn match_classes(dim: usize, class_points: &[f64], prototypes: &[f64]) -> Result<Vec<u32>, JsError> {
    let w = matrix(dim, prototypes)?;
    let mut q = ClassRepresentatives::new(dim, w.count());
    let points: Vec<&[f64]> = class_points.chunks(dim).collect();
    if points.len() != w.count() || class_points.len() % dim != 0 {
        return Err(JsError::new("need exactly one class point per prototype"));
    }
    for (j, p) in points.iter().enumerate() {
        let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(JsError::new("class point at the origin has no direction"));
        }
        let unit: Vec<f64> = p.iter().map(|x| x / n).collect();
        q.update(j, &unit, 0.0).map_err(js_err)?;
    }
    let a = hungarian_solve(&build_cost_matrix(&q, &w).map_err(js_err)?).map_err(js_err)?;
    Ok(a.as_slice().iter().map(|&k| k as u32).collect())
}
