//! Performance-function abstraction and the built-in benchmark models,
//! including a small linear-elastic pin-jointed truss solver.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};

/// A deterministic mapping from an input point to one or more responses.
pub trait PerformanceModel: Sync {
    fn dimension(&self) -> usize;

    fn n_outputs(&self) -> usize {
        1
    }

    /// Evaluates the model; `out` has `n_outputs()` entries.
    fn evaluate(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), String>;

    /// Convenience for single-output models.
    fn evaluate_scalar(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let mut out = [0.0];
        self.evaluate(x, &mut out)?;
        Ok(out[0])
    }
}

/// Wraps a model with an atomic evaluation counter for cost accounting.
pub struct CountingModel<'a> {
    inner: &'a dyn PerformanceModel,
    count: AtomicU64,
}

impl<'a> CountingModel<'a> {
    pub fn new(inner: &'a dyn PerformanceModel) -> Self {
        CountingModel { inner, count: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl PerformanceModel for CountingModel<'_> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn n_outputs(&self) -> usize {
        self.inner.n_outputs()
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), String> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x, out)
    }
}

/// Closure-backed single-output model.
pub struct FnModel<F: Fn(&[f64]) -> f64 + Sync> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnModel<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        FnModel { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> PerformanceModel for FnModel<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), String> {
        out[0] = (self.f)(x);
        Ok(())
    }
}

/// Built-in benchmark models.
pub enum Builtin {
    /// `a1.x + a2.sin(x) + a3.cos(x) + x.M.x` over 15 variables.
    TrigPoly(TrigPolyData),
    /// `500 - (x1+x2)^3 + x1 - x2 - x3 + x1 x2 x3 - x4` over 4 variables.
    Cubic4,
    /// `1/(1000 + sum x_i) - 1/(1000 + 3 sqrt(N))` over N variables.
    GaussSum(usize),
    /// `x1 + 2 x2 + 2 x3 + x4 - 5 x5 - 5 x6` over 6 variables.
    Linear6,
    /// Six-bay, twenty-one-bar truss; outputs the displacement and stress
    /// margins `(y1, y2)`.
    Truss21(TrussModel),
}

/// Resolves a builtin by name. `dimension` applies to `gauss_sum` only.
pub fn builtin(name: &str, dimension: Option<usize>) -> Result<Builtin> {
    match name {
        "trig_poly" => Ok(Builtin::TrigPoly(TrigPolyData::seeded_default())),
        "cubic4" => Ok(Builtin::Cubic4),
        "gauss_sum" => Ok(Builtin::GaussSum(dimension.unwrap_or(10))),
        "linear6" => Ok(Builtin::Linear6),
        "truss21" => Ok(Builtin::Truss21(TrussModel::six_bay_default())),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

impl PerformanceModel for Builtin {
    fn dimension(&self) -> usize {
        match self {
            Builtin::TrigPoly(_) => 15,
            Builtin::Cubic4 => 4,
            Builtin::GaussSum(n) => *n,
            Builtin::Linear6 => 6,
            Builtin::Truss21(_) => 21,
        }
    }

    fn n_outputs(&self) -> usize {
        match self {
            Builtin::Truss21(_) => 2,
            _ => 1,
        }
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), String> {
        match self {
            Builtin::TrigPoly(data) => {
                out[0] = data.evaluate(x);
                Ok(())
            }
            Builtin::Cubic4 => {
                let s = x[0] + x[1];
                out[0] = 500.0 - s * s * s + x[0] - x[1] - x[2] + x[0] * x[1] * x[2] - x[3];
                Ok(())
            }
            Builtin::GaussSum(n) => {
                let sum: f64 = x.iter().sum();
                out[0] = 1.0 / (1000.0 + sum) - 1.0 / (1000.0 + 3.0 * (*n as f64).sqrt());
                Ok(())
            }
            Builtin::Linear6 => {
                out[0] = x[0] + 2.0 * x[1] + 2.0 * x[2] + x[3] - 5.0 * x[4] - 5.0 * x[5];
                Ok(())
            }
            Builtin::Truss21(truss) => {
                let solved = truss.solve(x).map_err(|e| e.to_string())?;
                out[0] = solved.y1;
                out[1] = solved.y2;
                Ok(())
            }
        }
    }
}

/// Coefficient data of the trigonometric-polynomial model.
///
/// The published coefficient values live in an external reference, so a
/// seeded default is generated here; real values can be supplied from a JSON
/// data file with fields `a1`, `a2`, `a3` (length 15) and `m` (15 x 15).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigPolyData {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: Vec<f64>,
    pub m: Vec<Vec<f64>>,
}

/// Seed of the default coefficient set; fixed so every build reproduces the
/// same model.
pub const TRIG_POLY_DEFAULT_SEED: u64 = 7;

impl TrigPolyData {
    /// Deterministic default coefficients: linear/trigonometric weights in
    /// [0.2, 1.2) and quadratic couplings in [-0.25, 0.25).
    pub fn seeded_default() -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(TRIG_POLY_DEFAULT_SEED);
        let mut draw_vec = |lo: f64, hi: f64| -> Vec<f64> {
            (0..15).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
        };
        let a1 = draw_vec(0.2, 1.2);
        let a2 = draw_vec(0.2, 1.2);
        let a3 = draw_vec(0.2, 1.2);
        let m = (0..15)
            .map(|_| (0..15).map(|_| -0.25 + 0.5 * rng.random::<f64>()).collect())
            .collect();
        TrigPolyData { a1, a2, a3, m }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a1.len() == 15
            && self.a2.len() == 15
            && self.a3.len() == 15
            && self.m.len() == 15
            && self.m.iter().all(|row| row.len() == 15);
        if ok {
            Ok(())
        } else {
            Err(Error::Config {
                field: "trig_poly".into(),
                message: "coefficient arrays must be length 15 (matrix 15 x 15)".into(),
            })
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..15 {
            acc += self.a1[i] * x[i] + self.a2[i] * x[i].sin() + self.a3[i] * x[i].cos();
        }
        for i in 0..15 {
            for j in 0..15 {
                acc += x[i] * self.m[i][j] * x[j];
            }
        }
        acc
    }
}

pub mod trig_oracle;
pub mod truss;

pub use truss::TrussModel;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_spot_values() {
        let cubic = builtin("cubic4", None).unwrap();
        assert_abs_diff_eq!(cubic.evaluate_scalar(&[0.0; 4]).unwrap(), 500.0, epsilon = 1e-12);

        let gs = builtin("gauss_sum", Some(10)).unwrap();
        let v = gs.evaluate_scalar(&[0.0; 10]).unwrap();
        let expect = 1.0 / 1000.0 - 1.0 / (1000.0 + 3.0 * 10f64.sqrt());
        assert_abs_diff_eq!(v, expect, epsilon = 1e-18);
        assert!((9.3e-6..9.5e-6).contains(&v));

        let lin = builtin("linear6", None).unwrap();
        let means = [120.0, 120.0, 120.0, 120.0, 50.0, 40.0];
        assert_abs_diff_eq!(lin.evaluate_scalar(&means).unwrap(), 270.0, epsilon = 1e-12);

        assert!(matches!(builtin("nope", None), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn counting_wrapper_counts() {
        let m = builtin("cubic4", None).unwrap();
        let counted = CountingModel::new(&m);
        let mut out = [0.0];
        for _ in 0..5 {
            counted.evaluate(&[1.0, 2.0, 3.0, 4.0], &mut out).unwrap();
        }
        assert_eq!(counted.count(), 5);
    }
}
