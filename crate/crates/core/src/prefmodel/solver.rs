//! Linear soft-margin ranking SVM trained by full-batch subgradient descent.
//!
//! Minimizes `½‖w‖² + C Σ max(0, 1 − l·w·(d_j − d_i))`. The solver works on
//! the equivalent objective divided by `C`, i.e. `λ/2 ‖w‖² + Σ hinge` with
//! `λ = 1/C`, stepping `1/(λt)` at iteration `t`. Subgradient iterates do not
//! decrease monotonically, so the iterate with the lowest objective is
//! returned. The schedule has no randomness; equal inputs give bit-equal
//! weights.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::constraints::Constraint;
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Soft-margin penalty.
    pub c: f64,
    /// Recorded with the model; the schedule itself is deterministic.
    pub seed: u64,
    pub max_iterations: u32,
    /// Converged once the objective changes by less than this between
    /// iterations.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { c: 1.0, seed: 0, max_iterations: 2000, tolerance: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: u32,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `½‖w‖² + C Σ hinge`, with the precomputed signed differences.
pub fn objective(weights: &[f64], diffs: &[Vec<f64>], c: f64) -> f64 {
    let hinge: f64 = diffs.iter().map(|d| (1.0 - dot(weights, d)).max(0.0)).sum();
    0.5 * dot(weights, weights) + c * hinge
}

/// Signed difference vectors `l·(d_j − d_i)`, one per constraint.
pub fn signed_differences(constraints: &[Constraint], rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    constraints
        .iter()
        .map(|con| {
            let sign = con.label.sign();
            rows[con.j].iter().zip(&rows[con.i]).map(|(hi, lo)| sign * (hi - lo)).collect()
        })
        .collect()
}

pub fn train(constraints: &[Constraint], rows: &[Vec<f64>], config: &TrainConfig) -> Result<Solution, ModelError> {
    if constraints.is_empty() {
        return Err(ModelError::NoConstraints);
    }
    if !(config.c.is_finite() && config.c > 0.0) {
        return Err(ModelError::InvalidPenalty);
    }
    let m = rows.first().map_or(0, Vec::len);
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(ModelError::SchemaMismatch { expected: m, got: row.len() });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFiniteInput { index: idx });
        }
    }
    for con in constraints {
        if con.i >= rows.len() || con.j >= rows.len() || con.i == con.j {
            return Err(ModelError::BadConstraint { i: con.i, j: con.j });
        }
    }

    let diffs = signed_differences(constraints, rows);
    let lambda = 1.0 / config.c;
    let mut w = vec![0.0; m];
    let mut grad = vec![0.0; m];
    let mut current = objective(&w, &diffs, config.c);
    let mut best = (current, w.clone());
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=config.max_iterations {
        iterations = t;
        for (g, wk) in grad.iter_mut().zip(&w) {
            *g = lambda * wk;
        }
        for d in &diffs {
            if dot(&w, d) < 1.0 {
                for (g, dk) in grad.iter_mut().zip(d) {
                    *g -= dk;
                }
            }
        }
        let step = 1.0 / (lambda * f64::from(t));
        for (wk, g) in w.iter_mut().zip(&grad) {
            *wk -= step * g;
        }
        let next = objective(&w, &diffs, config.c);
        if next < best.0 {
            best = (next, w.clone());
        }
        let change = libm::fabs(next - current);
        current = next;
        if change < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(Solution { weights: best.1, objective: best.0, converged, iterations })
}
