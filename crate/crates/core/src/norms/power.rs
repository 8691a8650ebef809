//! Lower bounds on `‖T‖_{L^p_X → L^p_X}` by nonlinear power iteration.
//!
//! From a unit iterate `f`: `u = Tf`, `z = J(u)` (norming functional of `u`),
//! `v = Tᵀz`, `f ← J*(v)` (norming element of `v` in the predual). The
//! objective `‖Tf‖` never decreases, and every value it takes is attained by
//! a unit vector, so the result is a lower bound on the operator norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operator::LinearMap;
use super::space::SpaceDescriptor;
use crate::error::{LabError, Result};
use crate::exec::{map_range, Execution};

/// Allowed relative decrease of the objective, attributed to rounding.
pub const MONOTONE_SLACK: f64 = 1e-12;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptions {
    /// Generated starts: one singular-vector start, one random sign pattern,
    /// the rest uniform random.
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Execution,
    /// Caller-supplied starts tried before the generated ones.
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iter: 500,
            tol: 1e-10,
            seed: 0,
            exec: Execution::default(),
            extra_starts: Vec::new(),
        }
    }
}

impl PowerOptions {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_starts(mut self, starts: Vec<Vec<f64>>) -> Self {
        self.extra_starts = starts;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub estimate: f64,
    /// Unit-norm field attaining `estimate`.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub starts: usize,
}

/// Per-restart seed, independent of scheduling.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_add((restart as u64).wrapping_add(1).wrapping_mul(SEED_STRIDE))
}

/// Top right singular vector by linear power iteration on `TᵀT`.
pub fn singular_start(op: &dyn LinearMap, dim: usize, seed: u64, iters: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.len() * dim)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    for _ in 0..iters {
        let y = op.apply_transpose(&op.apply(&x, dim), dim);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    x
}

fn generated_start(op: &dyn LinearMap, dim: usize, seed: u64, restart: usize) -> Vec<f64> {
    let s = restart_seed(seed, restart);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let len = op.len() * dim;
    match restart {
        0 => singular_start(op, dim, s, 60),
        1 => (0..len)
            .map(|_| if rng.random() { 1.0 } else { -1.0 })
            .collect(),
        _ => (0..len).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LabError::Numerical(format!("non-finite {what}")))
    }
}

/// Runs the ascent from one start.
pub fn ascend(
    op: &dyn LinearMap,
    space: &SpaceDescriptor,
    start: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<PowerResult> {
    let dim = space.dim();
    let len = op.len() * dim;
    if start.len() != len {
        return Err(LabError::DimensionMismatch {
            expected: len,
            actual: start.len(),
        });
    }
    check_finite(start, "start")?;
    let weight = 1.0 / op.len() as f64;
    let dual = space.dual();
    let zero = || PowerResult {
        estimate: 0.0,
        maximizer: vec![0.0; len],
        iterations: 0,
        converged: true,
        starts: 1,
    };
    let norm = space.field_norm(start, weight);
    if norm == 0.0 {
        return Ok(zero());
    }
    let mut f: Vec<f64> = start.iter().map(|v| v / norm).collect();
    let mut u = op.apply(&f, dim);
    let mut obj = space.field_norm(&u, weight);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let Some(z) = space.duality_map(&u, weight) else {
            converged = true;
            break;
        };
        let v = op.apply_transpose(&z, dim);
        check_finite(&v, "pull-back")?;
        let Some(next) = dual.duality_map(&v, weight) else {
            converged = true;
            break;
        };
        let next_u = op.apply(&next, dim);
        check_finite(&next_u, "image")?;
        let next_obj = space.field_norm(&next_u, weight);
        iterations += 1;
        if next_obj < obj - MONOTONE_SLACK * obj.max(1.0) {
            return Err(LabError::InternalConsistency(format!(
                "power iteration objective decreased from {obj} to {next_obj}"
            )));
        }
        let gain = next_obj - obj;
        if next_obj >= obj {
            f = next;
            u = next_u;
            obj = next_obj;
        }
        if gain <= tol * obj.max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(PowerResult {
        estimate: obj,
        maximizer: f,
        iterations,
        converged,
        starts: 1,
    })
}

/// Best ascent over the caller's starts and `opts.restarts` generated ones.
pub fn norm_p_lower(
    op: &dyn LinearMap,
    space: &SpaceDescriptor,
    opts: &PowerOptions,
) -> Result<PowerResult> {
    let extra = opts.extra_starts.len();
    let total = extra + opts.restarts;
    if total == 0 {
        return Err(LabError::MalformedInput("no starts requested".into()));
    }
    let dim = space.dim();
    let runs = map_range(opts.exec, total, |i| {
        let start = if i < extra {
            opts.extra_starts[i].clone()
        } else {
            generated_start(op, dim, opts.seed, i - extra)
        };
        ascend(op, space, &start, opts.max_iter, opts.tol)
    });
    let mut best: Option<PowerResult> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.estimate > b.estimate) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one start");
    best.starts = total;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::operator::OperatorMatrix;

    #[test]
    fn diagonal_norm() {
        let m = OperatorMatrix::diagonal("diag", &[2.0, 1.0, 1.0, 0.5]);
        for p in [1.5, 2.0, 4.0] {
            let s = SpaceDescriptor::scalar(p).unwrap();
            let r = norm_p_lower(&m, &s, &PowerOptions::default()).unwrap();
            assert!((r.estimate - 2.0).abs() < 1e-8, "p = {p}: {}", r.estimate);
        }
    }

    #[test]
    fn zero_operator() {
        let m = OperatorMatrix::diagonal("zero", &[0.0; 4]);
        let s = SpaceDescriptor::scalar(3.0).unwrap();
        assert_eq!(
            norm_p_lower(&m, &s, &PowerOptions::default())
                .unwrap()
                .estimate,
            0.0
        );
    }

    #[test]
    fn seeds_differ_per_restart() {
        assert_ne!(restart_seed(1, 0), restart_seed(1, 1));
        assert_ne!(restart_seed(1, 0), restart_seed(2, 0));
    }
}
