//! The norm estimates `h_p`, `s_p`, `m_p` and the `s_p / h_p` comparison.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::{materialize, CircleHilbert, OperatorKind};
use super::power::{norm_p_lower, restart_seed, PowerOptions, PowerResult};
use super::space::SpaceDescriptor;
use crate::circle::compute_c0;
use crate::dyadic::SignPattern;
use crate::error::{LabError, Result};
use crate::exec::Execution;

pub const DEFAULT_SLACK: f64 = 1.10;

/// Profiles `|cot(θ/2)|^a` and `sgn(cot(θ/2))|cot(θ/2)|^a` sampled at cell
/// midpoints, with `a` just below `1/p`. The circle Hilbert transform nearly
/// attains its `L^p` norm on functions of this shape.
pub fn singular_profiles(n: usize, p: f64) -> Vec<Vec<f64>> {
    let a = 0.9 / p;
    let cot: Vec<f64> = (0..n)
        .map(|i| {
            let theta = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            1.0 / (theta / 2.0).tan()
        })
        .collect();
    vec![
        cot.iter().map(|c| c.abs().powf(a)).collect(),
        cot.iter().map(|c| c.signum() * c.abs().powf(a)).collect(),
    ]
}

/// Places a scalar field in component 0 of a `dim`-vector field.
pub fn embed_scalar(field: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; field.len() * dim];
    for (i, v) in field.iter().enumerate() {
        out[i * dim] = *v;
    }
    out
}

/// Refines a cell-major field on `2^{K+1}` cells to `2^{K+2}` cells.
pub fn refine_cells(field: &[f64], dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * field.len());
    for cell in field.chunks_exact(dim) {
        out.extend_from_slice(cell);
        out.extend_from_slice(cell);
    }
    out
}

fn scalar_starts(starts: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    starts.iter().map(|s| embed_scalar(s, dim)).collect()
}

/// Lower bound on the circle Hilbert transform on `L^p_X` of an `n`-point grid.
pub fn estimate_hp(space: &SpaceDescriptor, n: usize, opts: &PowerOptions) -> Result<PowerResult> {
    let h = CircleHilbert::new(n)?;
    let mut opts = opts.clone();
    let profiles = singular_profiles(n, space.p());
    opts.extra_starts
        .extend(scalar_starts(&profiles, space.dim()));
    norm_p_lower(&h, space, &opts)
}

/// Lower bound on `S₀` on `L^p_X` at depth `depth`.
pub fn estimate_sp(
    space: &SpaceDescriptor,
    depth: usize,
    opts: &PowerOptions,
) -> Result<PowerResult> {
    let m = materialize(&OperatorKind::S0, depth, space.dim())?;
    norm_p_lower(&m, space, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleEstimate {
    pub estimate: f64,
    pub best_pattern: SignPattern,
    pub patterns: usize,
    pub exhaustive: bool,
}

/// `max_α ‖T_α‖` over sign patterns: all of them when `2^{#intervals} ≤
/// budget`, otherwise `budget` seeded random ones (always including `α ≡ +`).
pub fn estimate_mp_lower(
    space: &SpaceDescriptor,
    depth: usize,
    budget: usize,
    opts: &PowerOptions,
) -> Result<MartingaleEstimate> {
    if budget == 0 {
        return Err(LabError::MalformedInput(
            "pattern budget must be positive".into(),
        ));
    }
    let intervals = (1usize << (depth + 1)) - 1;
    let exhaustive = intervals < 63 && (1u64 << intervals) <= budget as u64;
    let patterns: Vec<SignPattern> = if exhaustive {
        (0..1u64 << intervals)
            .map(|b| SignPattern::from_bits(depth, b))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(opts.seed, usize::MAX));
        std::iter::once(SignPattern::constant(depth, crate::sign::Sign::Plus))
            .chain((1..budget).map(|_| SignPattern::random(depth, &mut rng)))
            .collect()
    };
    let mut best: Option<(f64, SignPattern)> = None;
    for alpha in &patterns {
        let m = materialize(&OperatorKind::TAlpha(alpha.clone()), depth, space.dim())?;
        let r = norm_p_lower(&m, space, opts)?;
        if best.as_ref().is_none_or(|(v, _)| r.estimate > *v) {
            best = Some((r.estimate, alpha.clone()));
        }
    }
    let (estimate, best_pattern) = best.expect("non-empty");
    Ok(MartingaleEstimate {
        estimate,
        best_pattern,
        patterns: patterns.len(),
        exhaustive,
    })
}

/// Inner space of a comparison row; the exponent comes from the row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpaceKind {
    Scalar,
    Lq { q: f64, dim: usize },
}

impl SpaceKind {
    pub fn at(&self, p: f64) -> Result<SpaceDescriptor> {
        match *self {
            SpaceKind::Scalar => SpaceDescriptor::scalar(p),
            SpaceKind::Lq { q, dim } => SpaceDescriptor::lq(p, q, dim),
        }
    }

    /// Parses `scalar` or `l<q>^<d>` (for example `l3^4`).
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "scalar" {
            return Ok(SpaceKind::Scalar);
        }
        let bad = || LabError::MalformedInput(format!("unknown space `{s}`"));
        let body = t.strip_prefix('l').ok_or_else(bad)?;
        let (q, d) = body.split_once('^').ok_or_else(bad)?;
        let q: f64 = q.parse().map_err(|_| bad())?;
        let dim: usize = d.parse().map_err(|_| bad())?;
        SpaceDescriptor::lq(2.0, q, dim)?;
        Ok(SpaceKind::Lq { q, dim })
    }

    pub fn label(&self) -> String {
        match self {
            SpaceKind::Scalar => "scalar".to_string(),
            SpaceKind::Lq { q, dim } => format!("l{q}^{dim}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceKind::Scalar => 1,
            SpaceKind::Lq { dim, .. } => *dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub exponents: Vec<f64>,
    pub spaces: Vec<SpaceKind>,
    pub depth: usize,
    pub grid: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub slack: f64,
    pub exec: Execution,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            exponents: vec![1.5, 2.0, 3.0, 4.0],
            spaces: vec![
                SpaceKind::Scalar,
                SpaceKind::Lq { q: 2.0, dim: 2 },
                SpaceKind::Lq { q: 3.0, dim: 4 },
            ],
            depth: 6,
            grid: 1024,
            restarts: 20,
            max_iter: 500,
            tol: 1e-10,
            seed: 0,
            slack: DEFAULT_SLACK,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub p: f64,
    pub space: String,
    pub depth: usize,
    pub grid: usize,
    pub s_lower: f64,
    pub h_lower: f64,
    pub ratio: f64,
    pub c0: f64,
    pub inv_c0: f64,
    pub three_inv_c0: f64,
    /// `ratio > slack / c₀`.
    pub flagged: bool,
}

/// Rows `(p, space)` of `s_p` at depth `K` against `h_p` at grid `N`.
///
/// `s_p` is warm-started from the maximizers at every smaller depth, and every
/// vector-valued estimate from the scalar maximizers placed in one component,
/// so vector rows are never below the scalar ones.
pub fn comparison_experiment(cfg: &ComparisonConfig) -> Result<Vec<ComparisonRow>> {
    let c0 = compute_c0()?;
    let opts = PowerOptions {
        restarts: cfg.restarts,
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        seed: cfg.seed,
        exec: cfg.exec,
        extra_starts: Vec::new(),
    };
    let mut rows = Vec::new();
    for &p in &cfg.exponents {
        let mut scalar_h: Option<Vec<f64>> = None;
        let mut scalar_s: Option<Vec<f64>> = None;
        for kind in &cfg.spaces {
            let space = kind.at(p)?;
            let dim = space.dim();
            let h_starts = scalar_h.iter().map(|m| embed_scalar(m, dim)).collect();
            let h = estimate_hp(&space, cfg.grid, &opts.clone().with_starts(h_starts))?;

            let mut warm: Vec<Vec<f64>> = Vec::new();
            let mut s = None;
            for k in 0..=cfg.depth {
                let mut starts: Vec<Vec<f64>> = warm.iter().map(|w| refine_cells(w, dim)).collect();
                if k == cfg.depth {
                    if let Some(m) = &scalar_s {
                        starts.push(embed_scalar(m, dim));
                    }
                }
                let r = estimate_sp(&space, k, &opts.clone().with_starts(starts))?;
                warm = vec![r.maximizer.clone()];
                s = Some(r);
            }
            let s = s.expect("depth loop runs");
            if matches!(kind, SpaceKind::Scalar) {
                scalar_h = Some(h.maximizer.clone());
                scalar_s = Some(s.maximizer.clone());
            }
            let ratio = s.estimate / h.estimate;
            rows.push(ComparisonRow {
                p,
                space: kind.label(),
                depth: cfg.depth,
                grid: cfg.grid,
                s_lower: s.estimate,
                h_lower: h.estimate,
                ratio,
                c0,
                inv_c0: 1.0 / c0,
                three_inv_c0: 3.0 / c0,
                flagged: ratio > cfg.slack / c0,
            });
        }
    }
    Ok(rows)
}
