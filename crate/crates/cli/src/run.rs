//! One function per subcommand, each returning its result records.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use dyadic_lab::circle::{c0_series, compute_c0, eval_h_phi, phi, project_quarters, C0_AGREEMENT};
use dyadic_lab::dyadic::HaarExpansion;
use dyadic_lab::modulation::{
    build_schedule, modulated_pairing, psi_averaged_pairing, unmodulated_pairing,
    verify_modulation_identity_with, TruncatedToss,
};
use dyadic_lab::norms::{comparison_experiment, materialize, ComparisonConfig, OperatorKind};
use dyadic_lab::toss::{distribution_check, weak_form_check, weak_form_check_toss, TossFunction};
use dyadic_lab::{LabError, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Subcommand};
use crate::record::ResultRecord;

pub const LEMMA_TOL: f64 = 1e-9;
pub const WEAK_FORM_TOL: f64 = 1e-9;
pub const MODULATION_TOL: f64 = 1e-10;
pub const INDEPENDENCE_TOL: f64 = 1e-9;

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    match cfg.subcommand {
        Subcommand::VerifyLemma => verify_lemma(cfg),
        Subcommand::VerifyWeakForm => verify_weak_form(cfg),
        Subcommand::VerifyModulation => verify_modulation(cfg),
        Subcommand::VerifyDistribution => verify_distribution(cfg),
        Subcommand::EstimateNorms => estimate_norms(cfg),
        Subcommand::Materialize => materialize_operator(cfg),
    }
}

fn seeded(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or_default())
}

fn sign_label(s: Sign) -> &'static str {
    if s.is_plus() {
        "+"
    } else {
        "-"
    }
}

fn verify_lemma(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    let start = Instant::now();
    let c0 = compute_c0()?;
    let series = c0_series(1e-14);
    let mut out = vec![
        ResultRecord::new(cfg, "c0", "quadrature").info("c0", c0),
        ResultRecord::new(cfg, "c0", "series").below(
            "quadrature-vs-series",
            (c0 - series).abs(),
            C0_AGREEMENT,
        ),
    ];
    for sigma in Sign::BOTH {
        let proj = project_quarters(|x| eval_h_phi(sigma, x), 1e-11)?;
        for (q, value) in proj.iter().enumerate() {
            let mid = -PI + FRAC_PI_2 * (q as f64 + 0.5);
            // π Hφ⁺ = c₀ φ⁻ and π Hφ⁻ = −c₀ φ⁺ on the quarters
            let want = match sigma {
                Sign::Plus => c0 * phi(Sign::Minus, mid),
                Sign::Minus => -c0 * phi(Sign::Plus, mid),
            };
            out.push(
                ResultRecord::new(
                    cfg,
                    "quarter-projection",
                    format!("sigma={},q={}", sign_label(sigma), q),
                )
                .below("residual", (value - want).abs(), LEMMA_TOL),
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(out.into_iter().map(|r| r.time(elapsed)).collect())
}

fn verify_weak_form(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    let mut rng = seeded(cfg);
    let mut out = Vec::new();
    for space in &cfg.spaces {
        let dim = space.dim();
        for trial in 0..cfg.trials {
            let start = Instant::now();
            let f = TossFunction::random(cfg.depth, dim, &mut rng);
            let g = TossFunction::random(cfg.depth, dim, &mut rng);
            let r = weak_form_check_toss(&f, &g)?;
            let t = start.elapsed().as_secs_f64();
            let base = ResultRecord::new(cfg, "weak-form-toss", format!("trial-{trial}"))
                .depth(cfg.depth)
                .space(space.label())
                .time(t);
            out.push(base.clone().info("hilbert-side", r.hilbert_side));
            out.push(base.clone().info("shift-side", r.shift_side));
            out.push(base.below("residual", r.residual, WEAK_FORM_TOL));
        }
        for trial in 0..cfg.trials {
            let start = Instant::now();
            let f = HaarExpansion::random(cfg.depth, dim, &mut rng).reduce_tilde();
            let g = HaarExpansion::random(cfg.depth, dim, &mut rng);
            let r = weak_form_check(&f, &g)?;
            let haar = f.apply_s0().inner(&g)?;
            let t = start.elapsed().as_secs_f64();
            let base = ResultRecord::new(cfg, "weak-form-lift", format!("trial-{trial}"))
                .depth(cfg.depth)
                .space(space.label())
                .time(t);
            out.push(base.clone().info("hilbert-side", r.hilbert_side));
            out.push(base.clone().info("shift-side", r.shift_side));
            out.push(base.clone().info("haar-pairing", haar));
            out.push(base.below("residual", r.residual, WEAK_FORM_TOL));
        }
    }
    Ok(out)
}

fn angles(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-PI..PI)).collect()
}

fn verify_modulation(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    let mut rng = seeded(cfg);
    let mut out = Vec::new();
    let psis = [0.0, 0.3, 1.7];
    for trial in 0..cfg.trials {
        let start = Instant::now();
        let f = TossFunction::random(cfg.depth, 1, &mut rng);
        let g = TossFunction::random(cfg.depth, 1, &mut rng);
        let tf = TruncatedToss::new(&f, cfg.order)?;
        let tg = TruncatedToss::new(&g, cfg.order)?;
        let bounds = tf.spectrum_bounds();
        let schedule = build_schedule(&bounds)?;
        let probes: Vec<Vec<f64>> = (0..4).map(|_| angles(&mut rng, cfg.depth + 1)).collect();
        let report = verify_modulation_identity_with(&tf, &schedule, &probes, &psis)?;
        let base = ResultRecord::new(cfg, "modulation", format!("trial-{trial}"))
            .depth(cfg.depth)
            .order(cfg.order);
        out.push(base.clone().info("terms", report.terms_checked as f64));
        out.push(
            base.clone()
                .below("identity-residual", report.max_residual, MODULATION_TOL)
                .time(start.elapsed().as_secs_f64()),
        );

        let start = Instant::now();
        let reference = unmodulated_pairing(&tf, &tg)?;
        let mut spread: f64 = 0.0;
        for scale in [1, 2] {
            let s = build_schedule(&bounds.iter().map(|b| b * scale).collect::<Vec<_>>())?;
            for psi in psis {
                spread = spread.max((modulated_pairing(&tf, &tg, &s, psi)? - reference).abs());
            }
            spread = spread.max((psi_averaged_pairing(&tf, &tg, &s)? - reference).abs());
        }
        out.push(
            base.clone()
                .below("pairing-spread", spread, INDEPENDENCE_TOL)
                .time(start.elapsed().as_secs_f64()),
        );

        if cfg.depth > 0 {
            let small = build_schedule(&vec![1; cfg.depth])?;
            let rejected = matches!(
                verify_modulation_identity_with(&tf, &small, &probes[..1], &psis[1..2]),
                Err(LabError::ScheduleTooSmall { .. })
            );
            let nontrivial = bounds.iter().any(|b| *b > 1);
            out.push(base.check("undersized-schedule-rejected", rejected || !nontrivial));
        }
    }
    Ok(out)
}

fn verify_distribution(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    let mut rng = seeded(cfg);
    let mut out = Vec::new();
    for space in &cfg.spaces {
        for depth in 0..=cfg.depth {
            for trial in 0..cfg.trials {
                let start = Instant::now();
                let e = HaarExpansion::random(depth, space.dim(), &mut rng);
                let r = distribution_check(&e, dyadic_lab::toss::DEFAULT_DISTRIBUTION_BUDGET)?;
                out.push(
                    ResultRecord::new(cfg, "distribution", format!("trial-{trial}"))
                        .depth(depth)
                        .space(space.label())
                        .check("multiset-match", r.matched)
                        .time(start.elapsed().as_secs_f64()),
                );
            }
        }
    }
    Ok(out)
}

fn estimate_norms(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    let comparison = ComparisonConfig {
        exponents: cfg.exponents.clone(),
        spaces: cfg.spaces.clone(),
        depth: cfg.depth,
        grid: cfg.grid,
        restarts: cfg.restarts,
        max_iter: cfg.iterations,
        tol: cfg.tol,
        seed: cfg.seed.unwrap_or_default(),
        slack: cfg.slack,
        ..ComparisonConfig::default()
    };
    let start = Instant::now();
    let rows = comparison_experiment(&comparison)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut out = Vec::new();
    for row in rows {
        let base = ResultRecord::new(cfg, "comparison", format!("p={},{}", row.p, row.space))
            .depth(row.depth)
            .grid(row.grid)
            .p(row.p)
            .space(row.space.clone())
            .time(elapsed);
        out.push(base.clone().info("s-lower", row.s_lower));
        out.push(base.clone().info("h-lower", row.h_lower));
        out.push(base.clone().info("c0", row.c0));
        out.push(base.clone().info("inv-c0", row.inv_c0));
        out.push(base.clone().info("three-inv-c0", row.three_inv_c0));
        out.push(base.at_most("ratio", row.ratio, cfg.slack * row.inv_c0));
    }
    Ok(out)
}

fn materialize_operator(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, LabError> {
    let start = Instant::now();
    let kind = OperatorKind::parse(&cfg.operator, cfg.depth)?;
    let m = materialize(&kind, cfg.depth, cfg.dim)?;
    let norm = m.norm_2_exact()?;
    let elapsed = start.elapsed().as_secs_f64();
    let base = ResultRecord::new(cfg, &cfg.operator, "")
        .depth(cfg.depth)
        .time(elapsed);
    let mut out = vec![{
        let mut r = base.clone().info("norm-2", norm);
        r.id = "matrix".into();
        r
    }];
    for i in 0..m.size() {
        for j in 0..m.size() {
            let mut r = base.clone().info("entry", m.entry(i, j));
            r.id = format!("{i},{j}");
            out.push(r);
        }
    }
    Ok(out)
}
