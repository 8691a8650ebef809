//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use dyadic_lab::circle::{c0_quadrature, c0_series, compute_c0, eval_h_phi, phi, project_quarters};
use dyadic_lab::dyadic::{haar_eval, DyadicInterval, HaarExpansion};
use dyadic_lab::modulation::{
    build_schedule, modulated_pairing, psi_averaged_pairing, unmodulated_pairing,
    verify_modulation_identity, verify_modulation_identity_with, TruncatedToss,
};
use dyadic_lab::norms::{
    comparison_experiment, estimate_hp, estimate_mp_lower, estimate_sp, materialize,
    ComparisonConfig, OperatorKind, PowerOptions, SpaceDescriptor,
};
use dyadic_lab::toss::{distribution_check, weak_form_check, weak_form_check_toss, TossFunction};
use dyadic_lab::{LabError, Result, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn quarter_projections() -> Result<Outcome> {
    let c0 = compute_c0()?;
    let quad = c0_quadrature(1e-12)?;
    let series = c0_series(1e-14);
    let plus = project_quarters(|x| eval_h_phi(Sign::Plus, x), 1e-11)?;
    let minus = project_quarters(|x| eval_h_phi(Sign::Minus, x), 1e-11)?;
    let mut residual: f64 = 0.0;
    for q in 0..4 {
        let mid = -PI + FRAC_PI_2 * (q as f64 + 0.5);
        residual = residual.max((plus[q] - c0 * phi(Sign::Minus, mid)).abs());
        residual = residual.max((minus[q] + c0 * phi(Sign::Plus, mid)).abs());
    }
    let agreement = (quad - series).abs();
    outcome(
        residual < 1e-9 && agreement < 1e-9 && (c0 - 0.742453).abs() < 1e-6,
        format!("c0 = {c0:.10}, projection residual {residual:.2e}, quadrature vs series {agreement:.2e}"),
    )
}

fn weak_form() -> Result<Outcome> {
    let mut lifted: f64 = 0.0;
    let mut generic: f64 = 0.0;
    let mut smallest_side = f64::INFINITY;
    for (depth, dim) in [(4, 1), (3, 2)] {
        for seed in 0..50 {
            let f = HaarExpansion::random(depth, dim, &mut rng(seed)).reduce_tilde();
            let g = HaarExpansion::random(depth, dim, &mut rng(seed + 10_000));
            lifted = lifted.max(weak_form_check(&f, &g)?.residual);

            let f = TossFunction::random(depth, dim, &mut rng(seed + 20_000));
            let g = TossFunction::random(depth, dim, &mut rng(seed + 30_000));
            let r = weak_form_check_toss(&f, &g)?;
            generic = generic.max(r.residual);
            smallest_side = smallest_side.min(r.shift_side.abs());
        }
    }
    outcome(
        lifted < 1e-9 && generic < 1e-9,
        format!(
            "200 pairs; lifted max residual {lifted:.2e}, generic toss max residual {generic:.2e} (min |shift side| {smallest_side:.2e})"
        ),
    )
}

fn probes(angles: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| (0..angles).map(|_| r.random_range(-PI..PI)).collect())
        .collect()
}

fn modulation_identity() -> Result<Outcome> {
    let mut residual: f64 = 0.0;
    let mut terms = 0;
    for depth in 0..=2 {
        for order in 1..=3 {
            let f = TossFunction::random(depth, 1, &mut rng(depth as u64 * 7 + order as u64));
            let trunc = TruncatedToss::new(&f, order)?;
            let schedule = build_schedule(&trunc.spectrum_bounds())?;
            for poly in trunc.polynomials() {
                poly.check_dominance(&schedule)?;
                terms += poly.terms().len();
            }
            let r = verify_modulation_identity(
                &f,
                order,
                &probes(depth + 1, 8, 1),
                &[0.0, 0.3, 1.7, 4.4],
            )?;
            residual = residual.max(r.max_residual);
        }
    }
    let f = TossFunction::random(2, 1, &mut rng(99));
    let trunc = TruncatedToss::new(&f, 3)?;
    let small = build_schedule(&[1, 1])?;
    let rejected = matches!(
        verify_modulation_identity_with(&trunc, &small, &probes(3, 1, 2), &[0.3]),
        Err(LabError::ScheduleTooSmall { .. })
    );
    outcome(
        residual < 1e-10 && rejected,
        format!("max residual {residual:.2e} over {terms} dominant terms; undersized schedule rejected: {rejected}"),
    )
}

fn psi_independence() -> Result<Outcome> {
    let mut spread: f64 = 0.0;
    for seed in 0..3 {
        let tf = TruncatedToss::new(&TossFunction::random(2, 1, &mut rng(seed)), 3)?;
        let tg = TruncatedToss::new(&TossFunction::random(2, 1, &mut rng(seed + 100)), 3)?;
        let bounds = tf.spectrum_bounds();
        let mut values = vec![unmodulated_pairing(&tf, &tg)?];
        for scale in [1, 2] {
            let s = build_schedule(&bounds.iter().map(|b| b * scale).collect::<Vec<_>>())?;
            for psi in [0.0, 0.3, 1.7] {
                values.push(modulated_pairing(&tf, &tg, &s, psi)?);
            }
            values.push(psi_averaged_pairing(&tf, &tg, &s)?);
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }
    outcome(
        spread < 1e-9,
        format!("max spread {spread:.2e} over psi in {{0, 0.3, 1.7}} and two schedules"),
    )
}

fn distribution() -> Result<Outcome> {
    let mut checked = 0;
    let mut all = true;
    for depth in 0..=6 {
        for (dim, seed) in [(1, 0), (1, 1), (2, 2)] {
            let e = HaarExpansion::random(depth, dim, &mut rng(seed * 31 + depth as u64));
            all &= distribution_check(&e, 8)?.matched;
            checked += 1;
        }
        let mut sparse = HaarExpansion::zeros(depth, 1);
        sparse.set_coeff(
            &DyadicInterval::new(depth as u32, 0).expect("valid"),
            &[1.0],
        );
        all &= distribution_check(&sparse, 8)?.matched;
        checked += 1;
    }
    outcome(
        all,
        format!("{checked} expansions at depths 0..=6, exact multiset match: {all}"),
    )
}

fn s0_algebra() -> Result<Outcome> {
    let mut square: f64 = 0.0;
    let mut skew: f64 = 0.0;
    let mut singular: f64 = 0.0;
    for depth in 1..=8 {
        let m = materialize(&OperatorKind::S0, depth, 1)?;
        let n = m.size();
        let sq = m.matmul(&m)?;
        let root: Vec<f64> = (0..n)
            .map(|c| haar_eval(&DyadicInterval::ROOT, (c as f64 + 0.5) / n as f64))
            .collect();
        for i in 0..n {
            for j in 0..n {
                // identity minus projections onto the constants and h_{I₀}
                let proper = f64::from(u8::from(i == j)) - (1.0 + root[i] * root[j]) / n as f64;
                square = square.max((sq.entry(i, j) + proper).abs());
                skew = skew.max((m.entry(i, j) + m.entry(j, i)).abs());
            }
        }
        for s in m.singular_values()? {
            singular = singular.max(s.abs().min((s - 1.0).abs()));
        }
    }
    outcome(
        square < 1e-12 && skew < 1e-12 && singular < 1e-10,
        format!("K <= 8: |S0^2 + Id| {square:.2e}, skew {skew:.2e}, singular values off {{0,1}} by {singular:.2e}"),
    )
}

fn norm_anchors() -> Result<Outcome> {
    let two = SpaceDescriptor::scalar(2.0)?;
    let opts = PowerOptions::default().with_restarts(20).with_seed(1);
    let s2 = estimate_sp(&two, 6, &opts)?.estimate;
    let h2 = estimate_hp(&two, 1024, &opts)?.estimate;
    let m2 = estimate_mp_lower(&two, 2, 128, &PowerOptions::default().with_restarts(3))?.estimate;
    let anchors = [s2, h2, m2].iter().all(|v| (v - 1.0).abs() < 1e-8);

    let four = SpaceDescriptor::scalar(4.0)?;
    let classical = 1.0 + SQRT_2;
    let mut grid = Vec::new();
    for n in [64, 256, 1024] {
        grid.push(estimate_hp(&four, n, &opts)?.estimate);
    }
    let monotone = grid.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let below = grid.iter().all(|v| *v <= classical * (1.0 + 1e-9));
    let h4 = grid[2];
    outcome(
        anchors && monotone && below && h4 >= 2.30,
        format!(
            "s2 {s2:.10}, h2 {h2:.10}, m2 {m2:.10}; h4 at N = 64, 256, 1024: {:.6}, {:.6}, {:.6} (target >= 2.30, classical {classical:.6})",
            grid[0], grid[1], grid[2]
        ),
    )
}

fn ratio_probe() -> Result<Outcome> {
    let rows = comparison_experiment(&ComparisonConfig::default())?;
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let flagged: Vec<String> = rows
        .iter()
        .filter(|r| r.flagged)
        .map(|r| format!("p={} {}", r.p, r.space))
        .collect();
    let limit = rows.first().map_or(f64::NAN, |r| 1.10 * r.inv_c0);
    outcome(
        flagged.is_empty(),
        format!(
            "{} rows, max s/h ratio {worst:.6} (limit {limit:.6}); flagged: {flagged:?}",
            rows.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 8] = [
        ("quarter projections of H phi and c0", quarter_projections),
        ("weak-form pairing identity", weak_form),
        ("modulation identity and dominance", modulation_identity),
        ("independence of psi and schedule", psi_independence),
        ("distribution equality", distribution),
        ("algebra of S0", s0_algebra),
        ("norm anchors", norm_anchors),
        ("s_p / h_p consistency probe", ratio_probe),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {detail} ({:.1}s)",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
