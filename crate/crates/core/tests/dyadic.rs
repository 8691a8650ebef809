use std::f64::consts::FRAC_1_SQRT_2;

use dyadic_lab::dyadic::{haar_eval, DyadicInterval, HaarExpansion, SignPattern};
use dyadic_lab::norms::SpaceDescriptor;
use dyadic_lab::Sign;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples `mean + Σ c_I h_I` at cell midpoints straight from the definition.
fn grid_oracle(e: &HaarExpansion) -> Vec<f64> {
    let n = e.cells();
    let d = e.dim();
    let mut out = vec![0.0; n * d];
    for cell in 0..n {
        let x = (cell as f64 + 0.5) / n as f64;
        for c in 0..d {
            let mut v = e.mean()[c];
            for i in e.intervals() {
                v += e.coeff(&i)[c] * haar_eval(&i, x);
            }
            out[cell * d + c] = v;
        }
    }
    out
}

fn expansion(depth: usize, dim: usize, seed: u64) -> HaarExpansion {
    HaarExpansion::random(depth, dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn synthesis_matches_definition() {
    for (depth, dim) in [(0, 1), (1, 1), (3, 2), (5, 3)] {
        let e = expansion(depth, dim, 11 + depth as u64);
        assert!(close(&e.synthesize(), &grid_oracle(&e), 1e-12));
    }
}

#[test]
fn cell_evaluation_matches_synthesis() {
    let e = expansion(4, 2, 3);
    let grid = e.synthesize();
    for cell in 0..e.cells() {
        assert!(close(
            &e.eval_cell(cell),
            &grid[cell * 2..cell * 2 + 2],
            1e-13
        ));
    }
}

#[test]
fn inner_product_matches_riemann_sum() {
    let f = expansion(4, 1, 5);
    let g = expansion(4, 1, 6);
    let (a, b) = (f.synthesize(), g.synthesize());
    let riemann: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / f.cells() as f64;
    assert!((f.inner(&g).unwrap() - riemann).abs() < 1e-12);
}

#[test]
fn analyze_rejects_bad_lengths() {
    assert!(HaarExpansion::analyze(&[1.0; 6], 1).is_err());
    assert!(HaarExpansion::analyze(&[1.0], 1).is_err());
    assert!(HaarExpansion::analyze(&[1.0; 8], 3).is_err());
}

#[test]
fn s0_on_depth_one_children() {
    let left = DyadicInterval::new(1, 0).unwrap();
    let right = DyadicInterval::new(1, 1).unwrap();
    let mut e = HaarExpansion::zeros(1, 1);
    e.set_coeff(&left, &[1.0]);
    let s = e.apply_s0();
    assert_eq!(s.coeff(&right), &[-1.0]);
    assert_eq!(s.coeff(&left), &[0.0]);

    let mut e = HaarExpansion::zeros(1, 1);
    e.set_coeff(&right, &[1.0]);
    let s = e.apply_s0();
    assert_eq!(s.coeff(&left), &[1.0]);
}

#[test]
fn s0_kills_mean_and_root() {
    let mut e = HaarExpansion::zeros(3, 1);
    e.set_mean(&[2.0]);
    e.set_coeff(&DyadicInterval::ROOT, &[-1.5]);
    assert_eq!(e.apply_s0(), HaarExpansion::zeros(3, 1));
}

#[test]
fn classical_shift_matches_oracle() {
    let e = expansion(4, 1, 9);
    let shifted = e.apply_classical_shift();
    let mut want = HaarExpansion::zeros(4, 1);
    for i in e.intervals().filter(|i| i.depth() < 4) {
        let c = e.coeff(&i)[0];
        want.coeff_mut(&i.child(Sign::Minus))[0] += FRAC_1_SQRT_2 * c;
        want.coeff_mut(&i.child(Sign::Plus))[0] -= FRAC_1_SQRT_2 * c;
    }
    assert!(shifted.max_abs_diff(&want) < 1e-15);
}

#[test]
fn talpha_all_plus_removes_mean_only() {
    let e = expansion(3, 2, 4);
    let t = e
        .apply_talpha(&SignPattern::constant(3, Sign::Plus))
        .unwrap();
    let mut want = e.clone();
    want.set_mean(&[0.0, 0.0]);
    assert_eq!(t, want);
    assert!(e
        .apply_talpha(&SignPattern::constant(2, Sign::Plus))
        .is_err());
}

#[test]
fn interval_indexing_round_trips() {
    for i in DyadicInterval::up_to_depth(7) {
        assert_eq!(DyadicInterval::from_index(i.index()), i);
        if let Some(p) = i.parent() {
            assert_eq!(p.child(i.parity().unwrap()), i);
            assert_eq!(i.sibling().unwrap().sibling().unwrap(), i);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_inverts_synthesis(depth in 0usize..7, dim in 1usize..4, seed in any::<u64>()) {
        let e = expansion(depth, dim, seed);
        let back = HaarExpansion::analyze(&e.synthesize(), dim).unwrap();
        prop_assert!(back.max_abs_diff(&e) < 1e-12);
    }

    #[test]
    fn parseval(depth in 0usize..7, seed in any::<u64>()) {
        let e = expansion(depth, 1, seed);
        let grid = e.synthesize();
        let energy: f64 = grid.iter().map(|v| v * v).sum::<f64>() / e.cells() as f64;
        prop_assert!((energy - e.coefficient_energy()).abs() < 1e-11);
    }

    #[test]
    fn s0_is_antisymmetric(depth in 0usize..7, dim in 1usize..3, a in any::<u64>(), b in any::<u64>()) {
        let f = expansion(depth, dim, a);
        let g = expansion(depth, dim, b);
        let lhs = f.apply_s0().inner(&g).unwrap();
        let rhs = -f.inner(&g.apply_s0()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn s0_squares_to_minus_reduced(depth in 0usize..8, seed in any::<u64>()) {
        let f = expansion(depth, 1, seed);
        let twice = f.apply_s0().apply_s0();
        prop_assert!(twice.max_abs_diff(&f.reduce_tilde().scaled(-1.0)) == 0.0);
    }

    #[test]
    fn talpha_is_an_involution_on_reduced_mean(depth in 0usize..6, seed in any::<u64>(), bits in any::<u64>()) {
        let f = expansion(depth, 2, seed);
        let alpha = SignPattern::from_bits(depth, bits);
        let twice = f.apply_talpha(&alpha).unwrap().apply_talpha(&alpha).unwrap();
        let mut want = f.clone();
        want.set_mean(&[0.0, 0.0]);
        prop_assert_eq!(twice, want);
    }

    #[test]
    fn reduction_costs_at_most_three(depth in 0usize..7, seed in any::<u64>(), p in 1.1f64..6.0, q in 1.1f64..6.0) {
        let f = expansion(depth, 2, seed);
        let space = SpaceDescriptor::lq(p, q, 2).unwrap();
        let lhs = f.reduce_tilde().lp_norm(&space).unwrap();
        let rhs = 3.0 * f.lp_norm(&space).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn s0_is_a_partial_isometry_in_l2(depth in 0usize..7, seed in any::<u64>()) {
        let f = expansion(depth, 1, seed);
        let space = SpaceDescriptor::scalar(2.0).unwrap();
        let lhs = f.apply_s0().lp_norm(&space).unwrap();
        let rhs = f.reduce_tilde().lp_norm(&space).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
