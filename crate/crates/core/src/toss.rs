//! The sign-toss model: a Haar expansion re-indexed by independent uniform
//! angles `θ_0, …, θ_K`, with generators `φ⁺ = sign cos` and `φ⁻ = sign sin`.
//!
//! Every factor except `Hφ^σ` is constant on quarter arcs, so expectations
//! over `θ` reduce to finite sums over [`QuarterState`]s. A state is encoded
//! as an integer whose base-4 digits are `q_0, q_1, …` (least significant
//! first), so the prefix `(q_0, …, q_k)` of a state is its low `2(k+1)` bits.

use std::collections::BTreeMap;

use rand::Rng;

use crate::circle::{compute_c0, phi_on_quarter, quarter_of, QuarterMoments};
use crate::dyadic::{dyadic_inv_sqrt_len, DyadicInterval, HaarExpansion};
use crate::error::{LabError, Result};
use crate::exec::{chunk_bounds, map_range, Execution};
use crate::norms::SpaceDescriptor;
use crate::sign::Sign;

/// Largest number of angles enumerated exhaustively (`4^10` states).
pub const MAX_ENUMERATED_ANGLES: usize = 10;

/// Default depth budget for [`distribution_check`].
pub const DEFAULT_DISTRIBUTION_BUDGET: usize = 8;

const ENUMERATION_CHUNKS: usize = 64;

/// Which quarter arc each angle `θ_j` fell in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuarterState {
    quarters: Vec<u8>,
}

impl QuarterState {
    pub fn from_index(index: usize, angles: usize) -> Self {
        Self {
            quarters: (0..angles)
                .map(|j| ((index >> (2 * j)) & 3) as u8)
                .collect(),
        }
    }

    pub fn from_angles(thetas: &[f64]) -> Self {
        Self {
            quarters: thetas.iter().map(|t| quarter_of(*t) as u8).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.quarters
            .iter()
            .enumerate()
            .map(|(j, q)| (*q as usize) << (2 * j))
            .sum()
    }

    pub fn quarters(&self) -> &[u8] {
        &self.quarters
    }

    /// `(ε_j^+, ε_j^−) = (φ⁺(θ_j), φ⁻(θ_j))` for every angle.
    pub fn tosses(&self) -> Vec<(Sign, Sign)> {
        self.quarters
            .iter()
            .map(|q| {
                let q = *q as usize;
                (
                    Sign::of(phi_on_quarter(Sign::Plus, q)),
                    Sign::of(phi_on_quarter(Sign::Minus, q)),
                )
            })
            .collect()
    }

    /// The relevant tosses `t_0 = ε_0^+`, `t_j = ε_j^{t_{j−1}}`: the path
    /// through the dyadic tree.
    pub fn path(&self) -> Vec<Sign> {
        path_from_quarters(self.quarters.iter().map(|q| *q as usize))
    }

    /// Probability `4^{−(angles)}` of each state, as a denominator.
    pub fn probability_denominator(angles: usize) -> u64 {
        1u64 << (2 * angles)
    }
}

fn path_from_quarters(quarters: impl Iterator<Item = usize>) -> Vec<Sign> {
    let mut path = Vec::new();
    let mut generator = Sign::Plus;
    for q in quarters {
        let t = Sign::of(phi_on_quarter(generator, q));
        path.push(t);
        generator = t;
    }
    path
}

/// The tosses `(ε_1, …, ε_k)` leading from `I₀` to `I` (minus = left).
pub fn interval_to_path(interval: &DyadicInterval) -> Vec<Sign> {
    let k = interval.depth();
    (0..k)
        .map(|j| Sign::from_bit((interval.position() >> (k - 1 - j)) & 1 == 1))
        .collect()
}

pub fn path_to_interval(path: &[Sign]) -> DyadicInterval {
    path.iter().fold(DyadicInterval::ROOT, |i, s| i.child(*s))
}

/// `F(θ) = dF_{−2} + dF_{−1} φ⁺(θ_0) + Σ_k dF_k^+(θ⃗_k) φ⁺(θ_{k+1}) + dF_k^−(θ⃗_k) φ⁻(θ_{k+1})`
/// with `k = 0, …, K−1` and increments tabulated on quarter prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct TossFunction {
    depth: usize,
    dim: usize,
    constant: Vec<f64>,
    root: Vec<f64>,
    /// `plus[k]` holds `4^{k+1}` prefixes × `dim`.
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
}

fn prefix_count(level: usize) -> usize {
    1 << (2 * (level + 1))
}

impl TossFunction {
    pub fn zeros(depth: usize, dim: usize) -> Self {
        let tables = |k: usize| vec![0.0; prefix_count(k) * dim];
        Self {
            depth,
            dim,
            constant: vec![0.0; dim],
            root: vec![0.0; dim],
            plus: (0..depth).map(tables).collect(),
            minus: (0..depth).map(tables).collect(),
        }
    }

    /// Increments drawn uniformly from `[−1, 1]` on every prefix and for both
    /// generators; no support structure.
    pub fn random<R: Rng + ?Sized>(depth: usize, dim: usize, rng: &mut R) -> Self {
        let mut f = Self::zeros(depth, dim);
        let draw = |v: &mut f64| *v = rng.random_range(-1.0..1.0);
        f.constant
            .iter_mut()
            .chain(f.root.iter_mut())
            .chain(f.plus.iter_mut().flatten())
            .chain(f.minus.iter_mut().flatten())
            .for_each(draw);
        f
    }

    /// Lift of a Haar expansion: `dF_{−2} = ⟨f⟩_{I₀}`, `dF_{−1} = (f, h_{I₀})`,
    /// and `dF_k^σ` on a prefix whose path selects `J` (depth `k+1`, parity
    /// `σ`) equals `(f, h_J)|J|^{−1/2}`; zero on the other parity.
    pub fn lift(e: &HaarExpansion) -> Self {
        let depth = e.depth();
        let dim = e.dim();
        let mut f = Self::zeros(depth, dim);
        f.constant.copy_from_slice(e.mean());
        f.root.copy_from_slice(e.coeff(&DyadicInterval::ROOT));
        for k in 0..depth {
            let scale = dyadic_inv_sqrt_len(k as u32 + 1);
            for p in 0..prefix_count(k) {
                let path = path_from_quarters((0..=k).map(|j| (p >> (2 * j)) & 3));
                let parity = *path.last().expect("non-empty prefix");
                let interval = path_to_interval(&path);
                let table = match parity {
                    Sign::Plus => &mut f.plus[k],
                    Sign::Minus => &mut f.minus[k],
                };
                for (t, c) in table[p * dim..(p + 1) * dim]
                    .iter_mut()
                    .zip(e.coeff(&interval))
                {
                    *t = c * scale;
                }
            }
        }
        f
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of angles `θ_0, …, θ_K`.
    pub fn angles(&self) -> usize {
        self.depth + 1
    }

    pub fn state_count(&self) -> usize {
        1 << (2 * self.angles())
    }

    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    pub fn root(&self) -> &[f64] {
        &self.root
    }

    pub fn constant_mut(&mut self) -> &mut [f64] {
        &mut self.constant
    }

    pub fn root_mut(&mut self) -> &mut [f64] {
        &mut self.root
    }

    /// `dF_k^σ` on the prefix with index `prefix`.
    pub fn increment(&self, level: usize, sigma: Sign, prefix: usize) -> &[f64] {
        let t = match sigma {
            Sign::Plus => &self.plus[level],
            Sign::Minus => &self.minus[level],
        };
        &t[prefix * self.dim..(prefix + 1) * self.dim]
    }

    pub fn increment_mut(&mut self, level: usize, sigma: Sign, prefix: usize) -> &mut [f64] {
        let dim = self.dim;
        let t = match sigma {
            Sign::Plus => &mut self.plus[level],
            Sign::Minus => &mut self.minus[level],
        };
        &mut t[prefix * dim..(prefix + 1) * dim]
    }

    /// The whole table of `dF_k^σ`, prefix-major.
    pub fn increment_table(&self, level: usize, sigma: Sign) -> &[f64] {
        match sigma {
            Sign::Plus => &self.plus[level],
            Sign::Minus => &self.minus[level],
        }
    }

    /// For every prefix at most one of `dF_k^+`, `dF_k^−` is non-zero, and it
    /// is the one matching the parity of the interval the path has reached.
    pub fn is_support_disjoint(&self) -> bool {
        (0..self.depth).all(|k| {
            (0..prefix_count(k)).all(|p| {
                let path = path_from_quarters((0..=k).map(|j| (p >> (2 * j)) & 3));
                let other = path.last().expect("non-empty").flip();
                self.increment(k, other, p).iter().all(|v| *v == 0.0)
            })
        })
    }

    /// `F` on one state, written into `out`.
    pub fn eval_state_into(&self, state: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.constant);
        let q0 = state & 3;
        let g = phi_on_quarter(Sign::Plus, q0);
        for (o, r) in out.iter_mut().zip(&self.root) {
            *o += r * g;
        }
        for k in 0..self.depth {
            let p = state & (prefix_count(k) - 1);
            let q = (state >> (2 * (k + 1))) & 3;
            for sigma in Sign::BOTH {
                let g = phi_on_quarter(sigma, q);
                for (o, v) in out.iter_mut().zip(self.increment(k, sigma, p)) {
                    *o += v * g;
                }
            }
        }
    }

    pub fn eval_state(&self, state: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_state_into(state, &mut out);
        out
    }

    pub fn eval_angles(&self, thetas: &[f64]) -> Result<Vec<f64>> {
        if thetas.len() != self.angles() {
            return Err(LabError::DimensionMismatch {
                expected: self.angles(),
                actual: thetas.len(),
            });
        }
        Ok(self.eval_state(QuarterState::from_angles(thetas).index()))
    }

    /// `S₀` in the toss model: `dF_k^±(…) φ^±(θ_{k+1}) ↦ ±dF_k^±(…) φ^∓(θ_{k+1})`,
    /// with `dF_{−2}` and `dF_{−1}` annihilated. The prefix dependence is kept.
    pub fn apply_s0_toss(&self) -> Self {
        let mut out = Self::zeros(self.depth, self.dim);
        for k in 0..self.depth {
            out.minus[k].copy_from_slice(&self.plus[k]);
            out.plus[k] = self.minus[k].iter().map(|v| -v).collect();
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.constant
            .iter_mut()
            .chain(out.root.iter_mut())
            .chain(out.plus.iter_mut().flatten())
            .chain(out.minus.iter_mut().flatten())
            .for_each(|v| *v *= s);
        out
    }

    /// `F^H`: the Hilbert transform applied to the generator of each increment.
    pub fn apply_h_increments(&self) -> HilbertIncrements<'_> {
        HilbertIncrements { base: self }
    }

    fn check_pairable(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        if self.depth != other.depth {
            return Err(LabError::MalformedInput(format!(
                "toss functions of depths {} and {} cannot be paired",
                self.depth, other.depth
            )));
        }
        if self.angles() > MAX_ENUMERATED_ANGLES {
            return Err(LabError::Budget(format!(
                "{} angles exceed the enumeration budget of {MAX_ENUMERATED_ANGLES}",
                self.angles()
            )));
        }
        Ok(())
    }

    /// Exact `E^θ ⟨F(θ), G(θ)⟩` by enumeration of quarter states.
    pub fn expect_pairing(&self, other: &Self) -> Result<f64> {
        self.expect_pairing_with(other, Execution::default())
    }

    pub fn expect_pairing_with(&self, other: &Self, exec: Execution) -> Result<f64> {
        self.check_pairable(other)?;
        let total = enumerate_sum(
            self.state_count(),
            exec,
            |state, fa, fb| {
                self.eval_state_into(state, fa);
                other.eval_state_into(state, fb);
                dot(fa, fb)
            },
            self.dim,
        );
        Ok(total / self.state_count() as f64)
    }

    /// `(E^θ ‖F(θ)‖_X^p)^{1/p}` by enumeration.
    pub fn moment_norm(&self, space: &SpaceDescriptor) -> Result<f64> {
        if space.dim() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                actual: space.dim(),
            });
        }
        if self.angles() > MAX_ENUMERATED_ANGLES {
            return Err(LabError::Budget("too many angles to enumerate".into()));
        }
        let total = enumerate_sum(
            self.state_count(),
            Execution::default(),
            |s, fa, _| {
                self.eval_state_into(s, fa);
                space.point_norm(fa).powf(space.p())
            },
            self.dim,
        );
        Ok((total / self.state_count() as f64).powf(1.0 / space.p()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordered sum of `term(state)` over all states; chunking is fixed so the
/// result does not depend on the execution mode.
fn enumerate_sum<F>(states: usize, exec: Execution, term: F, dim: usize) -> f64
where
    F: Fn(usize, &mut [f64], &mut [f64]) -> f64 + Sync + Send,
{
    let bounds = chunk_bounds(states, ENUMERATION_CHUNKS);
    let partial = map_range(exec, bounds.len(), |c| {
        let (lo, hi) = bounds[c];
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        (lo..hi).map(|s| term(s, &mut a, &mut b)).sum::<f64>()
    });
    partial.iter().sum()
}

/// The evaluator `F^H`: `dF_{−1} Hφ⁺(θ_0) + Σ_k dF_k^σ(θ⃗_k) Hφ^σ(θ_{k+1})`;
/// `dF_{−2}` drops out.
#[derive(Debug, Clone, Copy)]
pub struct HilbertIncrements<'a> {
    base: &'a TossFunction,
}

impl HilbertIncrements<'_> {
    pub fn base(&self) -> &TossFunction {
        self.base
    }

    /// `F^H` with every `Hφ^σ(θ_j)` replaced by its average over the quarter
    /// containing `θ_j`. Paired against quarter-constant functions this is
    /// exact.
    pub fn eval_reduced_into(&self, state: usize, moments: &QuarterMoments, out: &mut [f64]) {
        let f = self.base;
        let q0 = state & 3;
        let g = moments.plus[q0];
        for (o, r) in out.iter_mut().zip(&f.root) {
            *o = r * g;
        }
        for k in 0..f.depth {
            let p = state & (prefix_count(k) - 1);
            let q = (state >> (2 * (k + 1))) & 3;
            for sigma in Sign::BOTH {
                let g = moments.get(sigma)[q];
                for (o, v) in out.iter_mut().zip(f.increment(k, sigma, p)) {
                    *o += v * g;
                }
            }
        }
    }

    /// `E^θ ⟨F^H(θ), G(θ)⟩` by enumeration, using quarter averages of `Hφ^σ`.
    pub fn pair_reduced(&self, other: &TossFunction, moments: &QuarterMoments) -> Result<f64> {
        self.pair_reduced_with(other, moments, Execution::default())
    }

    pub fn pair_reduced_with(
        &self,
        other: &TossFunction,
        moments: &QuarterMoments,
        exec: Execution,
    ) -> Result<f64> {
        let f = self.base;
        f.check_pairable(other)?;
        let total = enumerate_sum(
            f.state_count(),
            exec,
            |state, fa, fb| {
                self.eval_reduced_into(state, moments, fa);
                other.eval_state_into(state, fb);
                dot(fa, fb)
            },
            f.dim,
        );
        Ok(total / f.state_count() as f64)
    }

    /// The same pairing assembled term by term: only equal levels survive,
    /// each weighted by the full-torus moment `m(σ, η) = E[Hφ^σ φ^η]`.
    /// `moments[σ is plus][η is plus]`.
    pub fn pair_termwise(&self, other: &TossFunction, moments: &[[f64; 2]; 2]) -> Result<f64> {
        let f = self.base;
        f.check_pairable(other)?;
        let m = |s: Sign, e: Sign| moments[usize::from(s.is_plus())][usize::from(e.is_plus())];
        let mut total = m(Sign::Plus, Sign::Plus) * dot(&f.root, &other.root);
        for k in 0..f.depth {
            let prefixes = prefix_count(k);
            for sigma in Sign::BOTH {
                for eta in Sign::BOTH {
                    let a = f.increment_table(k, sigma);
                    let b = other.increment_table(k, eta);
                    total += m(sigma, eta) * dot(a, b) / prefixes as f64;
                }
            }
        }
        Ok(total)
    }
}

/// Outcome of [`distribution_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub matched: bool,
    pub states: u64,
    pub cells: u64,
    pub distinct_values: usize,
    /// Largest absolute difference in probability (as a fraction of one)
    /// over all values; zero when matched.
    pub max_probability_gap: f64,
}

fn value_key(v: &[f64]) -> Vec<u64> {
    // `+ 0.0` folds −0 into +0.
    v.iter().map(|x| (x + 0.0).to_bits()).collect()
}

/// Exact comparison of the law of `f` on the dyadic grid with the law of
/// `lift(f)` under the uniform distribution on quarter states. Probabilities
/// are integer counts over the common denominator `4^{K+1}`.
pub fn distribution_check(e: &HaarExpansion, budget: usize) -> Result<DistributionReport> {
    if e.depth() > budget || e.depth() + 1 > MAX_ENUMERATED_ANGLES {
        return Err(LabError::Budget(format!(
            "depth {} exceeds the enumeration budget {budget}",
            e.depth()
        )));
    }
    let lifted = TossFunction::lift(e);
    let states = lifted.state_count() as u64;
    let cells = e.cells() as u64;
    let per_cell = states / cells;

    let mut grid: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for c in 0..e.cells() {
        *grid.entry(value_key(&e.eval_cell(c))).or_default() += per_cell;
    }
    let chunks = chunk_bounds(lifted.state_count(), ENUMERATION_CHUNKS);
    let partial = map_range(Execution::default(), chunks.len(), |i| {
        let (lo, hi) = chunks[i];
        let mut local: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        let mut buf = vec![0.0; lifted.dim()];
        for s in lo..hi {
            lifted.eval_state_into(s, &mut buf);
            *local.entry(value_key(&buf)).or_default() += 1;
        }
        local
    });
    let mut toss: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for local in partial {
        for (k, v) in local {
            *toss.entry(k).or_default() += v;
        }
    }

    let mut gap = 0u64;
    for key in grid.keys().chain(toss.keys()) {
        let a = grid.get(key).copied().unwrap_or(0);
        let b = toss.get(key).copied().unwrap_or(0);
        gap = gap.max(a.abs_diff(b));
    }
    Ok(DistributionReport {
        matched: grid == toss,
        states,
        cells,
        distinct_values: grid.len().max(toss.len()),
        max_probability_gap: gap as f64 / states as f64,
    })
}

/// Both sides of `E⟨F^H, G⟩ = c₀ E⟨S₀F, G⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakFormReport {
    /// `E⟨F^H, G⟩` from quadrature-based quarter averages of `Hφ^σ`.
    pub hilbert_side: f64,
    /// `E⟨S₀F, G⟩` by combinatorial enumeration.
    pub shift_side: f64,
    pub c0: f64,
    pub residual: f64,
}

/// Weak-form identity on arbitrary toss functions.
pub fn weak_form_check_toss(f: &TossFunction, g: &TossFunction) -> Result<WeakFormReport> {
    let moments = QuarterMoments::shared()?;
    let c0 = compute_c0()?;
    let hilbert_side = f.apply_h_increments().pair_reduced(g, &moments)?;
    let shift_side = f.apply_s0_toss().expect_pairing(g)?;
    Ok(WeakFormReport {
        hilbert_side,
        shift_side,
        c0,
        residual: (hilbert_side - c0 * shift_side).abs(),
    })
}

/// Weak-form identity on the lifts of `f` (which must be reduced) and `g`.
pub fn weak_form_check(f: &HaarExpansion, g: &HaarExpansion) -> Result<WeakFormReport> {
    if !f.is_reduced() {
        return Err(LabError::Precondition(
            "f must have zero mean and zero h_{I0} coefficient; apply reduce_tilde first".into(),
        ));
    }
    if f.dim() != g.dim() {
        return Err(LabError::DimensionMismatch {
            expected: f.dim(),
            actual: g.dim(),
        });
    }
    weak_form_check_toss(&TossFunction::lift(f), &TossFunction::lift(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths() {
        let left = DyadicInterval::new(1, 0).unwrap();
        assert_eq!(interval_to_path(&left), vec![Sign::Minus]);
        let last = DyadicInterval::new(2, 3).unwrap();
        assert_eq!(interval_to_path(&last), vec![Sign::Plus, Sign::Plus]);
        assert!(interval_to_path(&DyadicInterval::ROOT).is_empty());
        for i in DyadicInterval::up_to_depth(6) {
            assert_eq!(path_to_interval(&interval_to_path(&i)), i);
        }
    }

    #[test]
    fn state_round_trip() {
        for idx in 0..256 {
            assert_eq!(QuarterState::from_index(idx, 4).index(), idx);
        }
    }

    #[test]
    fn lift_of_root_haar() {
        let mut e = HaarExpansion::zeros(2, 1);
        e.set_coeff(&DyadicInterval::ROOT, &[1.0]);
        let f = TossFunction::lift(&e);
        assert_eq!(f.root(), &[1.0]);
        assert_eq!(f.constant(), &[0.0]);
        assert_eq!(f, {
            let mut z = TossFunction::zeros(2, 1);
            z.root_mut()[0] = 1.0;
            z
        });
    }

    #[test]
    fn lift_of_constant() {
        let e = HaarExpansion::analyze(&[2.5; 8], 1).unwrap();
        let f = TossFunction::lift(&e);
        let mut z = TossFunction::zeros(2, 1);
        z.constant_mut()[0] = 2.5;
        assert_eq!(f, z);
    }

    #[test]
    fn lifts_are_support_disjoint() {
        let mut rng = rand::rng();
        let e = HaarExpansion::random(3, 2, &mut rng);
        assert!(TossFunction::lift(&e).is_support_disjoint());
        assert!(!TossFunction::random(3, 1, &mut rng).is_support_disjoint());
    }

    #[test]
    fn weak_form_rejects_unreduced() {
        let mut rng = rand::rng();
        let e = HaarExpansion::random(2, 1, &mut rng);
        assert!(matches!(
            weak_form_check(&e, &e),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let e = HaarExpansion::zeros(9, 1);
        assert!(matches!(
            distribution_check(&e, 8),
            Err(LabError::Budget(_))
        ));
        let f = TossFunction::zeros(10, 1);
        assert!(matches!(f.expect_pairing(&f), Err(LabError::Budget(_))));
    }
}
