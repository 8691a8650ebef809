//! Dyadic intervals of `[0, 1)`, `L²`-normalised Haar expansions with values
//! in `ℝ^d`, and the shift operators acting on them.
//!
//! A Haar function is `h_I = |I|^{-1/2} (χ_{I₊} − χ_{I₋})` where the plus child
//! `I₊` is the right half of `I`. Step functions are stored as cell averages on
//! the uniform grid of `2^{K+1}` cells; values are cell-major, `d` reals per
//! cell.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::SpaceDescriptor;
use crate::sign::Sign;

/// The dyadic interval `[m·2^{-k}, (m+1)·2^{-k})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    depth: u32,
    position: u64,
}

/// `2^{k/2}`, computed exactly up to one rounding of `√2`.
pub fn dyadic_inv_sqrt_len(depth: u32) -> f64 {
    let even = 2f64.powi((depth / 2) as i32);
    if depth % 2 == 1 {
        even * SQRT_2
    } else {
        even
    }
}

impl DyadicInterval {
    pub const ROOT: DyadicInterval = DyadicInterval {
        depth: 0,
        position: 0,
    };

    pub fn new(depth: u32, position: u64) -> Result<Self> {
        if depth >= 63 || position >= (1u64 << depth) {
            return Err(LabError::MalformedInput(format!(
                "no dyadic interval at depth {depth}, position {position}"
            )));
        }
        Ok(Self { depth, position })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn length(&self) -> f64 {
        2f64.powi(-(self.depth as i32))
    }

    pub fn left(&self) -> f64 {
        self.position as f64 * self.length()
    }

    /// `|I|^{-1/2}`.
    pub fn inv_sqrt_len(&self) -> f64 {
        dyadic_inv_sqrt_len(self.depth)
    }

    pub fn contains(&self, x: f64) -> bool {
        let l = self.left();
        x >= l && x < l + self.length()
    }

    pub fn parent(&self) -> Option<Self> {
        (self.depth > 0).then(|| Self {
            depth: self.depth - 1,
            position: self.position / 2,
        })
    }

    pub fn child(&self, sign: Sign) -> Self {
        Self {
            depth: self.depth + 1,
            position: 2 * self.position + u64::from(sign.is_plus()),
        }
    }

    /// Which child of its parent this interval is; `None` for `I₀`.
    pub fn parity(&self) -> Option<Sign> {
        (self.depth > 0).then(|| Sign::from_bit(self.position % 2 == 1))
    }

    pub fn sibling(&self) -> Option<Self> {
        (self.depth > 0).then_some(Self {
            depth: self.depth,
            position: self.position ^ 1,
        })
    }

    /// Heap index: `2^k − 1 + m`.
    pub fn index(&self) -> usize {
        (1usize << self.depth) - 1 + self.position as usize
    }

    pub fn from_index(index: usize) -> Self {
        let depth = usize::BITS - 1 - (index + 1).leading_zeros();
        Self {
            depth,
            position: (index + 1 - (1usize << depth)) as u64,
        }
    }

    /// All intervals of depth `≤ max_depth`, in heap order.
    pub fn up_to_depth(max_depth: u32) -> impl Iterator<Item = DyadicInterval> {
        (0..(1usize << (max_depth + 1)) - 1).map(Self::from_index)
    }
}

/// `h_I(x)`.
pub fn haar_eval(interval: &DyadicInterval, x: f64) -> f64 {
    if !interval.contains(x) {
        return 0.0;
    }
    let mid = interval.left() + 0.5 * interval.length();
    let s = if x >= mid { 1.0 } else { -1.0 };
    s * interval.inv_sqrt_len()
}

/// A choice of sign `α_I` for every interval of depth `≤ depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    depth: usize,
    signs: Vec<Sign>,
}

impl SignPattern {
    pub fn constant(depth: usize, sign: Sign) -> Self {
        Self {
            depth,
            signs: vec![sign; (1 << (depth + 1)) - 1],
        }
    }

    /// Pattern whose `i`-th interval (heap order) gets bit `i` of `bits`.
    pub fn from_bits(depth: usize, bits: u64) -> Self {
        let n = (1 << (depth + 1)) - 1;
        Self {
            depth,
            signs: (0..n)
                .map(|i| Sign::from_bit((bits >> i) & 1 == 1))
                .collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Self {
        let n = (1 << (depth + 1)) - 1;
        Self {
            depth,
            signs: (0..n).map(|_| Sign::from_bit(rng.random())).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn get(&self, interval: &DyadicInterval) -> Option<Sign> {
        self.signs.get(interval.index()).copied()
    }
}

/// Truncated Haar expansion `⟨f⟩_{I₀} + Σ_{|I| ≥ 2^{-K}} (f, h_I) h_I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarExpansion {
    depth: usize,
    dim: usize,
    mean: Vec<f64>,
    /// Heap-ordered, `dim` reals per interval.
    coeffs: Vec<f64>,
}

impl HaarExpansion {
    pub fn zeros(depth: usize, dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            depth,
            dim,
            mean: vec![0.0; dim],
            coeffs: vec![0.0; ((1 << (depth + 1)) - 1) * dim],
        }
    }

    pub fn from_parts(depth: usize, dim: usize, mean: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 || mean.len() != dim {
            return Err(LabError::DimensionMismatch {
                expected: dim,
                actual: mean.len(),
            });
        }
        let want = ((1 << (depth + 1)) - 1) * dim;
        if coeffs.len() != want {
            return Err(LabError::DimensionMismatch {
                expected: want,
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            depth,
            dim,
            mean,
            coeffs,
        })
    }

    /// Random expansion with standard normal-ish entries (uniform on `[-1, 1]`).
    pub fn random<R: Rng + ?Sized>(depth: usize, dim: usize, rng: &mut R) -> Self {
        let mut e = Self::zeros(depth, dim);
        e.mean
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-1.0..1.0));
        e.coeffs
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-1.0..1.0));
        e
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        1 << (self.depth + 1)
    }

    pub fn interval_count(&self) -> usize {
        (1 << (self.depth + 1)) - 1
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn set_mean(&mut self, value: &[f64]) {
        self.mean.copy_from_slice(value);
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, interval: &DyadicInterval) -> &[f64] {
        let i = interval.index();
        &self.coeffs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coeff_mut(&mut self, interval: &DyadicInterval) -> &mut [f64] {
        let i = interval.index();
        &mut self.coeffs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn set_coeff(&mut self, interval: &DyadicInterval, value: &[f64]) {
        self.coeff_mut(interval).copy_from_slice(value);
    }

    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> {
        DyadicInterval::up_to_depth(self.depth as u32)
    }

    /// Mean and `h_{I₀}` coefficient both zero.
    pub fn is_reduced(&self) -> bool {
        self.mean.iter().all(|v| *v == 0.0)
            && self.coeff(&DyadicInterval::ROOT).iter().all(|v| *v == 0.0)
    }

    /// Cell averages on `2^{K+1}` cells → expansion of depth `K`.
    pub fn analyze(samples: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || !samples.len().is_multiple_of(dim) {
            return Err(LabError::MalformedInput(format!(
                "{} reals do not split into {dim}-vectors",
                samples.len()
            )));
        }
        let cells = samples.len() / dim;
        if cells < 2 || !cells.is_power_of_two() {
            return Err(LabError::MalformedInput(format!(
                "sample count {cells} is not a power of two ≥ 2"
            )));
        }
        let depth = cells.trailing_zeros() as usize - 1;
        let mut out = Self::zeros(depth, dim);
        let mut level = samples.to_vec();
        for k in (0..=depth).rev() {
            let count = 1usize << k;
            let scale = 0.5 / dyadic_inv_sqrt_len(k as u32);
            let mut coarse = vec![0.0; count * dim];
            for m in 0..count {
                let base = ((1 << k) - 1 + m) * dim;
                for c in 0..dim {
                    let minus = level[(2 * m) * dim + c];
                    let plus = level[(2 * m + 1) * dim + c];
                    coarse[m * dim + c] = 0.5 * (minus + plus);
                    out.coeffs[base + c] = scale * (plus - minus);
                }
            }
            level = coarse;
        }
        out.mean.copy_from_slice(&level);
        Ok(out)
    }

    /// Cell values of the step function, cell-major.
    pub fn synthesize(&self) -> Vec<f64> {
        let dim = self.dim;
        let mut level = self.mean.clone();
        for k in 0..=self.depth {
            let count = 1usize << k;
            let scale = dyadic_inv_sqrt_len(k as u32);
            let mut fine = vec![0.0; 2 * count * dim];
            for m in 0..count {
                let base = ((1 << k) - 1 + m) * dim;
                for c in 0..dim {
                    let avg = level[m * dim + c];
                    let jump = scale * self.coeffs[base + c];
                    fine[(2 * m) * dim + c] = avg - jump;
                    fine[(2 * m + 1) * dim + c] = avg + jump;
                }
            }
            level = fine;
        }
        level
    }

    /// Value on one cell by summing the series in depth order.
    pub fn eval_cell(&self, cell: usize) -> Vec<f64> {
        let mut value = self.mean.clone();
        let k_max = self.depth as u32;
        for k in 0..=k_max {
            let position = (cell >> (k_max + 1 - k)) as u64;
            let interval = DyadicInterval { depth: k, position };
            let toss = Sign::from_bit((cell >> (k_max - k)) & 1 == 1);
            let h = toss.value() * interval.inv_sqrt_len();
            for (v, c) in value.iter_mut().zip(self.coeff(&interval)) {
                *v += c * h;
            }
        }
        value
    }

    /// Dyadic Hilbert transform `S₀`: `h_{I±} ↦ ±h_{I∓}`, annihilating the
    /// mean and `h_{I₀}`.
    pub fn apply_s0(&self) -> Self {
        let mut out = Self::zeros(self.depth, self.dim);
        for interval in self.intervals().filter(|i| i.depth() > 0) {
            let parity = interval.parity().expect("depth > 0");
            let target = interval.sibling().expect("depth > 0");
            let s = parity.value();
            for (o, c) in out.coeff_mut(&target).iter_mut().zip(self.coeff(&interval)) {
                *o = s * c;
            }
        }
        out
    }

    /// Martingale transform `T_α`: mean ↦ 0, `h_I ↦ α_I h_I`.
    pub fn apply_talpha(&self, alpha: &SignPattern) -> Result<Self> {
        if alpha.depth() < self.depth {
            return Err(LabError::MalformedInput(format!(
                "sign pattern covers depth {} but the expansion has depth {}",
                alpha.depth(),
                self.depth
            )));
        }
        let mut out = self.clone();
        out.mean.iter_mut().for_each(|v| *v = 0.0);
        for interval in self.intervals() {
            let s = alpha.get(&interval).expect("covered").value();
            out.coeff_mut(&interval).iter_mut().for_each(|v| *v *= s);
        }
        Ok(out)
    }

    /// Classical Haar shift `h_I ↦ 2^{-1/2}(h_{I₋} − h_{I₊})`. Images of the
    /// deepest coefficients fall outside the truncation and are dropped.
    pub fn apply_classical_shift(&self) -> Self {
        let mut out = Self::zeros(self.depth, self.dim);
        for interval in self
            .intervals()
            .filter(|i| (i.depth() as usize) < self.depth)
        {
            let src = self.coeff(&interval).to_vec();
            for (sign, w) in [(Sign::Minus, FRAC_1_SQRT_2), (Sign::Plus, -FRAC_1_SQRT_2)] {
                let child = interval.child(sign);
                for (o, c) in out.coeff_mut(&child).iter_mut().zip(&src) {
                    *o += w * c;
                }
            }
        }
        out
    }

    /// `f̃ = f − (f, h_{I₀}) h_{I₀} − ⟨f⟩_{I₀} χ_{I₀}`.
    pub fn reduce_tilde(&self) -> Self {
        let mut out = self.clone();
        out.mean.iter_mut().for_each(|v| *v = 0.0);
        out.coeff_mut(&DyadicInterval::ROOT)
            .iter_mut()
            .for_each(|v| *v = 0.0);
        out
    }

    pub fn lp_norm(&self, space: &SpaceDescriptor) -> Result<f64> {
        if space.dim() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                actual: space.dim(),
            });
        }
        let weight = 1.0 / self.cells() as f64;
        Ok(space.field_norm(&self.synthesize(), weight))
    }

    /// `‖mean‖² + Σ_I ‖(f, h_I)‖²`.
    pub fn coefficient_energy(&self) -> f64 {
        self.mean.iter().chain(&self.coeffs).map(|v| v * v).sum()
    }

    /// `L²` inner product computed on the coefficient side.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.depth != other.depth || self.dim != other.dim {
            return Err(LabError::MalformedInput(
                "inner product of expansions with different shapes".into(),
            ));
        }
        Ok(self
            .mean
            .iter()
            .chain(&self.coeffs)
            .zip(other.mean.iter().chain(&other.coeffs))
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.mean.iter_mut().for_each(|v| *v *= s);
        out.coeffs.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mean
            .iter()
            .chain(&self.coeffs)
            .zip(other.mean.iter().chain(&other.coeffs))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_family() {
        let i = DyadicInterval::new(3, 5).unwrap();
        assert_eq!(i.parent().unwrap(), DyadicInterval::new(2, 2).unwrap());
        assert_eq!(i.child(Sign::Minus), DyadicInterval::new(4, 10).unwrap());
        assert_eq!(i.child(Sign::Plus), DyadicInterval::new(4, 11).unwrap());
        assert_eq!(i.sibling().unwrap().sibling().unwrap(), i);
        assert_eq!(i.parity(), Some(Sign::Plus));
        assert!((i.left() - 5.0 / 8.0).abs() < 1e-15);
        assert!(DyadicInterval::ROOT.sibling().is_none());
        assert!(DyadicInterval::new(2, 4).is_err());
        for idx in 0..200 {
            assert_eq!(DyadicInterval::from_index(idx).index(), idx);
        }
    }

    #[test]
    fn haar_values() {
        let root = DyadicInterval::ROOT;
        assert_eq!(haar_eval(&root, 0.25), -1.0);
        assert_eq!(haar_eval(&root, 0.75), 1.0);
        let left = DyadicInterval::new(1, 0).unwrap();
        assert!((haar_eval(&left, 0.1) + SQRT_2).abs() < 1e-15);
        assert_eq!(haar_eval(&left, 0.6), 0.0);
    }

    #[test]
    fn analyze_rejects_bad_counts() {
        assert!(HaarExpansion::analyze(&[1.0, 2.0, 3.0], 1).is_err());
        assert!(HaarExpansion::analyze(&[1.0], 1).is_err());
        assert!(HaarExpansion::analyze(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn indicator_of_right_half() {
        let e = HaarExpansion::analyze(&[0.0, 1.0], 1).unwrap();
        assert_eq!(e.mean(), &[0.5]);
        assert_eq!(e.coeff(&DyadicInterval::ROOT), &[0.5]);
    }

    #[test]
    fn constant_samples() {
        let e = HaarExpansion::analyze(&[3.0; 8], 1).unwrap();
        assert_eq!(e.mean(), &[3.0]);
        assert!(e.coefficients().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn synthesize_single_root_coefficient() {
        let mut e = HaarExpansion::zeros(0, 1);
        e.set_coeff(&DyadicInterval::ROOT, &[1.0]);
        assert_eq!(e.synthesize(), vec![-1.0, 1.0]);
    }

    #[test]
    fn s0_moves_coefficients_between_siblings() {
        let plus = DyadicInterval::new(1, 1).unwrap();
        let minus = DyadicInterval::new(1, 0).unwrap();
        let mut e = HaarExpansion::zeros(2, 1);
        e.set_coeff(&plus, &[1.0]);
        let s = e.apply_s0();
        assert_eq!(s.coeff(&minus), &[1.0]);
        assert_eq!(s.coeff(&plus), &[0.0]);

        let mut e = HaarExpansion::zeros(2, 1);
        e.set_coeff(&minus, &[1.0]);
        let s = e.apply_s0();
        assert_eq!(s.coeff(&plus), &[-1.0]);
    }

    #[test]
    fn talpha_signs() {
        let mut rng = rand::rng();
        let e = HaarExpansion::random(3, 2, &mut rng);
        let id = e
            .apply_talpha(&SignPattern::constant(3, Sign::Plus))
            .unwrap();
        assert_eq!(id, e.reduce_tilde_mean_only());
        let neg = e
            .apply_talpha(&SignPattern::constant(3, Sign::Minus))
            .unwrap();
        assert_eq!(neg.coefficients(), e.scaled(-1.0).coefficients());
        assert_eq!(neg.mean(), &[0.0, 0.0]);
        assert!(e
            .apply_talpha(&SignPattern::constant(2, Sign::Plus))
            .is_err());
    }

    impl HaarExpansion {
        fn reduce_tilde_mean_only(&self) -> Self {
            let mut out = self.clone();
            out.mean.iter_mut().for_each(|v| *v = 0.0);
            out
        }
    }

    #[test]
    fn classical_shift_root() {
        let mut e = HaarExpansion::zeros(2, 1);
        e.set_coeff(&DyadicInterval::ROOT, &[1.0]);
        let s = e.apply_classical_shift();
        assert!((s.coeff(&DyadicInterval::new(1, 0).unwrap())[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.coeff(&DyadicInterval::new(1, 1).unwrap())[0] + FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(
            HaarExpansion::zeros(2, 1).apply_classical_shift(),
            HaarExpansion::zeros(2, 1)
        );
    }

    #[test]
    fn reduce_tilde_cases() {
        let e = HaarExpansion::analyze(&[2.0; 4], 1).unwrap();
        assert_eq!(e.reduce_tilde(), HaarExpansion::zeros(1, 1));
        let mut e = HaarExpansion::zeros(2, 1);
        e.set_coeff(&DyadicInterval::new(2, 3).unwrap(), &[0.7]);
        assert_eq!(e.reduce_tilde(), e);
    }

    #[test]
    fn lp_norm_examples() {
        let one = HaarExpansion::analyze(&[1.0; 4], 1).unwrap();
        for p in [1.5, 2.0, 7.0] {
            let s = SpaceDescriptor::scalar(p).unwrap();
            assert!((one.lp_norm(&s).unwrap() - 1.0).abs() < 1e-15);
        }
        let ind = HaarExpansion::analyze(&[1.0, 0.0], 1).unwrap();
        let s = SpaceDescriptor::scalar(2.0).unwrap();
        assert!((ind.lp_norm(&s).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        let wrong = SpaceDescriptor::lq(2.0, 2.0, 3).unwrap();
        assert!(ind.lp_norm(&wrong).is_err());
    }
}
