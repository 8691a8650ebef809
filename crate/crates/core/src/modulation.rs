//! Spectrum bookkeeping and frequency modulation of toss functions.
//!
//! Every quarter-constant factor of a [`TossFunction`] is replaced by its
//! Fourier truncation, producing trigonometric polynomials in the angles.
//! Substituting `θ_j + n_j ψ` with the schedule `n_0 = 1`,
//! `n_{k+1} = 2 n_k N_k` separates the frequency bands so that the Hilbert
//! transform in `ψ` only sees the sign of the last frequency of each term.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::sign::Sign;
use crate::toss::TossFunction;

pub const DEFAULT_ORDER: usize = 9;
pub const MAX_MODULATION_DEPTH: usize = 5;

/// Relative size below which a Fourier coefficient is treated as zero.
const COEFF_FLOOR: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `i^k`.
fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(1/2π) ∫_{A_q} e^{−ilθ} dθ` for the quarter arc `A_q = [(q−2)π/2, (q−1)π/2)`.
pub fn quarter_fourier(l: i64, q: usize) -> Complex64 {
    if l == 0 {
        return Complex64::new(0.25, 0.0);
    }
    if l % 4 == 0 {
        return ZERO;
    }
    let q = q as i64;
    // e^{−il(q−2)π/2} = i^{−l(q−2)}
    let num = i_pow(-l * (q - 2)) - i_pow(-l * (q - 1));
    num / Complex64::new(0.0, TAU * l as f64)
}

/// Fourier coefficient `l` of `φ^σ`.
pub fn generator_coeff(sigma: Sign, l: i64) -> Complex64 {
    (0..4)
        .map(|q| crate::circle::phi_on_quarter(sigma, q) * quarter_fourier(l, q))
        .sum()
}

/// The paired sequences `(N_k)` and `(n_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulationSchedule {
    bounds: Vec<u64>,
    freqs: Vec<u64>,
}

impl ModulationSchedule {
    /// `N_k` for `k = 0, …, len − 1`.
    pub fn bounds(&self) -> &[u64] {
        &self.bounds
    }

    /// `n_k` for `k = 0, …, len`.
    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }
}

/// `n_0 = 1`, `n_{k+1} = 2 n_k N_k`, with overflow checking.
pub fn build_schedule(bounds: &[u64]) -> Result<ModulationSchedule> {
    if let Some(k) = bounds.iter().position(|n| *n == 0) {
        return Err(LabError::MalformedInput(format!(
            "N_{k} must be at least 1"
        )));
    }
    let mut freqs = vec![1u64];
    for (k, nk) in bounds.iter().enumerate() {
        let next = freqs[k]
            .checked_mul(2)
            .and_then(|v| v.checked_mul(*nk))
            .ok_or_else(|| LabError::Budget(format!("n_{} overflows", k + 1)))?;
        freqs.push(next);
    }
    Ok(ModulationSchedule {
        bounds: bounds.to_vec(),
        freqs,
    })
}

/// One term `x · e^{i Σ l_j θ_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub freqs: Vec<i64>,
    pub coeff: Vec<Complex64>,
}

/// Truncated Fourier series in `θ_0, …, θ_{m−1}` of a function tabulated on
/// quarter prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSeries {
    orders: Vec<usize>,
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl PrefixSeries {
    /// `table` is prefix-major (`4^m` prefixes, `q_0` least significant),
    /// `dim` reals per prefix; `orders[j]` truncates variable `j`.
    pub fn from_table(table: &[f64], orders: &[usize], dim: usize) -> Self {
        let vars = orders.len();
        let mut data: Vec<Complex64> = table.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let mut extents = vec![4usize; vars];
        for j in 0..vars {
            let m = orders[j] as i64;
            let width = 2 * orders[j] + 1;
            let inner: usize = extents[..j].iter().product::<usize>() * dim;
            let outer: usize = extents[j + 1..].iter().product();
            let basis: Vec<[Complex64; 4]> = (-m..=m)
                .map(|l| [0, 1, 2, 3].map(|q| quarter_fourier(l, q)))
                .collect();
            let mut next = vec![ZERO; outer * width * inner];
            for o in 0..outer {
                for (li, row) in basis.iter().enumerate() {
                    let dst = (o * width + li) * inner;
                    for (q, a) in row.iter().enumerate() {
                        if *a == ZERO {
                            continue;
                        }
                        let src = (o * 4 + q) * inner;
                        for i in 0..inner {
                            next[dst + i] += data[src + i] * a;
                        }
                    }
                }
            }
            data = next;
            extents[j] = width;
        }
        let biggest = data.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = COEFF_FLOOR * biggest;
        let count: usize = extents.iter().product();
        let mut terms = Vec::new();
        for flat in 0..count {
            let coeff = &data[flat * dim..(flat + 1) * dim];
            if biggest == 0.0 || coeff.iter().all(|c| c.norm() <= floor) {
                continue;
            }
            let mut rest = flat;
            let freqs = (0..vars)
                .map(|j| {
                    let idx = rest % extents[j];
                    rest /= extents[j];
                    idx as i64 - orders[j] as i64
                })
                .collect();
            terms.push(TrigTerm {
                freqs,
                coeff: coeff.to_vec(),
            });
        }
        Self {
            orders: orders.to_vec(),
            dim,
            terms,
        }
    }

    /// A constant in zero variables.
    pub fn constant(value: &[f64]) -> Self {
        let terms = if value.iter().all(|v| *v == 0.0) {
            Vec::new()
        } else {
            vec![TrigTerm {
                freqs: Vec::new(),
                coeff: value.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            }]
        };
        Self {
            orders: Vec::new(),
            dim: value.len(),
            terms,
        }
    }

    pub fn vars(&self) -> usize {
        self.orders.len()
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn eval(&self, angles: &[f64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for t in &self.terms {
            let phase: f64 = t.freqs.iter().zip(angles).map(|(l, a)| *l as f64 * a).sum();
            let e = Complex64::from_polar(1.0, phase);
            for (o, c) in out.iter_mut().zip(&t.coeff) {
                *o += c * e;
            }
        }
        out
    }
}

/// Truncated series of `φ^σ` (or of `Hφ^σ` when `hilbert` is set), without
/// the vanishing zero mode.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSeries {
    pub sigma: Sign,
    pub hilbert: bool,
    pub coeffs: Vec<(i64, Complex64)>,
}

impl GeneratorSeries {
    pub fn new(sigma: Sign, order: usize, hilbert: bool) -> Self {
        let m = order as i64;
        let coeffs = (-m..=m)
            .filter(|l| *l != 0)
            .map(|l| {
                let c = generator_coeff(sigma, l);
                let c = if hilbert {
                    Complex64::new(0.0, -(l.signum() as f64)) * c
                } else {
                    c
                };
                (l, c)
            })
            .filter(|(_, c)| *c != ZERO)
            .collect();
        Self {
            sigma,
            hilbert,
            coeffs,
        }
    }

    pub fn hilbert_image(&self) -> Self {
        assert!(!self.hilbert, "already transformed");
        Self {
            sigma: self.sigma,
            hilbert: true,
            coeffs: self
                .coeffs
                .iter()
                .map(|(l, c)| (*l, Complex64::new(0.0, -(l.signum() as f64)) * c))
                .collect(),
        }
    }

    pub fn eval(&self, angle: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(l, c)| c * Complex64::from_polar(1.0, *l as f64 * angle))
            .sum()
    }

    pub fn max_freq(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|(l, _)| l.unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

/// One increment term `dF_k^σ(θ⃗_k) φ^σ(θ_{k+1})` expanded into a
/// trigonometric polynomial in `θ_0, …, θ_{k+1}`. Level `−1` is the root term
/// `dF_{−1} φ⁺(θ_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    level: isize,
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn product(level: isize, prefix: &PrefixSeries, generator: &GeneratorSeries) -> Self {
        let mut terms = Vec::with_capacity(prefix.terms.len() * generator.coeffs.len());
        for t in &prefix.terms {
            for (l, b) in &generator.coeffs {
                let mut freqs = t.freqs.clone();
                freqs.push(*l);
                terms.push(TrigTerm {
                    freqs,
                    coeff: t.coeff.iter().map(|x| x * b).collect(),
                });
            }
        }
        Self {
            level,
            dim: prefix.dim,
            terms,
        }
    }

    pub fn level(&self) -> isize {
        self.level
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    /// `|Σ_{j≤k} l_j n_j| < |l_{k+1} n_{k+1}|` for every term.
    pub fn check_dominance(&self, schedule: &ModulationSchedule) -> Result<()> {
        for t in &self.terms {
            let (low, high) = split_frequency(&t.freqs, schedule)?;
            if low.abs() >= high.abs() {
                return Err(LabError::ScheduleTooSmall {
                    level: self.level,
                    low: low.abs(),
                    high: high.abs(),
                });
            }
        }
        Ok(())
    }
}

fn split_frequency(freqs: &[i64], schedule: &ModulationSchedule) -> Result<(i128, i128)> {
    let n = schedule.freqs();
    if freqs.len() > n.len() {
        return Err(LabError::MalformedInput(format!(
            "schedule has {} frequencies, term needs {}",
            n.len(),
            freqs.len()
        )));
    }
    let last = freqs.len() - 1;
    let low = freqs[..last]
        .iter()
        .zip(n)
        .map(|(l, nj)| *l as i128 * *nj as i128)
        .sum();
    Ok((low, freqs[last] as i128 * n[last] as i128))
}

/// A trigonometric polynomial in the single variable `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiPolynomial {
    dim: usize,
    terms: BTreeMap<i128, Vec<Complex64>>,
}

impl PsiPolynomial {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn terms(&self) -> &BTreeMap<i128, Vec<Complex64>> {
        &self.terms
    }

    fn accumulate(&mut self, freq: i128, coeff: impl Iterator<Item = Complex64>) {
        let dim = self.dim;
        let slot = self.terms.entry(freq).or_insert_with(|| vec![ZERO; dim]);
        for (s, c) in slot.iter_mut().zip(coeff) {
            *s += c;
        }
    }

    pub fn add_constant(&mut self, value: &[f64]) {
        self.accumulate(0, value.iter().map(|v| Complex64::new(*v, 0.0)));
    }

    pub fn merge(&mut self, other: &PsiPolynomial) {
        for (w, c) in &other.terms {
            self.accumulate(*w, c.iter().copied());
        }
    }

    pub fn eval(&self, psi: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (w, c) in &self.terms {
            let e = Complex64::from_polar(1.0, reduce_phase(*w, psi));
            for (o, x) in out.iter_mut().zip(c) {
                *o += x * e;
            }
        }
        out
    }

    /// `E^ψ ⟨A(ψ), B(ψ)⟩ = Σ_ω ⟨a_ω, b_{−ω}⟩` (real part).
    pub fn mean_pairing(&self, other: &PsiPolynomial) -> f64 {
        let mut acc = 0.0;
        for (w, a) in &self.terms {
            if let Some(b) = other.terms.get(&-w) {
                acc += a.iter().zip(b).map(|(x, y)| (x * y).re).sum::<f64>();
            }
        }
        acc
    }
}

/// `ω ψ` reduced modulo `2π` with the integer part of `ω` split off first.
fn reduce_phase(freq: i128, psi: f64) -> f64 {
    let w = freq as f64;
    let p = w * psi;
    let err = w.mul_add(psi, -p);
    p.rem_euclid(TAU) + err
}

/// `ψ ↦ term(θ⃗ + n⃗ψ)` as a polynomial in `ψ`. Fails if the schedule does not
/// dominate the term's spectrum.
pub fn modulate(
    poly: &TrigPolynomial,
    schedule: &ModulationSchedule,
    thetas: &[f64],
) -> Result<PsiPolynomial> {
    poly.check_dominance(schedule)?;
    let mut out = PsiPolynomial::zeros(poly.dim);
    for t in &poly.terms {
        let (low, high) = split_frequency(&t.freqs, schedule)?;
        let phase: f64 = t.freqs.iter().zip(thetas).map(|(l, a)| *l as f64 * a).sum();
        let e = Complex64::from_polar(1.0, phase);
        out.accumulate(low + high, t.coeff.iter().map(|c| c * e));
    }
    Ok(out)
}

/// Multiplier `−i·sgn(ω)` applied to every frequency of `p`.
pub fn hilbert_in_psi(p: &PsiPolynomial) -> PsiPolynomial {
    let mut out = PsiPolynomial::zeros(p.dim);
    for (w, c) in &p.terms {
        if *w == 0 {
            continue;
        }
        let m = Complex64::new(0.0, -(w.signum() as f64));
        out.terms.insert(*w, c.iter().map(|x| x * m).collect());
    }
    out
}

/// One level of a truncated toss function: `dF_k^σ` as prefix series.
#[derive(Debug, Clone, PartialEq)]
struct TruncatedLevel {
    plus: PrefixSeries,
    minus: PrefixSeries,
}

/// A [`TossFunction`] with every quarter-constant factor replaced by its
/// Fourier truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedToss {
    orders: Vec<usize>,
    dim: usize,
    constant: Vec<f64>,
    root: PrefixSeries,
    levels: Vec<TruncatedLevel>,
    generators: Vec<[GeneratorSeries; 2]>,
}

impl TruncatedToss {
    /// Uniform truncation order `order` in every angle.
    pub fn new(f: &TossFunction, order: usize) -> Result<Self> {
        Self::with_orders(f, &vec![order; f.angles()])
    }

    /// `orders[j]` truncates the angle `θ_j`.
    pub fn with_orders(f: &TossFunction, orders: &[usize]) -> Result<Self> {
        if orders.len() != f.angles() {
            return Err(LabError::DimensionMismatch {
                expected: f.angles(),
                actual: orders.len(),
            });
        }
        if f.depth() > MAX_MODULATION_DEPTH {
            return Err(LabError::Budget(format!(
                "modulation depth {} exceeds {MAX_MODULATION_DEPTH}",
                f.depth()
            )));
        }
        let levels = (0..f.depth())
            .map(|k| TruncatedLevel {
                plus: PrefixSeries::from_table(
                    f.increment_table(k, Sign::Plus),
                    &orders[..=k],
                    f.dim(),
                ),
                minus: PrefixSeries::from_table(
                    f.increment_table(k, Sign::Minus),
                    &orders[..=k],
                    f.dim(),
                ),
            })
            .collect();
        let generators = orders
            .iter()
            .map(|m| {
                [
                    GeneratorSeries::new(Sign::Plus, *m, false),
                    GeneratorSeries::new(Sign::Minus, *m, false),
                ]
            })
            .collect();
        Ok(Self {
            orders: orders.to_vec(),
            dim: f.dim(),
            constant: f.constant().to_vec(),
            root: PrefixSeries::constant(f.root()),
            levels,
            generators,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn generator(&self, var: usize, sigma: Sign) -> &GeneratorSeries {
        &self.generators[var][usize::from(!sigma.is_plus())]
    }

    fn prefix(&self, level: usize, sigma: Sign) -> &PrefixSeries {
        match sigma {
            Sign::Plus => &self.levels[level].plus,
            Sign::Minus => &self.levels[level].minus,
        }
    }

    /// All increment polynomials: the root term (level −1) followed by
    /// `(k, σ)` for `k = 0, …, K−1` and `σ = +, −`.
    pub fn polynomials(&self) -> Vec<TrigPolynomial> {
        let mut out = vec![TrigPolynomial::product(
            -1,
            &self.root,
            self.generator(0, Sign::Plus),
        )];
        for k in 0..self.depth() {
            for sigma in Sign::BOTH {
                out.push(TrigPolynomial::product(
                    k as isize,
                    self.prefix(k, sigma),
                    self.generator(k + 1, sigma),
                ));
            }
        }
        out
    }

    /// Largest `|l_j|` occurring in any term, for every angle `θ_j`.
    pub fn variable_spectra(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.orders.len()];
        for poly in self.polynomials() {
            for t in poly.terms() {
                for (j, l) in t.freqs.iter().enumerate() {
                    out[j] = out[j].max(l.unsigned_abs());
                }
            }
        }
        out
    }

    /// `N_k = max(1, Σ_{j≤k} max|l_j|)` for `k = 0, …, K−1`.
    pub fn spectrum_bounds(&self) -> Vec<u64> {
        let spectra = self.variable_spectra();
        let mut acc = 0u64;
        (0..self.depth())
            .map(|k| {
                acc += spectra[k];
                acc.max(1)
            })
            .collect()
    }

    /// `F_M(θ)` (real).
    pub fn eval(&self, angles: &[f64]) -> Vec<f64> {
        self.eval_inner(angles, false)
    }

    /// `F^H_M(θ)`: generators replaced by the multiplier image.
    pub fn eval_hilbert(&self, angles: &[f64]) -> Vec<f64> {
        self.eval_inner(angles, true)
    }

    fn eval_inner(&self, angles: &[f64], hilbert: bool) -> Vec<f64> {
        let mut out = if hilbert {
            vec![0.0; self.dim]
        } else {
            self.constant.clone()
        };
        let gen = |var: usize, sigma: Sign| {
            let g = self.generator(var, sigma);
            if hilbert {
                g.hilbert_image().eval(angles[var])
            } else {
                g.eval(angles[var])
            }
        };
        let g0 = gen(0, Sign::Plus);
        for (o, r) in out.iter_mut().zip(self.root.eval(&[])) {
            *o += (r * g0).re;
        }
        for k in 0..self.depth() {
            for sigma in Sign::BOTH {
                let g = gen(k + 1, sigma);
                for (o, d) in out
                    .iter_mut()
                    .zip(self.prefix(k, sigma).eval(&angles[..=k]))
                {
                    *o += (d * g).re;
                }
            }
        }
        out
    }

    /// `Φ_{θ,N}(ψ) = F_M(θ⃗ + n⃗ψ)` as a polynomial in `ψ`.
    pub fn modulated(
        &self,
        schedule: &ModulationSchedule,
        thetas: &[f64],
    ) -> Result<PsiPolynomial> {
        let mut out = PsiPolynomial::zeros(self.dim);
        out.add_constant(&self.constant);
        for poly in self.polynomials() {
            out.merge(&modulate(&poly, schedule, thetas)?);
        }
        Ok(out)
    }
}

/// `N_k` for the order-`order` truncation of `f`.
pub fn spectrum_bounds(f: &TossFunction, order: usize) -> Result<Vec<u64>> {
    Ok(TruncatedToss::new(f, order)?.spectrum_bounds())
}

/// Result of [`verify_modulation_identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationReport {
    pub max_residual: f64,
    pub terms_checked: usize,
    pub probes: usize,
    pub schedule: ModulationSchedule,
}

/// Checks `H_ψ(dF(θ⃗+n⃗ψ) φ^σ(θ_{k+1}+n_{k+1}ψ)) = dF(θ⃗+n⃗ψ) Hφ^σ(θ_{k+1}+n_{k+1}ψ)`
/// for every increment of the truncation, with the minimal admissible
/// schedule. The left side is modulated first and transformed in `ψ`; the
/// right side evaluates the two factors separately at the shifted angles.
pub fn verify_modulation_identity(
    f: &TossFunction,
    order: usize,
    thetas: &[Vec<f64>],
    psis: &[f64],
) -> Result<ModulationReport> {
    let trunc = TruncatedToss::new(f, order)?;
    let schedule = build_schedule(&trunc.spectrum_bounds())?;
    verify_modulation_identity_with(&trunc, &schedule, thetas, psis)
}

pub fn verify_modulation_identity_with(
    trunc: &TruncatedToss,
    schedule: &ModulationSchedule,
    thetas: &[Vec<f64>],
    psis: &[f64],
) -> Result<ModulationReport> {
    let n = schedule.freqs();
    if n.len() < trunc.depth() + 1 {
        return Err(LabError::MalformedInput(
            "schedule shorter than the depth".into(),
        ));
    }
    let mut max_residual: f64 = 0.0;
    let mut terms_checked = 0;
    let polys = trunc.polynomials();
    for poly in &polys {
        terms_checked += poly.terms().len();
    }
    for theta in thetas {
        if theta.len() != trunc.depth() + 1 {
            return Err(LabError::DimensionMismatch {
                expected: trunc.depth() + 1,
                actual: theta.len(),
            });
        }
        for (i, poly) in polys.iter().enumerate() {
            let lhs = hilbert_in_psi(&modulate(poly, schedule, theta)?);
            // polynomials() lists the root, then (k, +), (k, −) per level
            let (prefix, var, sigma) = if i == 0 {
                (&trunc.root, 0usize, Sign::Plus)
            } else {
                let k = (i - 1) / 2;
                let sigma = Sign::BOTH[(i - 1) % 2];
                (trunc.prefix(k, sigma), k + 1, sigma)
            };
            let h_gen = trunc.generator(var, sigma).hilbert_image();
            for psi in psis {
                let shifted: Vec<f64> = (0..=var)
                    .map(|j| theta[j] + (n[j] as f64 * psi).rem_euclid(TAU))
                    .collect();
                let left = lhs.eval(*psi);
                let d = prefix.eval(&shifted[..var]);
                let g = h_gen.eval(shifted[var]);
                for (a, b) in left.iter().zip(&d) {
                    max_residual = max_residual.max((a - b * g).norm());
                }
            }
        }
    }
    Ok(ModulationReport {
        max_residual,
        terms_checked,
        probes: thetas.len() * psis.len(),
        schedule: schedule.clone(),
    })
}

/// Uniform grid of `points` angles on `[−π, π)`.
fn angle_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -PI + TAU * i as f64 / points as f64)
        .collect()
}

fn for_each_grid_point(vars: usize, points: usize, mut f: impl FnMut(&[f64])) {
    let grid = angle_grid(points);
    let total = points.pow(vars as u32);
    let mut angles = vec![0.0; vars];
    for flat in 0..total {
        let mut rest = flat;
        for a in angles.iter_mut() {
            *a = grid[rest % points];
            rest /= points;
        }
        f(&angles);
    }
}

fn grid_points_for(f: &TruncatedToss, g: &TruncatedToss) -> usize {
    let m = f.orders.iter().chain(&g.orders).copied().max().unwrap_or(0);
    2 * m + 2
}

/// `E^θ ⟨Φ^H_{θ,N}(ψ), Γ_{θ,N}(ψ)⟩` for one `ψ`, by tensor-grid quadrature
/// in `θ` that is exact for the truncated polynomials.
pub fn modulated_pairing(
    f: &TruncatedToss,
    g: &TruncatedToss,
    schedule: &ModulationSchedule,
    psi: f64,
) -> Result<f64> {
    check_pair(f, g, schedule)?;
    for poly in f.polynomials().iter().chain(&g.polynomials()) {
        poly.check_dominance(schedule)?;
    }
    let n = schedule.freqs();
    let vars = f.depth() + 1;
    let points = grid_points_for(f, g);
    let mut acc = 0.0;
    let mut shifted = vec![0.0; vars];
    for_each_grid_point(vars, points, |angles| {
        for j in 0..vars {
            shifted[j] = angles[j] + (n[j] as f64 * psi).rem_euclid(TAU);
        }
        let a = f.eval_hilbert(&shifted);
        let b = g.eval(&shifted);
        acc += a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
    });
    Ok(acc / points.pow(vars as u32) as f64)
}

/// `E^θ ⟨F^H_M(θ), G_M(θ)⟩` without modulation.
pub fn unmodulated_pairing(f: &TruncatedToss, g: &TruncatedToss) -> Result<f64> {
    let schedule = build_schedule(&vec![1; f.depth()])?;
    check_pair(f, g, &schedule)?;
    let vars = f.depth() + 1;
    let points = grid_points_for(f, g);
    let mut acc = 0.0;
    for_each_grid_point(vars, points, |angles| {
        let a = f.eval_hilbert(angles);
        let b = g.eval(angles);
        acc += a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
    });
    Ok(acc / points.pow(vars as u32) as f64)
}

/// `E^ψ E^θ ⟨H_ψ Φ_{θ,N}(ψ), Γ_{θ,N}(ψ)⟩`: the Hilbert transform is taken in
/// `ψ` on the whole modulated function and the `ψ`-average is exact
/// (Parseval on the collected spectrum).
pub fn psi_averaged_pairing(
    f: &TruncatedToss,
    g: &TruncatedToss,
    schedule: &ModulationSchedule,
) -> Result<f64> {
    check_pair(f, g, schedule)?;
    let vars = f.depth() + 1;
    let points = grid_points_for(f, g);
    let mut acc = 0.0;
    let mut failure = None;
    for_each_grid_point(vars, points, |angles| {
        if failure.is_some() {
            return;
        }
        let phi = f.modulated(schedule, angles);
        let gamma = g.modulated(schedule, angles);
        match (phi, gamma) {
            (Ok(phi), Ok(gamma)) => acc += hilbert_in_psi(&phi).mean_pairing(&gamma),
            (Err(e), _) | (_, Err(e)) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(acc / points.pow(vars as u32) as f64)
}

fn check_pair(f: &TruncatedToss, g: &TruncatedToss, schedule: &ModulationSchedule) -> Result<()> {
    if f.dim != g.dim {
        return Err(LabError::DimensionMismatch {
            expected: f.dim,
            actual: g.dim,
        });
    }
    if f.depth() != g.depth() {
        return Err(LabError::MalformedInput("depth mismatch".into()));
    }
    if schedule.freqs().len() < f.depth() + 1 {
        return Err(LabError::MalformedInput(
            "schedule shorter than the depth".into(),
        ));
    }
    Ok(())
}
