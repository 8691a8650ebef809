//! Functions on the torus `[−π, π)`, the Hilbert transform as the Fourier
//! multiplier `−i·sgn(n)` and as a closed-form kernel, the square waves
//! `φ⁺ = sign cos`, `φ⁻ = sign sin`, and averaging over quarter arcs.
//!
//! Quarter arcs are indexed `0..4` for `A_{−2}, A_{−1}, A_0, A_1`, where
//! `A_i = [iπ/2, iπ/2 + π/2)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::quadrature::{integrate, integrate_split, QuadratureOptions};
use crate::sign::Sign;

/// Left endpoints of the four quarter arcs.
pub const QUARTER_STARTS: [f64; 4] = [-PI, -FRAC_PI_2, 0.0, FRAC_PI_2];

/// Wraps an angle into `[−π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y >= PI {
        y - TAU
    } else {
        y
    }
}

/// Index of the quarter arc containing `θ`.
pub fn quarter_of(theta: f64) -> usize {
    let t = wrap_angle(theta);
    (((t + PI) / FRAC_PI_2).floor() as usize).min(3)
}

/// `φ⁺(θ) = sign cos θ`, `φ⁻(θ) = sign sin θ`; `+1` at the zeros.
pub fn phi(sigma: Sign, theta: f64) -> f64 {
    let v = match sigma {
        Sign::Plus => theta.cos(),
        Sign::Minus => theta.sin(),
    };
    Sign::of(v).value()
}

/// Value of `φ^σ` on quarter `q`. `φ⁺ = (−, +, +, −)`, `φ⁻ = (−, −, +, +)`.
pub fn phi_on_quarter(sigma: Sign, q: usize) -> f64 {
    const PLUS: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    const MINUS: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
    match sigma {
        Sign::Plus => PLUS[q],
        Sign::Minus => MINUS[q],
    }
}

/// A finite Fourier series `Σ_{|n| ≤ N} c_n e^{inθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSeries {
    order: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralSeries {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * order + 1],
        }
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let n = order as i64;
        Self {
            order,
            coeffs: (-n..=n).map(&mut f).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.order as i64) as usize]
    }

    pub fn set_coeff(&mut self, n: i64, value: Complex64) {
        let i = (n + self.order as i64) as usize;
        self.coeffs[i] = value;
    }

    /// `c_{−n} = conj(c_n)` for all `n`, to `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.order as i64;
        (0..=n).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
    }

    /// Real part of the series at `θ`.
    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.order as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            acc += self.coeff(k) * Complex64::from_polar(1.0, k as f64 * theta);
        }
        acc.re
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.max(other.order);
        Self::from_fn(order, |n| self.coeff(n) + other.coeff(n))
    }
}

/// Applies `c_n ↦ −i·sgn(n)·c_n`.
pub fn hilbert_multiplier(f: &SpectralSeries) -> SpectralSeries {
    let minus_i = Complex64::new(0.0, -1.0);
    SpectralSeries::from_fn(f.order(), |n| minus_i * (n.signum() as f64) * f.coeff(n))
}

/// Fourier coefficients of the indicator of the arc `[a, b)`.
pub fn arc_series(a: f64, b: f64, order: usize) -> SpectralSeries {
    SpectralSeries::from_fn(order, |n| {
        if n == 0 {
            Complex64::new((b - a) / TAU, 0.0)
        } else {
            let nf = n as f64;
            let num = Complex64::from_polar(1.0, -nf * a) - Complex64::from_polar(1.0, -nf * b);
            num / Complex64::new(0.0, TAU * nf)
        }
    })
}

fn phi_series(sigma: Sign, order: usize) -> SpectralSeries {
    let arc = match sigma {
        Sign::Plus => arc_series(-FRAC_PI_2, FRAC_PI_2, order),
        Sign::Minus => arc_series(0.0, PI, order),
    };
    let mut s = arc.scaled(Complex64::new(2.0, 0.0));
    s.set_coeff(0, s.coeff(0) - 1.0);
    s
}

/// Closed-form evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedFunction {
    Phi(Sign),
    /// `g = H χ_{(−π/2, π/2)}`.
    G,
    HilbertPhi(Sign),
    /// Indicator of the arc `[start, end)` with `−π ≤ start < end ≤ π`.
    Arc {
        start: f64,
        end: f64,
    },
}

impl NamedFunction {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match *self {
            NamedFunction::Phi(s) => Ok(phi(s, wrap_angle(x))),
            NamedFunction::G => eval_g(x),
            NamedFunction::HilbertPhi(s) => eval_h_phi(s, x),
            NamedFunction::Arc { start, end } => {
                let t = wrap_angle(x);
                Ok(if t >= start && t < end { 1.0 } else { 0.0 })
            }
        }
    }

    /// Order-`order` Fourier truncation.
    pub fn spectral(&self, order: usize) -> SpectralSeries {
        match *self {
            NamedFunction::Phi(s) => phi_series(s, order),
            NamedFunction::G => hilbert_multiplier(&arc_series(-FRAC_PI_2, FRAC_PI_2, order)),
            NamedFunction::HilbertPhi(s) => hilbert_multiplier(&phi_series(s, order)),
            NamedFunction::Arc { start, end } => arc_series(start, end, order),
        }
    }

    /// Points in `[−π, π)` where the function jumps or blows up.
    pub fn singularities(&self) -> Vec<f64> {
        match *self {
            NamedFunction::Phi(Sign::Plus)
            | NamedFunction::G
            | NamedFunction::HilbertPhi(Sign::Plus) => vec![-FRAC_PI_2, FRAC_PI_2],
            NamedFunction::Phi(Sign::Minus) | NamedFunction::HilbertPhi(Sign::Minus) => {
                vec![-PI, 0.0]
            }
            NamedFunction::Arc { start, end } => vec![start, wrap_angle(end)],
        }
    }
}

/// A function on the torus, either as a finite Fourier series or as a
/// closed-form evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum CircleFunction {
    Spectral(SpectralSeries),
    Named(NamedFunction),
}

impl CircleFunction {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            CircleFunction::Spectral(s) => Ok(s.eval(x)),
            CircleFunction::Named(n) => n.eval(x),
        }
    }
}

/// `g(x) = (1/π) ln |sin((x + π/2)/2) / sin((x − π/2)/2)|`, the conjugate
/// function of `χ_{(−π/2, π/2)}` under the multiplier `−i·sgn(n)`.
pub fn eval_g(x: f64) -> Result<f64> {
    let t = wrap_angle(x);
    let num = ((t + FRAC_PI_2) / 2.0).sin();
    let den = ((t - FRAC_PI_2) / 2.0).sin();
    if num == 0.0 || den == 0.0 {
        return Err(LabError::Singularity { x });
    }
    Ok((num / den).abs().ln() / PI)
}

/// `Hφ⁺(x) = g(x) − g(x + π)` and `Hφ⁻(x) = g(x − π/2) − g(x + π/2)`.
pub fn eval_h_phi(sigma: Sign, x: f64) -> Result<f64> {
    let (a, b) = match sigma {
        Sign::Plus => (x, x + PI),
        Sign::Minus => (x - FRAC_PI_2, x + FRAC_PI_2),
    };
    let ga = eval_g(wrap_angle(a)).map_err(|_| LabError::Singularity { x })?;
    let gb = eval_g(wrap_angle(b)).map_err(|_| LabError::Singularity { x })?;
    Ok(ga - gb)
}

/// Averages `⟨f⟩_{A_i}` over the four quarter arcs, in the order
/// `A_{−2}, A_{−1}, A_0, A_1`.
pub fn project_quarters<F>(f: F, abs_tol: f64) -> Result<[f64; 4]>
where
    F: Fn(f64) -> Result<f64>,
{
    let opts = QuadratureOptions {
        abs_tol: abs_tol * FRAC_PI_2,
        ..QuadratureOptions::default()
    };
    let mut out = [0.0; 4];
    for (q, start) in QUARTER_STARTS.iter().enumerate() {
        let r = integrate(&f, *start, start + FRAC_PI_2, opts)?;
        out[q] = r.value / FRAC_PI_2;
    }
    Ok(out)
}

/// Quarter averages of a [`CircleFunction`].
pub fn project_quarters_of(f: &CircleFunction, abs_tol: f64) -> Result<[f64; 4]> {
    project_quarters(|x| f.eval(x), abs_tol)
}

/// Step function on the torus taking the value `values[q]` on quarter `q`.
pub fn quarter_step(values: [f64; 4]) -> impl Fn(f64) -> Result<f64> {
    move |x| Ok(values[quarter_of(x)])
}

/// `c₀` by adaptive quadrature: the average of `Hφ⁺` over `A_0 = [0, π/2)`.
pub fn c0_quadrature(abs_tol: f64) -> Result<f64> {
    let opts = QuadratureOptions {
        abs_tol: abs_tol * FRAC_PI_2,
        ..QuadratureOptions::default()
    };
    let r = integrate(|x| eval_h_phi(Sign::Plus, x), 0.0, FRAC_PI_2, opts)?;
    Ok(r.value / FRAC_PI_2)
}

/// `c₀ = (8/π²) Σ_{k ≥ 0} (−1)^k / (2k+1)²`, summed until the first omitted
/// term is below `tail`.
pub fn c0_series(tail: f64) -> f64 {
    // Alternating series: the remainder is bounded by the first omitted term.
    let terms = ((1.0 / tail.sqrt() - 1.0) / 2.0).ceil() as u64 + 1;
    // Summed from the small end for accuracy.
    let mut acc = 0.0;
    for k in (0..terms).rev() {
        let d = (2 * k + 1) as f64;
        let t = 1.0 / (d * d);
        if k % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    8.0 * acc / (PI * PI)
}

/// Agreement required between the two routes to `c₀`.
pub const C0_AGREEMENT: f64 = 1e-9;

/// The proportionality constant in `π Hφ^σ = c₀ S₀ φ^σ`, computed by
/// quadrature and cross-checked against the alternating series.
pub fn compute_c0() -> Result<f64> {
    static CACHE: OnceLock<std::result::Result<f64, LabError>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let quad = c0_quadrature(1e-12)?;
            let series = c0_series(1e-13);
            if (quad - series).abs() > C0_AGREEMENT {
                return Err(LabError::InternalConsistency(format!(
                    "c0 by quadrature {quad} and by series {series} disagree"
                )));
            }
            Ok(quad)
        })
        .clone()
}

/// Quarter averages of `Hφ⁺` and `Hφ⁻`, computed once per process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarterMoments {
    pub plus: [f64; 4],
    pub minus: [f64; 4],
}

impl QuarterMoments {
    pub fn compute(abs_tol: f64) -> Result<Self> {
        Ok(Self {
            plus: project_quarters(|x| eval_h_phi(Sign::Plus, x), abs_tol)?,
            minus: project_quarters(|x| eval_h_phi(Sign::Minus, x), abs_tol)?,
        })
    }

    pub fn shared() -> Result<Self> {
        static CACHE: OnceLock<std::result::Result<QuarterMoments, LabError>> = OnceLock::new();
        CACHE.get_or_init(|| Self::compute(1e-12)).clone()
    }

    pub fn get(&self, sigma: Sign) -> &[f64; 4] {
        match sigma {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }
}

/// `(1/2π) ∫ Hφ^σ φ^η` over the full torus, by quadrature split at the
/// quarter points.
pub fn pairing_moment(sigma: Sign, eta: Sign) -> Result<f64> {
    let breaks = [-PI, -FRAC_PI_2, 0.0, FRAC_PI_2, PI];
    let opts = QuadratureOptions {
        abs_tol: 1e-11 * TAU,
        ..QuadratureOptions::default()
    };
    let r = integrate_split(
        |x| Ok(eval_h_phi(sigma, x)? * phi(eta, wrap_angle(x))),
        &breaks,
        opts,
    )?;
    Ok(r.value / TAU)
}

/// Full table `m(σ, η)` of [`pairing_moment`], indexed `[σ is plus][η is plus]`.
pub fn pairing_moments() -> Result<[[f64; 2]; 2]> {
    static CACHE: OnceLock<std::result::Result<[[f64; 2]; 2], LabError>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let mut m = [[0.0; 2]; 2];
            for s in Sign::BOTH {
                for e in Sign::BOTH {
                    m[usize::from(s.is_plus())][usize::from(e.is_plus())] = pairing_moment(s, e)?;
                }
            }
            Ok(m)
        })
        .clone()
}
