//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Panels are bisected in order of decreasing error estimate until the summed
//! estimate falls below the absolute tolerance. Integrable endpoint
//! singularities (logarithmic ones in particular) are handled by repeated
//! bisection towards the endpoint; callers split the domain at interior
//! singular points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LabError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx)? + f(center + dx)?;
        k += w * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    let value = k * half;
    let error = ((k - g) * half).abs();
    if !value.is_finite() {
        return Err(LabError::Numerical(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Panel { a, b, value, error })
}

/// `∫_a^b f` to absolute tolerance `opts.abs_tol`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut heap = BinaryHeap::new();
    heap.push(kronrod(&mut f, a, b)?);
    let width_floor = 64.0 * f64::EPSILON * (b - a).abs().max(1.0);
    let mut settled: Vec<Panel> = Vec::new();
    loop {
        let total_err: f64 = heap.iter().chain(&settled).map(|p| p.error).sum();
        if total_err <= opts.abs_tol {
            break;
        }
        if heap.len() + settled.len() >= opts.max_panels {
            return Err(LabError::Accuracy {
                requested: opts.abs_tol,
                achieved: total_err,
            });
        }
        let Some(worst) = heap.pop() else {
            // Every remaining panel is at the width floor.
            return Err(LabError::Accuracy {
                requested: opts.abs_tol,
                achieved: total_err,
            });
        };
        if (worst.b - worst.a).abs() <= width_floor {
            settled.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&mut f, worst.a, mid)?);
        heap.push(kronrod(&mut f, mid, worst.b)?);
    }
    let mut panels: Vec<Panel> = heap.into_iter().chain(settled).collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(QuadratureResult {
        value: panels.iter().map(|p| p.value).sum(),
        error_estimate: panels.iter().map(|p| p.error).sum(),
        panels: panels.len(),
    })
}

/// Integral over `[a, b]` split at the given interior break points.
pub fn integrate_split<F>(
    mut f: F,
    breaks: &[f64],
    opts: QuadratureOptions,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let local = QuadratureOptions {
        abs_tol: opts.abs_tol / pieces,
        ..opts
    };
    let mut out = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        panels: 0,
    };
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], local)?;
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.panels += r.panels;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(
            |x| Ok(x.powi(20) - 3.0 * x.powi(7)),
            -1.0,
            2.0,
            QuadratureOptions::default(),
        )
        .unwrap();
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!((r.value - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn log_endpoint_singularity() {
        let r = integrate(|x: f64| Ok(x.ln()), 0.0, 1.0, QuadratureOptions::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn reports_failure() {
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            max_panels: 3,
        };
        let r = integrate(|x: f64| Ok(1.0 / x.sqrt()), 0.0, 1.0, opts);
        assert!(matches!(r, Err(LabError::Accuracy { .. })));
    }
}
