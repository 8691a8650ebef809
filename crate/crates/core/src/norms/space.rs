use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{LabError, Result};

/// The target space `L^p_X` with `X` either the scalars or `ℓ_q^d`.
///
/// The duality pairing between `X` and `X*` is the coordinate pairing
/// `Σ u_i v_i`; the dual of `ℓ_q^d` is `ℓ_{q'}^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    p: f64,
    q: Option<f64>,
    dim: usize,
}

fn conjugate(r: f64) -> f64 {
    r / (r - 1.0)
}

fn check_exponent(name: &str, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 1.0) {
        return Err(LabError::MalformedInput(format!(
            "exponent {name} = {r} must lie in (1, ∞)"
        )));
    }
    Ok(())
}

impl SpaceDescriptor {
    pub fn scalar(p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(Self { p, q: None, dim: 1 })
    }

    /// `L^p` with values in `ℓ_q^d`. `q = 1` and `q = ∞` are excluded since
    /// their duality maps are not single valued.
    pub fn lq(p: f64, q: f64, dim: usize) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if dim == 0 {
            return Err(LabError::MalformedInput(
                "dimension must be positive".into(),
            ));
        }
        Ok(Self { p, q: Some(q), dim })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> Option<f64> {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p_conj(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_conj(&self) -> Option<f64> {
        self.q.map(conjugate)
    }

    pub fn is_scalar(&self) -> bool {
        self.q.is_none()
    }

    /// The same space with a different outer exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        check_exponent("p", p)?;
        Ok(Self { p, ..*self })
    }

    /// `L^{p'}_{X*}`.
    pub fn dual(&self) -> Self {
        Self {
            p: self.p_conj(),
            q: self.q_conj(),
            dim: self.dim,
        }
    }

    /// Short label, e.g. `scalar` or `l3^4`.
    pub fn label(&self) -> String {
        match self.q {
            None => "scalar".to_string(),
            Some(q) => format!("l{}^{}", fmt_exponent(q), self.dim),
        }
    }

    /// Norm of one value in `X`.
    pub fn point_norm(&self, x: &[f64]) -> f64 {
        match self.q {
            None => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Some(q) => lq_norm(x, q),
        }
    }

    /// `(Σ_cells weight·‖value‖_X^p)^{1/p}` over cell-major data.
    pub fn field_norm(&self, values: &[f64], weight: f64) -> f64 {
        debug_assert_eq!(values.len() % self.dim, 0);
        let sum: f64 = values
            .chunks_exact(self.dim)
            .map(|c| self.point_norm(c).powf(self.p))
            .sum();
        (weight * sum).powf(1.0 / self.p)
    }

    /// Norming functional of `u` in the dual space: the unique `z` with
    /// `‖z‖_{L^{p'}_{X*}} = 1` and `⟨z, u⟩ = ‖u‖_{L^p_X}` (weighted pairing).
    /// Returns `None` when `u = 0`.
    pub fn duality_map(&self, u: &[f64], weight: f64) -> Option<Vec<f64>> {
        let total = self.field_norm(u, weight);
        if total == 0.0 || !total.is_finite() {
            return None;
        }
        let mut z = vec![0.0; u.len()];
        for (zc, uc) in z.chunks_exact_mut(self.dim).zip(u.chunks_exact(self.dim)) {
            let local = self.point_norm(uc);
            if local == 0.0 {
                continue;
            }
            let outer = (local / total).powf(self.p - 1.0);
            match self.q {
                None => {
                    for (zi, ui) in zc.iter_mut().zip(uc) {
                        *zi = outer * ui / local;
                    }
                }
                Some(q) => {
                    for (zi, ui) in zc.iter_mut().zip(uc) {
                        *zi = outer * ui.signum() * (ui.abs() / local).powf(q - 1.0);
                    }
                }
            }
        }
        Some(z)
    }
}

fn lq_norm(x: &[f64], q: f64) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(q)).sum();
    scale * s.powf(1.0 / q)
}

fn fmt_exponent(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L^{}({})", fmt_exponent(self.p), self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        let s = SpaceDescriptor::lq(3.0, 1.5, 2).unwrap();
        assert!((1.0 / s.p() + 1.0 / s.p_conj() - 1.0).abs() < 1e-15);
        assert!((s.q_conj().unwrap() - 3.0).abs() < 1e-12);
        let back = s.dual().dual();
        assert!((back.p() - 3.0).abs() < 1e-12);
        assert!((back.q().unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(SpaceDescriptor::scalar(1.0).is_err());
        assert!(SpaceDescriptor::scalar(0.5).is_err());
        assert!(SpaceDescriptor::scalar(f64::INFINITY).is_err());
        assert!(SpaceDescriptor::lq(2.0, 1.0, 3).is_err());
        assert!(SpaceDescriptor::lq(2.0, 2.0, 0).is_err());
    }

    #[test]
    fn duality_map_norms() {
        let s = SpaceDescriptor::lq(3.0, 4.0, 2).unwrap();
        let u = [1.0, -2.0, 0.5, 0.0, -0.25, 3.0];
        let w = 1.0 / 3.0;
        let z = s.duality_map(&u, w).unwrap();
        let pairing: f64 = w * z.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        assert!((pairing - s.field_norm(&u, w)).abs() < 1e-12);
        assert!((s.dual().field_norm(&z, w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn labels() {
        assert_eq!(SpaceDescriptor::scalar(2.0).unwrap().label(), "scalar");
        assert_eq!(SpaceDescriptor::lq(3.0, 3.0, 4).unwrap().label(), "l3^4");
        assert_eq!(SpaceDescriptor::lq(3.0, 1.5, 2).unwrap().label(), "l1.5^2");
    }
}
