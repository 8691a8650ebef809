//! Linear operators on grid-cell values and their dense materializations.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dyadic::{HaarExpansion, SignPattern};
use crate::error::{LabError, Result};
use crate::sign::Sign;

/// A real linear map on scalar fields of `len()` cells. Vector-valued fields
/// (cell-major, `dim` reals per cell) are handled componentwise.
pub trait LinearMap: Sync {
    fn name(&self) -> String;

    fn len(&self) -> usize;

    fn apply_scalar(&self, x: &[f64]) -> Vec<f64>;

    fn apply_transpose_scalar(&self, y: &[f64]) -> Vec<f64>;

    fn apply(&self, x: &[f64], dim: usize) -> Vec<f64> {
        componentwise(x, dim, self.len(), |c| self.apply_scalar(c))
    }

    fn apply_transpose(&self, y: &[f64], dim: usize) -> Vec<f64> {
        componentwise(y, dim, self.len(), |c| self.apply_transpose_scalar(c))
    }
}

fn componentwise(x: &[f64], dim: usize, n: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    assert_eq!(x.len(), n * dim, "field length");
    if dim == 1 {
        return f(x);
    }
    let mut out = vec![0.0; x.len()];
    let mut column = vec![0.0; n];
    for c in 0..dim {
        for (i, v) in column.iter_mut().enumerate() {
            *v = x[i * dim + c];
        }
        for (i, v) in f(&column).into_iter().enumerate() {
            out[i * dim + c] = v;
        }
    }
    out
}

/// Operators acting on depth-`K` Haar expansions.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Identity,
    S0,
    ClassicalShift,
    ReduceTilde,
    TAlpha(SignPattern),
}

impl OperatorKind {
    /// Applies the operator to a scalar field of `2^{K+1}` cells.
    pub fn apply_field(&self, field: &[f64]) -> Result<Vec<f64>> {
        if matches!(self, OperatorKind::Identity) {
            return Ok(field.to_vec());
        }
        let e = HaarExpansion::analyze(field, 1)?;
        let image = match self {
            OperatorKind::Identity => unreachable!(),
            OperatorKind::S0 => e.apply_s0(),
            OperatorKind::ClassicalShift => e.apply_classical_shift(),
            OperatorKind::ReduceTilde => e.reduce_tilde(),
            OperatorKind::TAlpha(alpha) => e.apply_talpha(alpha)?,
        };
        Ok(image.synthesize())
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Identity => write!(f, "identity"),
            OperatorKind::S0 => write!(f, "s0"),
            OperatorKind::ClassicalShift => write!(f, "classical-shift"),
            OperatorKind::ReduceTilde => write!(f, "reduce-tilde"),
            OperatorKind::TAlpha(_) => write!(f, "talpha"),
        }
    }
}

impl OperatorKind {
    /// Parses `identity`, `s0`, `classical-shift`, `reduce-tilde`, `talpha`
    /// (all signs `+`) or `talpha:<bits>` (heap-ordered signs, bit set = `+`).
    pub fn parse(name: &str, depth: usize) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "identity" | "id" => Ok(OperatorKind::Identity),
            "s0" => Ok(OperatorKind::S0),
            "classical-shift" | "shift" => Ok(OperatorKind::ClassicalShift),
            "reduce-tilde" | "tilde" => Ok(OperatorKind::ReduceTilde),
            "talpha" => Ok(OperatorKind::TAlpha(SignPattern::constant(
                depth,
                Sign::Plus,
            ))),
            _ => lower
                .strip_prefix("talpha:")
                .and_then(|bits| bits.parse::<u64>().ok())
                .map(|b| OperatorKind::TAlpha(SignPattern::from_bits(depth, b)))
                .ok_or_else(|| LabError::UnknownOperator(name.to_string())),
        }
    }
}

/// A dense operator on scalar fields, applied blockwise to `dim`-vector fields.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    name: String,
    depth: Option<usize>,
    dim: usize,
    n: usize,
    /// Row-major `n × n`.
    data: Vec<f64>,
}

impl OperatorMatrix {
    pub fn from_rows(name: &str, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(LabError::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        Ok(Self {
            name: name.to_string(),
            depth: None,
            dim: 1,
            n,
            data,
        })
    }

    pub fn diagonal(name: &str, diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self {
            name: name.to_string(),
            depth: None,
            dim: 1,
            n,
            data,
        }
    }

    /// Columns are images of the cell indicators.
    pub fn from_columns<F>(name: &str, n: usize, mut column: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let mut data = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = column(&e)?;
            if col.len() != n {
                return Err(LabError::DimensionMismatch {
                    expected: n,
                    actual: col.len(),
                });
            }
            for (i, v) in col.into_iter().enumerate() {
                data[i * n + j] = v;
            }
            e[j] = 0.0;
        }
        Ok(Self {
            name: name.to_string(),
            depth: None,
            dim: 1,
            n,
            data,
        })
    }

    pub fn of_map(map: &dyn LinearMap) -> Result<Self> {
        Self::from_columns(&map.name(), map.len(), |e| Ok(map.apply_scalar(e)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depth(&self) -> Option<usize> {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self {
            name: format!("{}^T", self.name),
            depth: self.depth,
            dim: self.dim,
            n,
            data,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(LabError::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(Self {
            name: format!("{}*{}", self.name, other.name),
            depth: self.depth,
            dim: self.dim,
            n,
            data,
        })
    }

    /// The full `(d·n) × (d·n)` matrix, component-major: block `c` acts on
    /// component `c` of every cell.
    pub fn to_block_dense(&self) -> DMatrix<f64> {
        let (n, d) = (self.n, self.dim);
        DMatrix::from_fn(n * d, n * d, |r, c| {
            let (br, i) = (r / n, r % n);
            let (bc, j) = (c / n, c % n);
            if br == bc {
                self.data[i * n + j]
            } else {
                0.0
            }
        })
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Eigen-decomposition of `MᵀM`, eigenvalues in descending order.
    fn gram_eigen(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let m = self.to_nalgebra();
        let gram = m.transpose() * &m;
        let eig = SymmetricEigen::try_new(gram, 1e-15, 10_000).ok_or(LabError::Accuracy {
            requested: 1e-12,
            achieved: f64::NAN,
        })?;
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
        let values = order.iter().map(|i| eig.eigenvalues[*i]).collect();
        let vectors = DMatrix::from_fn(self.n, self.n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    /// Singular values in descending order, from a bidiagonal SVD so that
    /// zero singular values come out at rounding level.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let svd = self
            .to_nalgebra()
            .try_svd(false, false, 1e-15, 10_000)
            .ok_or(LabError::Accuracy {
                requested: 1e-12,
                achieved: f64::NAN,
            })?;
        let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    /// Largest singular value, from the top eigenvalue of `MᵀM`.
    pub fn norm_2_exact(&self) -> Result<f64> {
        if self.n == 0 {
            return Ok(0.0);
        }
        Ok(self.gram_eigen()?.0[0].max(0.0).sqrt())
    }

    /// Right singular vector of the largest singular value.
    pub fn top_singular_vector(&self) -> Result<Vec<f64>> {
        let (_, vectors) = self.gram_eigen()?;
        Ok(vectors.column(0).iter().copied().collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl LinearMap for OperatorMatrix {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn len(&self) -> usize {
        self.n
    }

    fn apply_scalar(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn apply_transpose_scalar(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (row, yi) in self.rows().zip(y) {
            if *yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }
}

/// Materializes a Haar-side operator at depth `depth` on `dim`-vector fields.
pub fn materialize(kind: &OperatorKind, depth: usize, dim: usize) -> Result<OperatorMatrix> {
    if dim == 0 {
        return Err(LabError::MalformedInput(
            "dimension must be positive".into(),
        ));
    }
    let n = 1usize << (depth + 1);
    let mut m = OperatorMatrix::from_columns(&kind.to_string(), n, |e| kind.apply_field(e))?;
    m.depth = Some(depth);
    m.dim = dim;
    Ok(m)
}

/// Circle Hilbert transform on `N` equally spaced points: the multiplier
/// `−i·sgn(k)` on the discrete Fourier coefficients, zero at `k = 0` and at
/// the Nyquist frequency.
#[derive(Clone)]
pub struct CircleHilbert {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CircleHilbert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleHilbert").field("n", &self.n).finish()
    }
}

impl CircleHilbert {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(LabError::MalformedInput(format!(
                "grid size {n} is not a power of two >= 2"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// `−i·sgn(k)` for the DFT bin `k`.
    pub fn multiplier(&self, bin: usize) -> Complex64 {
        let half = self.n / 2;
        if bin == 0 || bin == half {
            Complex64::new(0.0, 0.0)
        } else if bin < half {
            Complex64::new(0.0, -1.0)
        } else {
            Complex64::new(0.0, 1.0)
        }
    }

    fn transform(&self, x: &[f64], sign: f64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            *b *= self.multiplier(k) * sign;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

impl LinearMap for CircleHilbert {
    fn name(&self) -> String {
        format!("circle-hilbert-{}", self.n)
    }

    fn len(&self) -> usize {
        self.n
    }

    fn apply_scalar(&self, x: &[f64]) -> Vec<f64> {
        self.transform(x, 1.0)
    }

    /// The multiplier is odd and imaginary, so the transpose is `−H`.
    fn apply_transpose_scalar(&self, y: &[f64]) -> Vec<f64> {
        self.transform(y, -1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_materializes() {
        let m = materialize(&OperatorKind::Identity, 2, 1).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m.entry(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(
            OperatorKind::parse("hilbert", 2),
            Err(LabError::UnknownOperator(_))
        ));
        assert_eq!(OperatorKind::parse("S0", 2).unwrap(), OperatorKind::S0);
        assert_eq!(
            OperatorKind::parse("talpha:5", 1).unwrap(),
            OperatorKind::TAlpha(SignPattern::from_bits(1, 5))
        );
    }

    #[test]
    fn hilbert_of_cosine() {
        let n = 64;
        let h = CircleHilbert::new(n).unwrap();
        let x: Vec<f64> = (0..n)
            .map(|i| (3.0 * std::f64::consts::TAU * i as f64 / n as f64).cos())
            .collect();
        let y = h.apply_scalar(&x);
        for (i, v) in y.iter().enumerate() {
            let want = (3.0 * std::f64::consts::TAU * i as f64 / n as f64).sin();
            assert!((v - want).abs() < 1e-13);
        }
    }

    #[test]
    fn blocks() {
        let m = materialize(&OperatorKind::S0, 1, 2).unwrap();
        let b = m.to_block_dense();
        assert_eq!(b.nrows(), 8);
        assert_eq!(b[(0, 4)], 0.0);
        assert_eq!(b[(4, 5)], m.entry(0, 1));
    }
}
