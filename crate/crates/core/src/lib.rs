//! Numerical laboratory for the dyadic Hilbert transform `S₀`.
//!
//! * [`dyadic`]: dyadic intervals, Haar expansions and the operators `S₀`,
//!   `T_α` and the classical Haar shift.
//! * [`circle`]: the Hilbert transform on the torus, the square waves
//!   `φ^±`, quarter-arc averages and the constant `c₀`.
//! * [`toss`]: the sign-toss lift `f ↦ F(θ)`, exact expectations by
//!   enumeration and the weak-form pairing identity.
//! * [`modulation`]: spectrum bounds, the modulation schedule and the
//!   modulation identity for the Hilbert transform in `ψ`.
//! * [`norms`]: operator matrices, `L^p_X` norm estimation by nonlinear power
//!   iteration and the `s_p` versus `h_p` comparison.

pub mod circle;
pub mod dyadic;
pub mod error;
pub mod exec;
pub mod modulation;
pub mod norms;
pub mod quadrature;
pub mod sign;
pub mod toss;

pub use error::{LabError, Result};
pub use exec::Execution;
pub use sign::Sign;
