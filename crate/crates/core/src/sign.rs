use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Mul, Neg};

/// A sign `σ ∈ {−, +}`. Used for Haar children (`I₋`, `I₊`), sign tosses and
/// the two square-wave generators `φ⁻`, `φ⁺`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Sign of `x`, with `0` mapped to `+`.
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    /// The opposing sign `σ̄`.
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self == rhs)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}
