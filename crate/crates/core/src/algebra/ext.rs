//! Extended number types used as flow-domain carriers.

use std::fmt;

/// A natural number or infinity. Arithmetic saturates at `Inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);
    pub const ONE: ExtNat = ExtNat::Fin(1);

    pub fn add(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_add(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }

    pub fn mul(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (ExtNat::Fin(0), _) | (_, ExtNat::Fin(0)) => ExtNat::ZERO,
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_mul(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }

    pub fn is_zero(self) -> bool {
        self == ExtNat::ZERO
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

/// An integer extended with both infinities. The derived order puts
/// `NegInf` first and `PosInf` last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
    PosInf,
}

impl ExtInt {
    pub fn fin(self) -> Option<i64> {
        match self {
            ExtInt::Fin(k) => Some(k),
            _ => None,
        }
    }
}

impl From<i64> for ExtInt {
    fn from(k: i64) -> Self {
        ExtInt::Fin(k)
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::Fin(k) => write!(f, "{k}"),
            ExtInt::PosInf => write!(f, "inf"),
        }
    }
}
