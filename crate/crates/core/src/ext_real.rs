//! Extended reals `[-inf, inf]` restricted to what the comparison functions need:
//! a finite value or positive infinity.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite real or `+inf`. Used for radii and zeros that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    PosInf,
}

impl<T: Float> ExtReal<T> {
    /// Wraps a float, mapping `+inf` to [`ExtReal::PosInf`].
    pub fn from_float(x: T) -> Self {
        if x == T::infinity() {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// Float view, with `+inf` for the infinite value.
    pub fn to_float(&self) -> T {
        match *self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => T::infinity(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `true` iff `x < self`.
    pub fn exceeds(&self, x: T) -> bool {
        match *self {
            ExtReal::Finite(v) => x < v,
            ExtReal::PosInf => true,
        }
    }

    /// Multiplies by a positive finite scalar.
    pub fn scale(self, k: T) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * k),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl<T: Float> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl<T: Float + fmt::Display> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

impl<T: Float + Serialize> Serialize for ExtReal<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => x.serialize(s),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Float + Deserialize<'de>> Deserialize<'de> for ExtReal<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Num(T),
            Text(String),
        }
        match Repr::<T>::deserialize(d)? {
            Repr::Num(x) => Ok(ExtReal::from_float(x)),
            Repr::Text(s) if matches!(s.as_str(), "inf" | "+inf" | "infinity") => {
                Ok(ExtReal::PosInf)
            }
            Repr::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}
