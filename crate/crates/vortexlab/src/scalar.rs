//! Scalar conventions shared by every module.
//!
//! The Lie algebra of S¹ is identified with iℝ, so connection coefficients,
//! residues and the central constant `c` are purely imaginary numbers.  They
//! are stored by their imaginary part: `Imag(0.3)` is the number 0.3·i.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Q = Ratio<i64>;

/// A purely imaginary scalar `i·s`, stored as `s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Imag(pub f64);

impl Imag {
    pub const ZERO: Imag = Imag(0.0);

    /// The imaginary part `s` of `i·s`.
    pub fn im(self) -> f64 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        C64::new(0.0, self.0)
    }
}

impl From<ImagRational> for Imag {
    fn from(r: ImagRational) -> Self {
        Imag(q_to_f64(r.0))
    }
}

/// An exact imaginary rational `i·p/q`, always in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImagRational(pub Q);

impl ImagRational {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(ImagRational(Q::new(p, q)))
    }

    pub fn integer(n: i64) -> Self {
        ImagRational(Q::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_imag(self) -> Imag {
        self.into()
    }
}

impl fmt::Display for ImagRational {
    /// Formats as `p/q` (the factor `i` is implicit), e.g. `-1/2` for `-i/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for ImagRational {
    type Err = Error;

    /// Parses `p/q` or a bare integer `p`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("expected a rational 'p/q', got '{s}'"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                ImagRational::new(p, q).map_err(|_| bad())
            }
            None => Ok(ImagRational::integer(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for ImagRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ImagRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a rational as the string `p/q`.
pub mod q_string {
    use super::{ImagRational, Q};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        ImagRational(*q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        ImagRational::deserialize(d).map(|r| r.0)
    }
}

pub fn q_to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Whether `x` lies within `tol` of an integer.
pub fn is_near_integer(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}
