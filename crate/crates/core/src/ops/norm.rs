use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::rational::{self, Rational};

/// Exponent `p` of an `ℓ^p` norm.
#[derive(Clone, Debug, PartialEq)]
pub enum Exponent {
    Int(u32),
    Real(f64),
    Inf,
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::InvalidExponent(s.to_string());
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Exponent::Inf);
        }
        if let Ok(n) = t.parse::<u32>() {
            return if n == 0 { Err(bad()) } else { Ok(Exponent::Int(n)) };
        }
        let v = match rational::parse(t) {
            Ok(r) => rational::to_f64(&r),
            Err(_) => t.parse::<f64>().map_err(|_| bad())?,
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(bad());
        }
        if v.fract() == 0.0 && v <= u32::MAX as f64 {
            return Ok(Exponent::Int(v as u32));
        }
        Ok(Exponent::Real(v))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Int(n) => write!(f, "{n}"),
            Exponent::Real(v) => write!(f, "{v}"),
            Exponent::Inf => f.write_str("inf"),
        }
    }
}

/// `‖f‖_p`. For integer `p` the `p`-th power is exact; for `p = ∞` the norm
/// itself is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct NormValue {
    pub exact_power: Option<Rational>,
    pub exact: Option<Rational>,
    pub approx: f64,
}

pub fn lp_norm(f: &SparseFunction, p: &Exponent) -> NormValue {
    match p {
        Exponent::Inf => {
            let m = f
                .iter()
                .map(|(_, v)| v.abs())
                .max()
                .unwrap_or_else(Rational::zero);
            NormValue {
                approx: rational::to_f64(&m),
                exact_power: None,
                exact: Some(m),
            }
        }
        Exponent::Int(n) => {
            let s: Rational = f
                .iter()
                .map(|(_, v)| rational::pow_int(&v.abs(), *n))
                .sum();
            let approx = rational::to_f64(&s).powf(1.0 / *n as f64);
            NormValue {
                exact: (*n == 1).then(|| s.clone()),
                exact_power: Some(s),
                approx,
            }
        }
        Exponent::Real(q) => {
            let s: f64 = f
                .iter()
                .map(|(_, v)| v.abs().to_f64().unwrap_or(f64::INFINITY).powf(*q))
                .sum();
            NormValue {
                exact_power: None,
                exact: None,
                approx: s.powf(1.0 / q),
            }
        }
    }
}
