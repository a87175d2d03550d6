//! Exact rational helpers shared by every evaluator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^k` as an exact rational.
pub fn pow2(k: u32) -> Rational {
    int(BigInt::one() << k as usize)
}

pub fn pow_int(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Parses `"num/den"`, `"num"` or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((whole, frac)) = t.split_once('.') {
        if !t.contains('/') {
            let neg = whole.starts_with('-');
            let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
            let num: BigInt = digits
                .parse()
                .map_err(|_| Error::FunctionParse(format!("bad number {s:?}")))?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = Rational::new(num, den);
            return Ok(if neg { -r } else { r });
        }
    }
    let r: Rational = t
        .parse()
        .map_err(|_| Error::FunctionParse(format!("bad rational {s:?}")))?;
    Ok(r)
}

pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles big numerators and denominators without overflow.
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn max_of<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Serializes a rational as `"num/den"`.
pub mod as_str {
    use super::Rational;

    pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }
}

/// Serializes an optional rational as `"num/den"` or `null`.
pub mod opt_str {
    use super::Rational;

    pub fn serialize<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&super::format(r)),
            None => s.serialize_none(),
        }
    }
}
