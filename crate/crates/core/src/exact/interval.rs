use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::json::{rational_from_json, rational_to_json};
use crate::error::{Error, Result};

/// π truncated to 64 decimals; π lies strictly between this and this + 10⁻⁶⁴.
const PI_DIGITS: &str = "31415926535897932384626433832795028841971693993751058209749445923";

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain("interval with lo > hi"));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(q: BigRational) -> Self {
        Self {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::point(BigRational::new(num.into(), den.into()))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(q) => self.contains(&q),
            None => false,
        }
    }

    /// Certified enclosure of π.
    pub fn pi() -> Self {
        let num: BigInt = PI_DIGITS.parse().expect("pi digits");
        let den = num_traits::pow(BigInt::from(10), PI_DIGITS.len() - 1);
        Self {
            lo: BigRational::new(num.clone(), den.clone()),
            hi: BigRational::new(num + 1, den),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self { lo, hi }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_negative() {
            Self {
                lo: &self.hi * q,
                hi: &self.lo * q,
            }
        } else {
            Self {
                lo: &self.lo * q,
                hi: &self.hi * q,
            }
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if !self.lo.is_positive() && !self.hi.is_negative() {
            return Err(Error::domain("reciprocal of an interval containing zero"));
        }
        Ok(Self {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut out = Self::point(BigRational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// True when every point of `self` is `>=` every point of `o`.
    pub fn certainly_ge(&self, o: &Self) -> bool {
        self.lo >= o.hi
    }

    pub fn certainly_gt(&self, o: &Self) -> bool {
        self.lo > o.hi
    }

    /// Square-root enclosure of a non-negative interval to `bits` fractional bits.
    pub fn sqrt(&self, bits: u32) -> Result<Self> {
        if self.lo.is_negative() {
            return Err(Error::domain("square root of a negative interval"));
        }
        Ok(Self {
            lo: sqrt_floor(&self.lo, bits),
            hi: sqrt_ceil(&self.hi, bits),
        })
    }

    pub fn is_zero_width(&self) -> bool {
        self.width().is_zero()
    }
}

fn sqrt_floor(q: &BigRational, bits: u32) -> BigRational {
    // floor(√(q·4^bits)) / 2^bits
    let scaled = (q * BigRational::from_integer(BigInt::one() << (2 * bits))).floor();
    let r = scaled.to_integer().sqrt();
    BigRational::new(r, BigInt::one() << bits)
}

fn sqrt_ceil(q: &BigRational, bits: u32) -> BigRational {
    let scaled = (q * BigRational::from_integer(BigInt::one() << (2 * bits))).ceil();
    let n = scaled.to_integer();
    let mut r = n.sqrt();
    if &r * &r < n {
        r += 1;
    }
    BigRational::new(r, BigInt::one() << bits)
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo_f64(), self.hi_f64())
    }
}

impl Serialize for RationalInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::json!({ "lo": rational_to_json(&self.lo), "hi": rational_to_json(&self.hi) })
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let get = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::domain("interval missing bound"))
                .and_then(rational_from_json)
        };
        let lo = get("lo").map_err(serde::de::Error::custom)?;
        let hi = get("hi").map_err(serde::de::Error::custom)?;
        RationalInterval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_sandwich_contains_double_pi_neighbourhood() {
        let pi = RationalInterval::pi();
        assert!(pi.lo_f64() <= std::f64::consts::PI && std::f64::consts::PI <= pi.hi_f64());
        let w = pi.width();
        assert!(w < BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 63)));
    }

    #[test]
    fn arithmetic_encloses() {
        let a = RationalInterval::new(
            BigRational::from_integer((-1).into()),
            BigRational::from_integer(2.into()),
        )
        .unwrap();
        let b = RationalInterval::from_ratio(3, 1);
        let p = a.mul(&b);
        assert_eq!(p.lo(), &BigRational::from_integer((-3).into()));
        assert_eq!(p.hi(), &BigRational::from_integer(6.into()));
        assert!(a.recip().is_err());
        assert!(RationalInterval::new(BigRational::one(), BigRational::zero()).is_err());
    }

    #[test]
    fn sqrt_encloses() {
        let two = RationalInterval::from_ratio(2, 1);
        let r = two.sqrt(40).unwrap();
        assert!(r.lo_f64() <= 2f64.sqrt() && 2f64.sqrt() <= r.hi_f64());
        assert!(r.width() < BigRational::new(1.into(), (1i64 << 39).into()));
    }
}
