use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::interval::RationalInterval;
use super::json::{rational_from_json, rational_to_json};
use crate::error::{Error, Result};

/// A real number of the form `Σ q_s·√s` with rational `q_s` and squarefree
/// positive radicands `s`.
///
/// The representation is canonical: radicands are squarefree, zero
/// coefficients are never stored, and the map is ordered, so structural
/// equality coincides with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactScalar {
    terms: BTreeMap<u64, BigRational>,
}

/// Writes `n = k²·s` with `s` squarefree and returns `(k, s)`.
pub fn squarefree_split(mut n: u64) -> (u64, u64) {
    assert!(n > 0, "squarefree_split of zero");
    let mut k = 1u64;
    let mut s = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= p;
        }
        if e % 2 == 1 {
            s *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        s *= n;
    }
    (k, s)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Product of two squarefree radicands: `√a·√b = g·√c`, returns `(g, c)`.
fn radical_product(a: u64, b: u64) -> (u64, u64) {
    let g = a.gcd(&b);
    let c = (a / g)
        .checked_mul(b / g)
        .expect("radicand product overflows u64");
    (g, c)
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(1, q);
        }
        Self { terms }
    }

    /// `√n` for a positive integer `n`, reduced to canonical form.
    pub fn sqrt_int(n: u64) -> Self {
        let (k, s) = squarefree_split(n);
        Self::term(BigRational::from_integer(BigInt::from(k)), s)
    }

    /// `q·√s`; `s` need not be squarefree.
    pub fn term(q: BigRational, s: u64) -> Self {
        let (k, sf) = squarefree_split(s);
        let coeff = q * BigRational::from_integer(BigInt::from(k));
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(sf, coeff);
        }
        Self { terms }
    }

    /// Square root of a non-negative rational, when the radicand `num·den`
    /// fits in 64 bits.
    pub fn sqrt_rational(q: &BigRational) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::domain("square root of a negative rational"));
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        // √(a/b) = √(ab)/b
        let prod = q.numer() * q.denom();
        let prod = prod
            .to_u64()
            .ok_or_else(|| Error::domain("radicand too large for exact square root"))?;
        let inv_den = BigRational::new(BigInt::one(), q.denom().clone());
        Ok(Self::term(inv_den, prod))
    }

    /// Builds the canonical form from arbitrary `(radicand, coefficient)`
    /// pairs, merging repeated and non-squarefree radicands.
    pub fn canonicalize(raw: &[(i64, BigRational)]) -> Result<Self> {
        let mut out = Self::zero();
        for (s, q) in raw {
            if *s <= 0 {
                return Err(Error::domain(format!("radicand {s} is not positive")));
            }
            out += &Self::term(q.clone(), *s as u64);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&s| s == 1)
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    /// Coefficient of `√s` (zero when absent).
    pub fn coeff(&self, s: u64) -> BigRational {
        self.terms
            .get(&s)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.terms.iter().map(|(s, q)| (*s, q))
    }

    pub fn radicands(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(s, c)| (*s, c * q)).collect(),
        }
    }

    fn insert_add(&mut self, s: u64, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&s) {
            Some(c) => {
                *c += q;
                c.is_zero()
            }
            None => {
                self.terms.insert(s, q);
                false
            }
        };
        if remove {
            self.terms.remove(&s);
        }
    }

    /// Multiplicative inverse, `None` for zero.
    ///
    /// Works one prime at a time: `1/(A + B√p) = (A − B√p)/(A² − pB²)` where
    /// the norm `A² − pB²` no longer involves `p`.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(q) = self.as_rational() {
            return Some(Self::from_rational(q.recip()));
        }
        let p = self
            .terms
            .keys()
            .flat_map(|&s| prime_factors(s))
            .max()
            .expect("irrational value has a prime radicand");
        let mut a = Self::zero();
        let mut b = Self::zero();
        for (s, q) in &self.terms {
            if s % p == 0 {
                b.insert_add(s / p, q.clone());
            } else {
                a.insert_add(*s, q.clone());
            }
        }
        let sqrt_p = Self::sqrt_int(p);
        let p_q = Self::from_int(p as i64);
        let conj = &a - &(&b * &sqrt_p);
        let norm = &(&a * &a) - &(&p_q * &(&b * &b));
        let norm_inv = norm.inv()?;
        Some(&conj * &norm_inv)
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self * &r)
    }

    /// Rigorous rational enclosure with each `√s` bracketed to `bits`
    /// fractional bits.
    pub fn enclosure(&self, bits: u32) -> RationalInterval {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        let scale = BigInt::one() << bits;
        for (s, q) in &self.terms {
            if *s == 1 {
                lo += q;
                hi += q;
                continue;
            }
            let r: BigUint = (BigUint::from(*s) << (2 * bits)).sqrt();
            let r = BigInt::from(r);
            let root_lo = BigRational::new(r.clone(), scale.clone());
            let root_hi = BigRational::new(r + 1, scale.clone());
            if q.is_negative() {
                lo += q * &root_hi;
                hi += q * &root_lo;
            } else {
                lo += q * &root_lo;
                hi += q * &root_hi;
            }
        }
        RationalInterval::new(lo, hi).expect("enclosure bounds ordered")
    }

    fn float_terms(&self) -> (f64, f64) {
        let mut sum = 0.0;
        let mut mag = 0.0;
        for (s, q) in &self.terms {
            let t = q.to_f64().unwrap_or(f64::NAN) * (*s as f64).sqrt();
            sum += t;
            mag += t.abs();
        }
        (sum, mag)
    }

    /// Sign of the value: -1, 0 or 1. Decided exactly.
    pub fn signum(&self) -> i32 {
        match self.terms.len() {
            0 => return 0,
            1 => {
                let q = self.terms.values().next().unwrap();
                return if q.is_negative() { -1 } else { 1 };
            }
            _ => {}
        }
        let (sum, mag) = self.float_terms();
        let err = mag * (self.terms.len() as f64 + 4.0) * f64::EPSILON;
        if sum.is_finite() && mag.is_finite() && mag > 1e-280 && sum.abs() > err {
            return if sum > 0.0 { 1 } else { -1 };
        }
        // A canonical non-zero value is never zero, so refinement terminates.
        let mut bits = 64;
        loop {
            let iv = self.enclosure(bits);
            if iv.lo().is_positive() {
                return 1;
            }
            if iv.hi().is_negative() {
                return -1;
            }
            bits *= 2;
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Nearest double, within a few units in the last place of the true value.
    pub fn to_f64(&self) -> f64 {
        match self.terms.len() {
            0 => return 0.0,
            1 => {
                let (s, q) = self.terms.iter().next().unwrap();
                let qf = q.to_f64().unwrap_or(f64::NAN);
                return if *s == 1 { qf } else { qf * (*s as f64).sqrt() };
            }
            _ => {}
        }
        let (sum, mag) = self.float_terms();
        let n = self.terms.len() as f64;
        if sum.is_finite() && mag.is_finite() && (n + 2.0) * mag <= 2.0 * sum.abs() {
            return sum;
        }
        let mut bits = 64;
        loop {
            let iv = self.enclosure(bits);
            let width = iv.hi() - iv.lo();
            let mid = (iv.lo() + iv.hi()) / BigRational::from_integer(BigInt::from(2));
            let tol = mid.abs() / BigRational::from_integer(BigInt::one() << 60u32);
            if !mid.is_zero() && width <= tol {
                return mid.to_f64().unwrap_or(f64::NAN);
            }
            bits *= 2;
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for ExactScalar {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = ExactScalar::zero();
        for (a, qa) in &self.terms {
            for (b, qb) in &rhs.terms {
                let (g, c) = radical_product(*a, *b);
                let q = qa * qb * BigRational::from_integer(BigInt::from(g));
                out.insert_add(c, q);
            }
        }
        out
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            terms: self.terms.iter().map(|(s, q)| (*s, -q)).collect(),
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        for (s, q) in &rhs.terms {
            self.insert_add(*s, q.clone());
        }
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        for (s, q) in &rhs.terms {
            self.insert_add(*s, -q);
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $f(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $f(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if *s == 1 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "sqrt({s})")?;
            } else {
                write!(f, "{mag}*sqrt({s})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self} ≈ {})", self.to_f64())
    }
}

impl ExactScalar {
    pub fn to_json(&self) -> serde_json::Value {
        let radicands: Vec<serde_json::Value> = self
            .terms
            .keys()
            .map(|s| serde_json::Value::from(*s))
            .collect();
        let coeffs: Vec<serde_json::Value> = self.terms.values().map(rational_to_json).collect();
        serde_json::json!({ "radicands": radicands, "coeffs": coeffs })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = || Error::domain("malformed exact scalar JSON");
        let rads = v
            .get("radicands")
            .and_then(|r| r.as_array())
            .ok_or_else(bad)?;
        let coeffs = v.get("coeffs").and_then(|r| r.as_array()).ok_or_else(bad)?;
        if rads.len() != coeffs.len() {
            return Err(bad());
        }
        let mut raw = Vec::with_capacity(rads.len());
        for (r, c) in rads.iter().zip(coeffs) {
            let s = r.as_i64().ok_or_else(bad)?;
            raw.push((s, rational_from_json(c)?));
        }
        Self::canonicalize(&raw)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        ExactScalar::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn canonicalize_reduces_radicands() {
        let x = ExactScalar::canonicalize(&[(12, q(1, 1))]).unwrap();
        assert_eq!(x.coeff(3), q(2, 1));
        assert_eq!(x.radicands().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn canonicalize_merges_coefficients() {
        let x = ExactScalar::canonicalize(&[(5, q(1, 2)), (5, q(1, 2))]).unwrap();
        assert_eq!(x, ExactScalar::sqrt_int(5));
    }

    #[test]
    fn canonicalize_rejects_nonpositive_radicand() {
        assert!(ExactScalar::canonicalize(&[(0, q(1, 1))]).is_err());
        assert!(ExactScalar::canonicalize(&[(-3, q(1, 1))]).is_err());
    }

    #[test]
    fn golden_ratio_table_values() {
        let x = ExactScalar::canonicalize(&[(1, q(1, 1)), (5, q(3, 1))])
            .unwrap()
            .scale(&q(1, 6));
        assert!((x.to_f64() - 1.2847).abs() < 1e-4);
        let y = ExactScalar::canonicalize(&[(1, q(7, 10)), (5, q(3, 10))]).unwrap();
        assert!((y.to_f64() - 1.3708).abs() < 1e-4);
    }

    #[test]
    fn to_float_basic() {
        assert_eq!(ExactScalar::one().to_f64(), 1.0);
        assert_eq!(ExactScalar::sqrt_int(5).to_f64(), 5f64.sqrt());
    }

    #[test]
    fn cancellation_is_resolved_exactly() {
        // (1 + √2)(√2 − 1) − 1 = 0 exactly, and a near-cancelling value keeps its sign.
        let a = &ExactScalar::one() + &ExactScalar::sqrt_int(2);
        let b = &ExactScalar::sqrt_int(2) - &ExactScalar::one();
        assert!((&(&a * &b) - &ExactScalar::one()).is_zero());
        // 99/70 − √2 ≈ 7.2e−5, and 577/408 − √2 ≈ 1.5e−6
        let c = &ExactScalar::from_ratio(665_857, 470_832) - &ExactScalar::sqrt_int(2);
        assert_eq!(c.signum(), 1);
        assert!(c.to_f64() > 0.0 && c.to_f64() < 1e-11);
    }

    #[test]
    fn inverse_in_multiquadratic_field() {
        let x =
            ExactScalar::canonicalize(&[(1, q(1, 1)), (2, q(1, 1)), (5, q(-3, 7)), (10, q(2, 3))])
                .unwrap();
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, ExactScalar::one());
        assert!(ExactScalar::zero().inv().is_none());
    }

    #[test]
    fn ordering_and_abs() {
        let a = ExactScalar::sqrt_int(2);
        let b = ExactScalar::from_ratio(141, 100);
        assert!(a > b);
        assert_eq!((-&a).abs(), a);
    }

    #[test]
    fn json_round_trip_with_large_integers() {
        let big = BigInt::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let x = ExactScalar::term(BigRational::new(big, BigInt::from(7)), 10)
            + ExactScalar::from_ratio(-3, 4);
        let s = serde_json::to_string(&x).unwrap();
        let back: ExactScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn sqrt_of_rational() {
        let r = ExactScalar::sqrt_rational(&q(3, 2)).unwrap();
        assert_eq!(&r * &r, ExactScalar::from_ratio(3, 2));
    }
}
