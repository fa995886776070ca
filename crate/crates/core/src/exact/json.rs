//! JSON helpers for arbitrary-size integers and rationals.
//!
//! Integers that fit in an `i64` are written as JSON numbers; larger ones are
//! written as decimal strings so that round trips are bit-exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn bigint_to_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(n.to_string()),
    }
}

pub fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(num) => num
            .as_i64()
            .map(BigInt::from)
            .or_else(|| num.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::domain(format!("expected an integer, got {num}"))),
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| Error::domain(format!("malformed integer string `{s}`"))),
        other => Err(Error::domain(format!("expected an integer, got {other}"))),
    }
}

/// `[num, den]` in lowest terms.
pub fn rational_to_json(q: &BigRational) -> Value {
    Value::Array(vec![bigint_to_json(q.numer()), bigint_to_json(q.denom())])
}

pub fn rational_from_json(v: &Value) -> Result<BigRational> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::domain("rational must be a [num, den] pair"))?;
    let num = bigint_from_json(&arr[0])?;
    let den = bigint_from_json(&arr[1])?;
    if den == BigInt::from(0) {
        return Err(Error::domain("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// `#[serde(with = ...)]` adapter for [`BigRational`] fields.
pub mod rational {
    use num_rational::BigRational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        super::rational_to_json(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let v = Value::deserialize(d)?;
        super::rational_from_json(&v).map_err(D::Error::custom)
    }
}
