use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact value of a finite double.
pub fn exact_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::domain(format!("non-finite value {x}")))
}

/// Best rational approximation of `x` with denominator at most
/// `max_denominator`, taken among the continued-fraction convergents and the
/// semiconvergent between the last two of them.
pub fn rationalize(x: f64, max_denominator: u64) -> Result<BigRational> {
    if max_denominator == 0 {
        return Err(Error::domain("max_denominator must be at least 1"));
    }
    let exact = exact_from_f64(x)?;
    Ok(limit_denominator(&exact, &BigInt::from(max_denominator)))
}

/// Closest rational to `q` with denominator `<= max_den`.
pub fn limit_denominator(q: &BigRational, max_den: &BigInt) -> BigRational {
    if q.is_negative() {
        return -limit_denominator(&-q, max_den);
    }
    if q.denom() <= max_den {
        return q.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) =
        (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut n = q.numer().clone();
    let mut d = q.denom().clone();
    loop {
        let (a, r) = n.div_rem(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (max_den - &q0) / &q1;
    let semi = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = BigRational::new(p1, q1);
    if (&conv - q).abs() <= (&semi - q).abs() {
        conv
    } else {
        semi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    /// Exhaustive search over every denominator, used as an independent oracle.
    fn brute_best(x: f64, max_den: i64) -> BigRational {
        let xq = exact_from_f64(x).unwrap();
        let mut best: Option<BigRational> = None;
        for den in 1..=max_den {
            let center = (x * den as f64).round() as i64;
            for num in center - 1..=center + 1 {
                let cand = ratio(num, den);
                let better = match &best {
                    None => true,
                    Some(b) => (&cand - &xq).abs() < (b - &xq).abs(),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn simple_cases() {
        assert_eq!(rationalize(0.5, 10).unwrap(), ratio(1, 2));
        assert_eq!(rationalize(0.333334, 100).unwrap(), ratio(1, 3));
        assert_eq!(rationalize(-0.75, 4).unwrap(), ratio(-3, 4));
        assert!(rationalize(f64::NAN, 10).is_err());
        assert!(rationalize(1.0, 0).is_err());
    }

    #[test]
    fn pi_matches_exhaustive_search() {
        let oracle = brute_best(std::f64::consts::PI, 113);
        assert_eq!(oracle, ratio(355, 113));
        assert_eq!(rationalize(std::f64::consts::PI, 113).unwrap(), oracle);
    }

    #[test]
    fn agrees_with_exhaustive_search_on_samples() {
        for (i, x) in [0.1234567, 2.718281828, -1.41421356, 0.9999, 7.0 / 13.0]
            .iter()
            .enumerate()
        {
            for max_den in [1, 7, 50, 333] {
                let got = rationalize(*x, max_den).unwrap();
                let want = brute_best(*x, max_den as i64);
                let xq = exact_from_f64(*x).unwrap();
                assert_eq!(
                    (&got - &xq).abs(),
                    (&want - &xq).abs(),
                    "case {i} x={x} max_den={max_den}: {got} vs {want}"
                );
                assert!(got.denom().to_u64().unwrap() <= max_den);
            }
        }
    }
}
