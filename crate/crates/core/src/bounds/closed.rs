//! Closed-form constants: `γ(d)`, the `n = 2` state of the art, the PSD
//! constant, and the infinite-order bound of Davie and Reeds.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::RationalInterval;

/// `coeff · π^pi_power`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiMultiple {
    #[serde(with = "crate::exact::json::rational")]
    pub coeff: BigRational,
    pub pi_power: i32,
}

impl PiMultiple {
    pub fn new(coeff: BigRational, pi_power: i32) -> Self {
        Self { coeff, pi_power }
    }

    pub fn rational(q: BigRational) -> Self {
        Self::new(q, 0)
    }

    /// Certified enclosure.
    pub fn interval(&self) -> RationalInterval {
        let p = RationalInterval::pi().powi(self.pi_power.unsigned_abs());
        let p = if self.pi_power < 0 {
            p.recip().expect("π is positive")
        } else {
            p
        };
        p.scale(&self.coeff)
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pi_power)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(&self.coeff * &o.coeff, self.pi_power + o.pi_power)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.coeff.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        Ok(Self::new(
            &self.coeff / &o.coeff,
            self.pi_power - o.pi_power,
        ))
    }
}

impl fmt::Display for PiMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.coeff.numer(), self.coeff.denom());
        let pi = match self.pi_power.abs() {
            0 => String::new(),
            1 => "π".into(),
            k => format!("π^{k}"),
        };
        match self.pi_power.signum() {
            0 => write!(f, "{}", self.coeff),
            1 if d.is_one() && n.is_one() => write!(f, "{pi}"),
            1 if d.is_one() => write!(f, "{n}{pi}"),
            1 if n.is_one() => write!(f, "{pi}/{d}"),
            1 => write!(f, "{n}{pi}/{d}"),
            _ if d.is_one() => write!(f, "{n}/{pi}"),
            _ => write!(f, "{n}/({d}{pi})"),
        }
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn binomial(n: u64, k: u64) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `Γ(k + 1/2) / √π = (2k)! / (4^k k!)`.
fn half_gamma(k: u64) -> BigRational {
    BigRational::new(
        factorial(2 * k),
        BigInt::from(4).pow(k as u32) * factorial(k),
    )
}

/// `γ(d) = (2/d)·(Γ((d+1)/2)/Γ(d/2))²`, a rational multiple of `π` for even
/// `d` and of `1/π` for odd `d`.
pub fn gamma(d: usize) -> Result<PiMultiple> {
    if d == 0 {
        return Err(Error::domain("γ(d) needs d ≥ 1"));
    }
    let d64 = d as u64;
    let two_over_d = BigRational::new(2.into(), BigInt::from(d64));
    let k = d64 / 2;
    if d % 2 == 0 {
        // Γ(k+1/2)/Γ(k) = half_gamma(k)·√π/(k−1)!
        let r = half_gamma(k) / BigRational::from_integer(factorial(k - 1));
        Ok(PiMultiple::new(two_over_d * &r * &r, 1))
    } else {
        // Γ(k+1)/Γ(k+1/2) = k!/(half_gamma(k)·√π)
        let r = BigRational::from_integer(factorial(k)) / half_gamma(k);
        Ok(PiMultiple::new(two_over_d * &r * &r, -1))
    }
}

/// `γ(d)/γ(n)`, a lower bound on `K_G(d→n)` for `d ≥ n`.
pub fn gamma_ratio(d: usize, n: usize) -> Result<PiMultiple> {
    if n > d {
        return Err(Error::domain("need n ≤ d"));
    }
    gamma(d)?.div(&gamma(n)?)
}

/// State-of-the-art lower bound on `K_G(d→2)` in binomial form:
/// `d·C(d−1,k)²/2^{2d−3}` for `d = 2k` and `2^{2d+1}/(d·C(d−1,k)²·π²)` for
/// `d = 2k+1`.
pub fn soa_lower_n2(d: usize) -> Result<PiMultiple> {
    if d < 3 {
        return Err(Error::domain("the n = 2 bound is stated for d ≥ 3"));
    }
    let d64 = d as u64;
    let k = d64 / 2;
    let c = binomial(d64 - 1, k);
    let c2 = &c * &c;
    if d % 2 == 0 {
        let den = BigInt::one() << (2 * d - 3);
        Ok(PiMultiple::rational(BigRational::new(
            BigInt::from(d64) * c2,
            den,
        )))
    } else {
        let num = BigInt::one() << (2 * d + 1);
        Ok(PiMultiple::new(
            BigRational::new(num, BigInt::from(d64) * c2),
            -2,
        ))
    }
}

/// `K_G^⪰(d) = γ(d)·π/2`, the Grothendieck constant of PSD matrices.
pub fn psd_constant(d: usize) -> Result<PiMultiple> {
    Ok(gamma(d)?.mul(&PiMultiple::new(BigRational::new(1.into(), 2.into()), 1)))
}

fn rho(l: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * l * (-l * l / 2.0).exp()
}

/// `(1 − ρ(λ)) / max{ρ(λ), F_ρ(λ)}` with the Gaussian tail written through
/// `erfc`: `2√(2/π)∫_λ^∞ e^{−x²/2}dx = 2·erfc(λ/√2)`.
pub fn davie_objective(l: f64) -> f64 {
    let r = rho(l);
    let f = 2.0 / std::f64::consts::PI * (-l * l).exp()
        + r * (1.0 - 2.0 * libm::erfc(l / std::f64::consts::SQRT_2));
    (1.0 - r) / r.max(f)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DavieBound {
    pub value: f64,
    pub lambda: f64,
}

/// Maximises [`davie_objective`] over `(0, 1)`: a uniform grid locates the
/// peak, golden-section search refines it to `refine_tol`.
pub fn davie_bound(grid: usize, refine_tol: f64) -> Result<DavieBound> {
    if grid < 3 {
        return Err(Error::domain("grid needs at least 3 points"));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let h = 1.0 / grid as f64;
    let best = (1..grid)
        .map(|i| i as f64 * h)
        .max_by(|a, b| davie_objective(*a).total_cmp(&davie_objective(*b)))
        .expect("grid is non-empty");
    let (mut a, mut b) = ((best - h).max(f64::MIN_POSITIVE), (best + h).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (davie_objective(c), davie_objective(d));
    while b - a > refine_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = davie_objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = davie_objective(d);
        }
    }
    let lambda = (a + b) / 2.0;
    Ok(DavieBound {
        value: davie_objective(lambda),
        lambda,
    })
}

/// Lower end of an interval as a float, rounded down.
pub fn interval_lo_f64(i: &RationalInterval) -> f64 {
    let x = i.lo_f64();
    if BigRational::from_float(x).is_some_and(|q| &q > i.lo()) {
        x.next_down()
    } else {
        x
    }
}

/// Upper end of an interval as a float, rounded up.
pub fn interval_hi_f64(i: &RationalInterval) -> f64 {
    let x = i.hi_f64();
    if BigRational::from_float(x).is_some_and(|q| &q < i.hi()) {
        x.next_up()
    } else {
        x
    }
}

/// Checks that the whole enclosure lies within `tol` of `target`.
pub fn within(i: &RationalInterval, target: f64, tol: f64) -> bool {
    interval_lo_f64(i) >= target - tol && interval_hi_f64(i) <= target + tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn gamma_small_orders() {
        assert_eq!(gamma(1).unwrap(), PiMultiple::new(ratio(2, 1), -1));
        assert_eq!(gamma(2).unwrap(), PiMultiple::new(ratio(1, 4), 1));
        assert_eq!(gamma(3).unwrap(), PiMultiple::new(ratio(8, 3), -1));
        assert!(gamma(0).is_err());
    }

    #[test]
    fn psd_small_orders() {
        assert_eq!(psd_constant(1).unwrap(), PiMultiple::rational(ratio(1, 1)));
        assert_eq!(psd_constant(2).unwrap(), PiMultiple::new(ratio(1, 8), 2));
        assert_eq!(psd_constant(3).unwrap(), PiMultiple::rational(ratio(4, 3)));
    }

    #[test]
    fn binomial_form_matches_gamma_ratio() {
        for d in 3..=16 {
            assert_eq!(
                soa_lower_n2(d).unwrap(),
                gamma_ratio(d, 2).unwrap(),
                "d = {d}"
            );
        }
    }

    #[test]
    fn display() {
        assert_eq!(soa_lower_n2(3).unwrap().to_string(), "32/(3π^2)");
        assert_eq!(soa_lower_n2(4).unwrap().to_string(), "9/8");
        assert_eq!(gamma(2).unwrap().to_string(), "π/4");
    }

    #[test]
    fn davie_boundary() {
        // ρ → 0 and F → 2/π as λ → 0.
        assert!((davie_objective(1e-9) - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
