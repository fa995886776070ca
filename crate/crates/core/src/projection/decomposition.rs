//! Certificates that a shrunken point `αP` lies in the rank-`n` body, read
//! off an approximate convex decomposition of `v0·P`.
//!
//! If `‖v0·P − X‖_F ≤ ε` with `X` in the body, then `v0·P/(1+ε)` is in the
//! body too: the unit Frobenius ball sits inside the rank-one body (its
//! support function `SDP_1[M]` is at least `‖M‖_F`), so the residual is a
//! point of `ε·body`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::bpcg::{Projection, ReducedSpace};
use crate::config::CorrelationPoint;
use crate::error::{Error, Result};
use crate::polytope::Strategy;

/// Denominator of the grid on which `ε` is rounded up.
const EPS_GRID: i64 = 1_000_000_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    #[serde(with = "crate::exact::json::rational")]
    pub v0: BigRational,
    /// Upper bound on the Frobenius residual, on a 1e-12 grid.
    pub epsilon: f64,
    #[serde(with = "crate::exact::json::rational")]
    pub alpha: BigRational,
    pub vertex_count: usize,
    pub n: usize,
    /// Residual as computed, before the rounding allowances.
    pub raw_residual: f64,
    /// Allowance for strategy vectors that are not exactly unit length.
    pub norm_defect: f64,
    /// True when built from externally reported `v0` and `ε`.
    pub reported: bool,
}

fn round_up_eps(eps: f64) -> Result<BigRational> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::domain(
            "residual must be a finite non-negative number",
        ));
    }
    let scaled = (eps * EPS_GRID as f64).ceil();
    let num = scaled
        .to_i64()
        .ok_or_else(|| Error::domain("residual too large"))?;
    // The product may have rounded down; one grid step covers it.
    let num = if (num as f64) < eps * EPS_GRID as f64 {
        num + 1
    } else {
        num
    };
    Ok(BigRational::new(BigInt::from(num), BigInt::from(EPS_GRID)))
}

fn alpha_of(v0: &BigRational, eps: &BigRational) -> BigRational {
    v0 / (BigRational::one() + eps)
}

/// Residual `‖v0·P − Σ w_i V_i‖_F` of a projection and the norm-defect
/// allowance, with weights renormalised to sum to one.
fn residual(
    p: &CorrelationPoint,
    v0: f64,
    space: &ReducedSpace,
    proj: &Projection,
) -> (f64, f64, f64) {
    let (m1, m2) = (p.m1(), p.m2());
    let total: f64 = proj.active.atoms.iter().map(|a| a.weight).sum();
    let mut x = DMatrix::<f64>::zeros(m1, m2);
    let mut defect = 0.0;
    let mut mass = 0.0;
    for a in &proj.active.atoms {
        let w = a.weight / total;
        x += space.expand(&a.coords) * w;
        mass += w * (m1 * m2) as f64;
        if let Strategy::Unit(u) = &a.strategy {
            // Entries ⟨a_x, b_y⟩ with |‖a‖‖b‖ − 1| ≤ (1+δ)² − 1.
            let d = u.max_norm_defect();
            defect += w * ((1.0 + d) * (1.0 + d) - 1.0) * ((m1 * m2) as f64).sqrt();
        }
    }
    let r = (p.float() * v0 - x).norm();
    let scale = v0 * p.float().norm() + mass.sqrt();
    (r, defect, scale)
}

impl DecompositionCertificate {
    /// Certificate from a converged projection of `v0·P`.
    pub fn from_projection(
        p: &CorrelationPoint,
        v0: &BigRational,
        space: &ReducedSpace,
        proj: &Projection,
        n: usize,
    ) -> Result<Self> {
        if !proj.converged {
            return Err(Error::Certificate("projection did not converge".into()));
        }
        if proj.active.is_empty() {
            return Err(Error::Certificate("empty decomposition".into()));
        }
        let v0f = v0
            .to_f64()
            .ok_or_else(|| Error::domain("v0 out of range"))?;
        let (raw, defect, scale) = residual(p, v0f, space, proj);
        let slack = 64.0 * f64::EPSILON * scale * (1 + proj.active.len()) as f64;
        let eps_q = round_up_eps(raw + defect + slack)?;
        Ok(Self {
            alpha: alpha_of(v0, &eps_q),
            epsilon: eps_q.to_f64().unwrap_or(f64::INFINITY),
            v0: v0.clone(),
            vertex_count: proj.active.len(),
            n,
            raw_residual: raw,
            norm_defect: defect,
            reported: false,
        })
    }

    /// Certificate data from a reported `v0` and `ε`, without a
    /// decomposition to check.
    pub fn from_reported(v0: BigRational, epsilon: f64, n: usize) -> Result<Self> {
        let eps_q = round_up_eps(epsilon)?;
        Ok(Self {
            alpha: alpha_of(&v0, &eps_q),
            epsilon: eps_q.to_f64().unwrap_or(f64::INFINITY),
            v0,
            vertex_count: 0,
            n,
            raw_residual: epsilon,
            norm_defect: 0.0,
            reported: true,
        })
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64().unwrap_or(f64::NAN)
    }

    /// Recomputes the residual of `proj` and checks it against `epsilon`.
    pub fn verify(
        &self,
        p: &CorrelationPoint,
        space: &ReducedSpace,
        proj: &Projection,
    ) -> Result<()> {
        let v0f = self
            .v0
            .to_f64()
            .ok_or_else(|| Error::domain("v0 out of range"))?;
        let (raw, defect, _) = residual(p, v0f, space, proj);
        if raw + defect > self.epsilon {
            return Err(Error::Certificate(format!(
                "residual {:.3e} exceeds the certified {:.3e}",
                raw + defect,
                self.epsilon
            )));
        }
        if alpha_of(&self.v0, &round_up_eps(self.epsilon)?) != self.alpha {
            return Err(Error::Certificate(
                "alpha does not match v0 and epsilon".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn reported_values() {
        let c = DecompositionCertificate::from_reported(ratio(8962, 10000), 2.7e-4, 2).unwrap();
        assert!((c.alpha_f64() - 0.895958).abs() < 1e-6);
        let z = DecompositionCertificate::from_reported(ratio(8962, 10000), 0.0, 2).unwrap();
        assert_eq!(z.alpha, ratio(8962, 10000));
    }

    #[test]
    fn epsilon_rounds_up() {
        let e = round_up_eps(1.0000000000001e-12).unwrap();
        assert!(e >= exact_le(1.0000000000001e-12));
        assert!(round_up_eps(-1.0).is_err());
    }

    fn exact_le(x: f64) -> BigRational {
        crate::exact::exact_from_f64(x).unwrap()
    }
}
