use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::matrix::{ExactMatrix, IntMatrix};

/// A vertex `a bᵀ` of the rank-one correlation polytope.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignStrategy {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

impl SignStrategy {
    pub fn new(a: Vec<i8>, b: Vec<i8>) -> Result<Self> {
        if a.iter().chain(&b).any(|&s| s != 1 && s != -1) {
            return Err(Error::domain("sign strategies contain only ±1"));
        }
        Ok(Self { a, b })
    }

    /// Recovers the best `b` for a fixed `a`: `b_y = sign(Σ_x M_xy a_x)`
    /// with `sign(0) = +1`.
    pub fn best_response_f64(m: &DMatrix<f64>, a: Vec<i8>) -> Self {
        let b = (0..m.ncols())
            .map(|y| {
                let s: f64 = (0..m.nrows()).map(|x| m[(x, y)] * a[x] as f64).sum();
                if s < 0.0 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        Self { a, b }
    }

    /// Flips both sides so that `a[0] = +1`; the bilinear value is unchanged.
    pub fn normalized(mut self) -> Self {
        if self.a.first() == Some(&-1) {
            self.a.iter_mut().for_each(|s| *s = -*s);
            self.b.iter_mut().for_each(|s| *s = -*s);
        }
        self
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.a.len(), self.b.len(), |x, y| {
            (self.a[x] * self.b[y]) as f64
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

/// A feasible point of the rank-`n` correlation body: unit vectors `a_x`,
/// `b_y` in `R^n`, giving the matrix `⟨a_x, b_y⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitStrategy {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl UnitStrategy {
    pub fn matrix_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.a.len(), self.b.len(), |x, y| {
            self.a[x].iter().zip(&self.b[y]).map(|(p, q)| p * q).sum()
        })
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .map(|v| (v.iter().map(|t| t * t).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Either kind of strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Strategy {
    Sign(SignStrategy),
    Unit(UnitStrategy),
}

impl Strategy {
    pub fn matrix_f64(&self) -> DMatrix<f64> {
        match self {
            Strategy::Sign(s) => s.matrix_f64(),
            Strategy::Unit(u) => u.matrix_f64(),
        }
    }

    pub fn as_sign(&self) -> Option<&SignStrategy> {
        match self {
            Strategy::Sign(s) => Some(s),
            Strategy::Unit(_) => None,
        }
    }
}

fn check_shape(shape: (usize, usize), s: &SignStrategy) -> Result<()> {
    if shape != (s.a.len(), s.b.len()) {
        return Err(Error::domain(format!(
            "strategy of shape {}×{} against a {}×{} matrix",
            s.a.len(),
            s.b.len(),
            shape.0,
            shape.1
        )));
    }
    Ok(())
}

/// Exact bilinear value `Σ_xy M_xy a_x b_y`.
pub fn vertex_value(m: &ExactMatrix, s: &SignStrategy) -> Result<ExactScalar> {
    check_shape(m.shape(), s)?;
    let mut acc = ExactScalar::zero();
    for y in 0..m.cols() {
        let mut col = ExactScalar::zero();
        for x in 0..m.rows() {
            let v = m.get(x, y);
            if v.is_zero() {
                continue;
            }
            if s.a[x] > 0 {
                col += v;
            } else {
                col -= v;
            }
        }
        if s.b[y] > 0 {
            acc += &col;
        } else {
            acc -= &col;
        }
    }
    Ok(acc)
}

pub fn vertex_value_int(m: &IntMatrix, s: &SignStrategy) -> Result<i128> {
    check_shape((m.rows(), m.cols()), s)?;
    let mut acc = 0i128;
    for y in 0..m.cols() {
        let col: i128 = (0..m.rows())
            .map(|x| m.get(x, y) as i128 * s.a[x] as i128)
            .sum();
        acc += col * s.b[y] as i128;
    }
    Ok(acc)
}

pub fn vertex_value_f64(m: &DMatrix<f64>, s: &SignStrategy) -> Result<f64> {
    check_shape(m.shape(), s)?;
    let mut acc = 0.0;
    for y in 0..m.ncols() {
        let col: f64 = (0..m.nrows()).map(|x| m[(x, y)] * s.a[x] as f64).sum();
        acc += col * s.b[y] as f64;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_value() {
        let m = ExactMatrix::from_ints(2, 2, &[1, 1, 1, -1]).unwrap();
        let s = SignStrategy::new(vec![1, 1], vec![1, 1]).unwrap();
        assert_eq!(vertex_value(&m, &s).unwrap(), ExactScalar::from_int(2));
        let flipped = SignStrategy::new(vec![-1, -1], vec![-1, -1]).unwrap();
        assert_eq!(
            vertex_value(&m, &flipped).unwrap(),
            ExactScalar::from_int(2)
        );
    }

    #[test]
    fn shape_mismatch_is_domain_error() {
        let m = ExactMatrix::from_ints(2, 2, &[1, 1, 1, -1]).unwrap();
        let s = SignStrategy::new(vec![1], vec![1, 1]).unwrap();
        assert!(vertex_value(&m, &s).is_err());
        assert!(SignStrategy::new(vec![0], vec![1]).is_err());
    }
}
