//! Exact rank and null vectors of integer matrices, and rounding of float
//! hyperplanes to integer ones.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::rationalize;

/// Reduced row echelon form over ℚ; returns the pivot columns.
fn rref(rows: &mut [Vec<BigRational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        let prow = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn to_rational(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect()
        })
        .collect()
}

/// Rank of an integer matrix given by rows.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let Some(cols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m = to_rational(rows);
    rref(&mut m, cols).len()
}

/// Rank of `{p_i − p_0}`.
pub fn affine_rank(points: &[Vec<i64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    integer_rank(&diffs)
}

/// Primitive integer vector spanning the null space of `rows` when that null
/// space is one-dimensional.
pub fn integer_null_vector(rows: &[Vec<i64>], cols: usize) -> Option<Vec<BigInt>> {
    let mut m = to_rational(rows);
    let pivots = rref(&mut m, cols);
    if pivots.len() + 1 != cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); cols];
    v[free] = BigRational::one();
    for (r, &c) in pivots.iter().enumerate() {
        v[c] = -m[r][free].clone();
    }
    Some(primitive(&v))
}

/// Scales a rational vector to coprime integers, keeping the direction.
pub fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Result of rounding a float hyperplane.
#[derive(Clone, Debug)]
pub struct IntegerNormal {
    pub matrix: Vec<i64>,
    pub rows: usize,
    pub cols: usize,
    /// Positive factor with `matrix ≈ scale·M`.
    pub scale: f64,
    /// Largest entry-wise deviation `|matrix/scale − M|`.
    pub max_perturbation: f64,
}

impl IntegerNormal {
    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            self.rows,
            self.cols,
            &self.matrix.iter().map(|&v| v as f64).collect::<Vec<_>>(),
        )
    }
}

/// Rounds `m` to an integer matrix: the entries are divided by the largest
/// absolute entry, rationalised with denominators up to `denominator_cap`,
/// and brought to a common denominator.
///
/// `separations` lists pairs `(X, Y)` for which `⟨M, X⟩ > ⟨M, Y⟩` must
/// survive the rounding.
pub fn integerize_normal(
    m: &DMatrix<f64>,
    denominator_cap: u64,
    separations: &[(DMatrix<f64>, DMatrix<f64>)],
) -> Result<IntegerNormal> {
    let max = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !max.is_finite() {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    if max == 0.0 {
        return Err(Error::Degenerate("zero hyperplane".into()));
    }
    let (rows, cols) = m.shape();
    let mut qs = Vec::with_capacity(rows * cols);
    for x in 0..rows {
        for y in 0..cols {
            qs.push(rationalize(m[(x, y)] / max, denominator_cap)?);
        }
    }
    let ints = primitive(&qs);
    let matrix: Vec<i64> = ints
        .iter()
        .map(|v| {
            v.to_i64()
                .ok_or_else(|| Error::RoundingFailed("entries exceed 64 bits".into()))
        })
        .collect::<Result<_>>()?;
    let lead = (0..qs.len())
        .max_by(|&i, &j| qs[i].abs().cmp(&qs[j].abs()))
        .expect("non-empty matrix");
    let scale = matrix[lead] as f64 / m[(lead / cols, lead % cols)];
    let out = IntegerNormal {
        rows,
        cols,
        max_perturbation: (0..qs.len())
            .map(|i| (matrix[i] as f64 / scale - m[(i / cols, i % cols)]).abs())
            .fold(0.0, f64::max),
        matrix,
        scale,
    };
    let a = out.to_f64();
    for (x, y) in separations {
        let before = m.dot(x) - m.dot(y);
        let after = a.dot(x) - a.dot(y);
        if before > 0.0 && after <= 0.0 {
            return Err(Error::RoundingFailed(format!(
                "rounding to denominators ≤ {denominator_cap} destroys a separation"
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_vector() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(integer_rank(&rows), 2);
        let v = integer_null_vector(&rows, 3).unwrap();
        let dot: BigInt = rows[0]
            .iter()
            .zip(&v)
            .map(|(a, b)| BigInt::from(*a) * b)
            .sum();
        assert!(dot.is_zero());
        assert!(v.iter().any(|x| !x.is_zero()));
    }

    #[test]
    fn affine_rank_of_triangle() {
        let pts = vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1]];
        assert_eq!(affine_rank(&pts), 2);
    }

    #[test]
    fn thirds_become_integers() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let a = integerize_normal(&m, 1000, &[]).unwrap();
        assert_eq!(a.matrix, vec![1, -1, 1, 1]);
    }

    #[test]
    fn integers_unchanged() {
        let m = DMatrix::from_row_slice(1, 3, &[2.0, -3.0, 5.0]);
        let a = integerize_normal(&m, 10, &[]).unwrap();
        assert_eq!(a.matrix, vec![2, -3, 5]);
        assert!(a.max_perturbation < 1e-12);
    }

    #[test]
    fn lost_separation_is_reported() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 0.5]);
        let x = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let y = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(integerize_normal(&m, 10, &[(y, x)]).is_ok());
        let m = DMatrix::from_row_slice(1, 2, &[0.999, 1.0]);
        let x = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let y = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(matches!(
            integerize_normal(&m, 10, &[(x, y)]),
            Err(Error::RoundingFailed(_))
        ));
    }
}
