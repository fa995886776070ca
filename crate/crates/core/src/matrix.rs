//! Dense matrices over [`ExactScalar`] and over machine integers, plus the
//! conversions between them and `nalgebra` float matrices.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::ExactScalar;

/// Row-major dense matrix of exact scalars.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<ExactScalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "matrix data has {} entries, expected {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ExactScalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ExactScalar::one());
        }
        m
    }

    pub fn from_ints(rows: usize, cols: usize, data: &[i64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&v| ExactScalar::from_int(v)).collect(),
        )
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> ExactScalar,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExactScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[ExactScalar] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }

    /// Frobenius inner product `⟨self, other⟩ = Σ self_xy·other_xy`.
    pub fn inner(&self, other: &Self) -> Result<ExactScalar> {
        if self.shape() != other.shape() {
            return Err(Error::domain("shape mismatch in inner product"));
        }
        let mut acc = ExactScalar::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            if !a.is_zero() && !b.is_zero() {
                acc += &(a * b);
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::domain("shape mismatch in subtraction"));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::domain("shape mismatch in addition"));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Union of the radicands used by any entry.
    pub fn radicand_basis(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.data.iter().flat_map(|v| v.radicands()).collect();
        set.into_iter().collect()
    }

    pub fn trace(&self) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for i in 0..self.rows.min(self.cols) {
            acc += self.get(i, i);
        }
        acc
    }

    /// Writes `self = factor · R` with `R` rational, when possible.
    ///
    /// The factor is the first non-zero entry, so `R` has a unit entry there.
    pub fn rational_factorization(&self) -> Option<(ExactScalar, Vec<BigRational>)> {
        let pivot = match self.data.iter().find(|v| !v.is_zero()) {
            Some(p) => p.clone(),
            None => {
                return Some((
                    ExactScalar::one(),
                    vec![BigRational::zero(); self.data.len()],
                ))
            }
        };
        if pivot.is_rational() {
            let mut out = Vec::with_capacity(self.data.len());
            for v in &self.data {
                out.push(v.as_rational()?);
            }
            return Some((ExactScalar::one(), out));
        }
        let inv = pivot.inv()?;
        let mut out = Vec::with_capacity(self.data.len());
        for v in &self.data {
            out.push((v * &inv).as_rational()?);
        }
        Some((pivot, out))
    }

    /// Writes `self = factor · N` with `N` an integer matrix, when possible.
    ///
    /// The integer entries of `N` are coprime as a set and `factor` is
    /// positive.
    pub fn integer_factorization(&self) -> Option<(ExactScalar, IntMatrix)> {
        let (mut factor, rational) = self.rational_factorization()?;
        let mut lcm = BigInt::one();
        for q in &rational {
            lcm = lcm.lcm(q.denom());
        }
        let mut ints: Vec<BigInt> = rational
            .iter()
            .map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        if g.is_zero() {
            g = BigInt::one();
        }
        for v in ints.iter_mut() {
            *v = &*v / &g;
        }
        factor = factor.scale(&BigRational::new(g, lcm));
        if factor.signum() < 0 {
            factor = -factor;
            for v in ints.iter_mut() {
                *v = -&*v;
            }
        }
        let data: Option<Vec<i64>> = ints.iter().map(|v| v.to_i64()).collect();
        Some((factor, IntMatrix::new(self.rows, self.cols, data?).ok()?))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.rows)
            .map(|i| Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
            .collect();
        serde_json::json!({ "rows": self.rows, "cols": self.cols, "entries": rows })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::domain("malformed exact matrix JSON");
        let rows = v.get("rows").and_then(Value::as_u64).ok_or_else(bad)? as usize;
        let cols = v.get("cols").and_then(Value::as_u64).ok_or_else(bad)? as usize;
        let entries = v.get("entries").and_then(Value::as_array).ok_or_else(bad)?;
        if entries.len() != rows {
            return Err(bad());
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in entries {
            let row = row.as_array().ok_or_else(bad)?;
            if row.len() != cols {
                return Err(bad());
            }
            for e in row {
                data.push(ExactScalar::from_json(e)?);
            }
        }
        Self::new(rows, cols, data)
    }
}

/// Row-major dense integer matrix.
#[derive(Clone, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(
                "integer matrix has the wrong number of entries",
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    pub fn to_exact(&self) -> ExactMatrix {
        ExactMatrix::from_fn(self.rows, self.cols, |i, j| {
            ExactScalar::from_int(self.get(i, j))
        })
    }

    pub fn abs_sum(&self) -> u128 {
        self.data.iter().map(|v| v.unsigned_abs() as u128).sum()
    }
}

/// Frobenius inner product of float matrices.
pub fn inner_f64(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Parses a matrix from JSON: either the exact form
/// `{"rows","cols","entries"}` or a plain nested array of numbers.
pub fn parse_matrix_json(v: &Value) -> Result<MatrixInput> {
    if v.is_object() {
        return Ok(MatrixInput::Exact(ExactMatrix::from_json(v)?));
    }
    let rows = v
        .as_array()
        .ok_or_else(|| Error::domain("matrix JSON must be an object or an array of rows"))?;
    let m1 = rows.len();
    let m2 = rows
        .first()
        .and_then(Value::as_array)
        .map(|r| r.len())
        .ok_or_else(|| Error::domain("empty matrix"))?;
    let mut ints = Vec::with_capacity(m1 * m2);
    let mut floats = Vec::with_capacity(m1 * m2);
    let mut all_int = true;
    for row in rows {
        let row = row
            .as_array()
            .filter(|r| r.len() == m2)
            .ok_or_else(|| Error::domain("ragged matrix rows"))?;
        for e in row {
            let f = e
                .as_f64()
                .ok_or_else(|| Error::domain("matrix entry is not a number"))?;
            match e.as_i64() {
                Some(i) => ints.push(i),
                None => all_int = false,
            }
            floats.push(f);
        }
    }
    if all_int {
        Ok(MatrixInput::Integer(IntMatrix::new(m1, m2, ints)?))
    } else {
        Ok(MatrixInput::Float(DMatrix::from_row_slice(m1, m2, &floats)))
    }
}

/// Parses the plain-text form: an `m1 m2` header followed by `m1·m2`
/// numbers, row-major.
pub fn parse_matrix_text(text: &str) -> Result<MatrixInput> {
    let mut tokens = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut col = 1;
        for tok in line.split_whitespace() {
            tokens.push((ln + 1, col, tok.to_string()));
            col += 1;
        }
    }
    let parse_dim = |idx: usize| -> Result<usize> {
        let (l, c, t) = tokens.get(idx).ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "missing `m1 m2` header".into(),
        })?;
        t.parse().map_err(|_| Error::Parse {
            line: *l,
            column: *c,
            message: format!("bad dimension `{t}`"),
        })
    };
    let m1 = parse_dim(0)?;
    let m2 = parse_dim(1)?;
    let body = &tokens[2..];
    if body.len() < m1 * m2 {
        return Err(Error::Parse {
            line: body.last().map(|t| t.0).unwrap_or(1),
            column: 1,
            message: format!("expected {} entries, found {}", m1 * m2, body.len()),
        });
    }
    let mut ints = Vec::new();
    let mut floats = Vec::new();
    let mut all_int = true;
    for (l, c, t) in &body[..m1 * m2] {
        match t.parse::<i64>() {
            Ok(i) => {
                ints.push(i);
                floats.push(i as f64);
            }
            Err(_) => {
                all_int = false;
                let f: f64 = t.parse().map_err(|_| Error::Parse {
                    line: *l,
                    column: *c,
                    message: format!("bad number `{t}`"),
                })?;
                if !f.is_finite() {
                    return Err(Error::Parse {
                        line: *l,
                        column: *c,
                        message: "non-finite entry".into(),
                    });
                }
                floats.push(f);
            }
        }
    }
    if all_int {
        Ok(MatrixInput::Integer(IntMatrix::new(m1, m2, ints)?))
    } else {
        Ok(MatrixInput::Float(DMatrix::from_row_slice(m1, m2, &floats)))
    }
}

/// A matrix in whichever arithmetic it was provided.
#[derive(Clone, Debug)]
pub enum MatrixInput {
    Integer(IntMatrix),
    Exact(ExactMatrix),
    Float(DMatrix<f64>),
}

impl MatrixInput {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixInput::Integer(m) => (m.rows(), m.cols()),
            MatrixInput::Exact(m) => m.shape(),
            MatrixInput::Float(m) => m.shape(),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        match self {
            MatrixInput::Integer(m) => m.to_f64(),
            MatrixInput::Exact(m) => m.to_f64(),
            MatrixInput::Float(m) => m.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_factorization_pulls_out_radical() {
        let r5 = ExactScalar::sqrt_int(5);
        let m = ExactMatrix::new(
            2,
            2,
            vec![
                r5.scale(&BigRational::new(1.into(), 15.into())),
                r5.scale(&BigRational::new(1.into(), 5.into())),
                r5.scale(&BigRational::new((-1).into(), 5.into())),
                r5.scale(&BigRational::new(1.into(), 15.into())),
            ],
        )
        .unwrap();
        let (factor, ints) = m.integer_factorization().unwrap();
        assert_eq!(ints.data(), &[1, 3, -3, 1]);
        assert_eq!(factor, r5.scale(&BigRational::new(1.into(), 15.into())));
    }

    #[test]
    fn parse_plain_forms() {
        let v: Value = serde_json::from_str("[[1,1],[1,-1]]").unwrap();
        assert!(matches!(
            parse_matrix_json(&v).unwrap(),
            MatrixInput::Integer(_)
        ));
        let t = parse_matrix_text("2 2\n1 0.5\n-1 2\n").unwrap();
        assert!(matches!(t, MatrixInput::Float(_)));
        assert!(parse_matrix_text("2 2\n1 2 3").is_err());
        assert!(parse_matrix_text("1 2\n1 NaN").is_err());
    }

    #[test]
    fn exact_json_round_trip() {
        let m = ExactMatrix::from_ints(2, 3, &[1, -2, 3, 0, 5, 6]).unwrap();
        let back = ExactMatrix::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
