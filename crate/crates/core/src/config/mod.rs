//! Line packings and their correlation matrices.

mod catalog;
mod packing;

pub use catalog::{catalog, generate, refined_icosahedron, CatalogEntry};
pub use packing::{augment_edge_midpoints, parse_packing, MidpointRule};

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::matrix::ExactMatrix;

/// Structural labels attached to a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Kissing,
    Etf,
    Platonic,
}

/// A line through the origin, stored as a (not necessarily unit) direction
/// together with its exact squared norm.
///
/// Keeping the norm separate lets configurations such as the icosahedron,
/// whose unit vectors need nested radicals, still produce exact Gram
/// matrices: `⟨u, v⟩ / √(|u|²|v|²)` is exact whenever the norms agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    coords: Vec<ExactScalar>,
    norm_sq: ExactScalar,
}

impl Line {
    pub fn new(coords: Vec<ExactScalar>) -> Result<Self> {
        let norm_sq = dot(&coords, &coords);
        if norm_sq.is_zero() {
            return Err(Error::domain("zero vector cannot define a line"));
        }
        Ok(Self { coords, norm_sq })
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| ExactScalar::from_int(c)).collect())
    }

    pub fn coords(&self) -> &[ExactScalar] {
        &self.coords
    }

    pub fn norm_sq(&self) -> &ExactScalar {
        &self.norm_sq
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn unit_f64(&self) -> Vec<f64> {
        let n = self.norm_sq.to_f64().sqrt();
        self.coords.iter().map(|c| c.to_f64() / n).collect()
    }

    pub fn dot(&self, other: &Line) -> ExactScalar {
        dot(&self.coords, &other.coords)
    }

    /// Exact cosine between the two lines' representatives, when the
    /// normalising square root stays inside the supported arithmetic.
    pub fn exact_cosine(&self, other: &Line) -> Option<ExactScalar> {
        let num = self.dot(other);
        if num.is_zero() {
            return Some(num);
        }
        let denom = if self.norm_sq == other.norm_sq {
            self.norm_sq.clone()
        } else {
            let prod = &self.norm_sq * &other.norm_sq;
            ExactScalar::sqrt_rational(&prod.as_rational()?).ok()?
        };
        num.checked_div(&denom)
    }

    pub fn neg(&self) -> Line {
        Line {
            coords: self.coords.iter().map(|c| -c).collect(),
            norm_sq: self.norm_sq.clone(),
        }
    }

    /// Representative whose first non-zero coordinate is positive.
    pub fn canonical(&self) -> Line {
        match self.coords.iter().find(|c| !c.is_zero()) {
            Some(c) if c.signum() < 0 => self.neg(),
            _ => self.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "coords": self.coords.iter().map(ExactScalar::to_json).collect::<Vec<_>>(),
            "norm_sq": self.norm_sq.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let coords = v
            .get("coords")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::domain("line JSON lacks coords"))?
            .iter()
            .map(ExactScalar::from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }
}

fn dot(a: &[ExactScalar], b: &[ExactScalar]) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += &(x * y);
        }
    }
    acc
}

/// A finite set of lines in `R^d` with optional symmetry metadata.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub name: String,
    pub d: usize,
    lines: Vec<Line>,
    pub tags: BTreeSet<Tag>,
    /// Mirror vectors whose reflections generate a symmetry group of the
    /// configuration.
    pub mirrors: Vec<Line>,
    /// True when coordinates are exact; false for packings read from decimal
    /// data, whose correlations are only tracked in floating point.
    pub exact: bool,
}

impl Configuration {
    pub fn new(name: impl Into<String>, d: usize, lines: Vec<Line>, exact: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if let Some(l) = lines.iter().find(|l| l.dim() != d) {
            return Err(Error::domain(format!(
                "line of dimension {} in R^{d}",
                l.dim()
            )));
        }
        let conf = Self {
            name: name.into(),
            d,
            lines,
            tags: BTreeSet::new(),
            mirrors: Vec::new(),
            exact,
        };
        if let Some((x, y)) = conf.find_repeated_line() {
            return Err(Error::domain(format!(
                "lines {x} and {y} coincide up to sign"
            )));
        }
        Ok(conf)
    }

    pub fn with_tags(mut self, tags: &[Tag]) -> Self {
        self.tags.extend(tags.iter().copied());
        self
    }

    pub fn with_mirrors(mut self, mirrors: Vec<Line>) -> Self {
        self.mirrors = mirrors;
        self
    }

    pub fn m(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// Unit vectors as the rows of an `m × d` float matrix.
    pub fn unit_vectors_f64(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m(), self.d);
        for (i, l) in self.lines.iter().enumerate() {
            for (j, v) in l.unit_f64().into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn radicands(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self
            .lines
            .iter()
            .flat_map(|l| {
                l.coords
                    .iter()
                    .flat_map(|c| c.radicands())
                    .collect::<Vec<_>>()
            })
            .collect();
        set.into_iter().collect()
    }

    fn find_repeated_line(&self) -> Option<(usize, usize)> {
        let u = self.unit_vectors_f64();
        for x in 0..self.m() {
            for y in 0..x {
                let c: f64 = (0..self.d).map(|k| u[(x, k)] * u[(y, k)]).sum();
                if c.abs() > 1.0 - 1e-10 {
                    return Some((y, x));
                }
            }
        }
        None
    }

    /// Concatenation of two configurations living in the same space.
    pub fn union(&self, other: &Configuration, name: impl Into<String>) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::domain(
                "cannot join configurations of different dimensions",
            ));
        }
        let mut lines = self.lines.clone();
        lines.extend(other.lines.iter().cloned());
        let mut conf = Configuration::new(name, self.d, lines, self.exact && other.exact)?;
        conf.mirrors = self.mirrors.clone();
        Ok(conf)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "name": self.name,
            "d": self.d,
            "m": self.m(),
            "exact": self.exact,
            "radicands": self.radicands(),
            "tags": self.tags,
            "rows": self.lines.iter().map(Line::to_json).collect::<Vec<_>>(),
            "mirrors": self.mirrors.iter().map(Line::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::domain(format!("configuration JSON lacks `{what}`"));
        let name = v
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("name"))?;
        let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| bad("d"))? as usize;
        let exact = v.get("exact").and_then(Value::as_bool).unwrap_or(true);
        let rows = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("rows"))?;
        let lines = rows
            .iter()
            .map(Line::from_json)
            .collect::<Result<Vec<_>>>()?;
        let mut conf = Configuration::new(name, d, lines, exact)?;
        if let Some(tags) = v.get("tags") {
            conf.tags = serde_json::from_value(tags.clone())?;
        }
        if let Some(mirrors) = v.get("mirrors").and_then(Value::as_array) {
            conf.mirrors = mirrors
                .iter()
                .map(Line::from_json)
                .collect::<Result<Vec<_>>>()?;
        }
        Ok(conf)
    }
}

/// Matrix of inner products between two configurations, i.e. a point of the
/// rank-d correlation body.
#[derive(Clone, Debug)]
pub struct CorrelationPoint {
    pub name: String,
    pub d: usize,
    exact: Option<ExactMatrix>,
    float: DMatrix<f64>,
    pub symmetric_witness: bool,
}

impl CorrelationPoint {
    pub fn m1(&self) -> usize {
        self.float.nrows()
    }

    pub fn m2(&self) -> usize {
        self.float.ncols()
    }

    pub fn exact(&self) -> Option<&ExactMatrix> {
        self.exact.as_ref()
    }

    pub fn float(&self) -> &DMatrix<f64> {
        &self.float
    }

    pub fn from_exact(name: impl Into<String>, d: usize, m: ExactMatrix) -> Self {
        Self {
            name: name.into(),
            d,
            float: m.to_f64(),
            symmetric_witness: m.is_symmetric(),
            exact: Some(m),
        }
    }

    pub fn from_float(name: impl Into<String>, d: usize, m: DMatrix<f64>) -> Self {
        Self {
            name: name.into(),
            d,
            exact: None,
            symmetric_witness: false,
            float: m,
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            name: format!("{}^T", self.name),
            d: self.d,
            exact: self.exact.as_ref().map(ExactMatrix::transpose),
            float: self.float.transpose(),
            symmetric_witness: self.symmetric_witness,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "name": self.name,
            "d": self.d,
            "m1": self.m1(),
            "m2": self.m2(),
            "exact": self.exact.as_ref().map(ExactMatrix::to_json),
            "float": (0..self.m1())
                .map(|i| (0..self.m2()).map(|j| self.float[(i, j)]).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Exact inner-product matrix `P_xy = ⟨a_x, b_y⟩` of two configurations.
///
/// The result is exact when both inputs are and every normalisation stays in
/// the supported arithmetic; otherwise only the float matrix is kept.
pub fn gram(a: &Configuration, b: &Configuration) -> Result<CorrelationPoint> {
    if a.d != b.d {
        return Err(Error::domain(format!(
            "dimension mismatch: {} is in R^{}, {} is in R^{}",
            a.name, a.d, b.name, b.d
        )));
    }
    let name = if a.name == b.name {
        a.name.clone()
    } else {
        format!("{}|{}", a.name, b.name)
    };
    let ua = a.unit_vectors_f64();
    let ub = b.unit_vectors_f64();
    let float = &ua * ub.transpose();
    let same = std::ptr::eq(a, b) || (a.name == b.name && a.lines == b.lines);
    let mut exact = None;
    if a.exact && b.exact {
        let mut data = Vec::with_capacity(a.m() * b.m());
        let mut ok = true;
        'outer: for la in &a.lines {
            for lb in &b.lines {
                match la.exact_cosine(lb) {
                    Some(c) => data.push(c),
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            exact = Some(ExactMatrix::new(a.m(), b.m(), data)?);
        }
    }
    Ok(CorrelationPoint {
        name,
        d: a.d,
        exact,
        float,
        symmetric_witness: same,
    })
}

/// `A = P − λ·I` for a square correlation matrix.
pub fn diagonal_modification(p: &ExactMatrix, lambda: &ExactScalar) -> Result<ExactMatrix> {
    if !p.is_square() {
        return Err(Error::domain("diagonal modification needs a square matrix"));
    }
    let mut out = p.clone();
    for i in 0..p.rows() {
        out.set(i, i, p.get(i, i) - lambda);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_rejects_zero() {
        assert!(Line::from_ints(&[0, 0]).is_err());
    }

    #[test]
    fn repeated_lines_rejected() {
        let l = vec![
            Line::from_ints(&[1, 0]).unwrap(),
            Line::from_ints(&[-2, 0]).unwrap(),
        ];
        assert!(Configuration::new("bad", 2, l, true).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = Configuration::new("a", 2, vec![Line::from_ints(&[1, 0]).unwrap()], true).unwrap();
        let b =
            Configuration::new("b", 3, vec![Line::from_ints(&[1, 0, 0]).unwrap()], true).unwrap();
        assert!(matches!(gram(&a, &b), Err(Error::Domain(_))));
    }
}
