use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde_json::Value;

use crate::config::{Configuration, Line};
use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::matrix::ExactMatrix;

/// Default bound on the number of elements enumerated by [`SignedPermutationGroup::closure`].
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// Signed permutation `x ↦ sign[x]·image[x]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    image: Vec<u32>,
    sign: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n as u32).collect(),
            sign: vec![1; n],
        }
    }

    pub fn new(image: Vec<u32>, sign: Vec<i8>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        if sign.len() != n || sign.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::domain("signed permutation needs one ±1 per index"));
        }
        for &i in &image {
            let i = i as usize;
            if i >= n || seen[i] {
                return Err(Error::domain(
                    "signed permutation image is not a permutation",
                ));
            }
            seen[i] = true;
        }
        Ok(Self { image, sign })
    }

    /// From signed 1-based indices, e.g. `[3, -1, 2]`.
    pub fn from_signed_one_based(v: &[i64]) -> Result<Self> {
        let mut image = Vec::with_capacity(v.len());
        let mut sign = Vec::with_capacity(v.len());
        for &e in v {
            if e == 0 {
                return Err(Error::domain("signed indices are 1-based and non-zero"));
            }
            image.push((e.unsigned_abs() - 1) as u32);
            sign.push(if e < 0 { -1 } else { 1 });
        }
        Self::new(image, sign)
    }

    pub fn to_signed_one_based(&self) -> Vec<i64> {
        self.image
            .iter()
            .zip(&self.sign)
            .map(|(&i, &s)| s as i64 * (i as i64 + 1))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, x: usize) -> (usize, i8) {
        (self.image[x] as usize, self.sign[x])
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let (image, sign) = other
            .image
            .iter()
            .zip(&other.sign)
            .map(|(&i, &s)| (self.image[i as usize], s * self.sign[i as usize]))
            .unzip();
        Self { image, sign }
    }
}

/// Simultaneous signed permutations of rows and columns.
pub type GroupElement = (SignedPerm, SignedPerm);

/// A finitely generated group acting on `m1 × m2` matrices by
/// `(g·M)[σ(x)][τ(y)] = s_x t_y M[x][y]`.
#[derive(Clone, Debug)]
pub struct SignedPermutationGroup {
    m1: usize,
    m2: usize,
    generators: Vec<GroupElement>,
}

impl SignedPermutationGroup {
    pub fn new(m1: usize, m2: usize, generators: Vec<GroupElement>) -> Result<Self> {
        for (r, c) in &generators {
            if r.len() != m1 || c.len() != m2 {
                return Err(Error::domain(
                    "generator size does not match the matrix shape",
                ));
            }
        }
        Ok(Self { m1, m2, generators })
    }

    pub fn trivial(m1: usize, m2: usize) -> Self {
        Self {
            m1,
            m2,
            generators: Vec::new(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// The group induced on the lines of `a` (rows) and `b` (columns) by the
    /// reflections in `mirrors`.
    ///
    /// Fails when a reflection does not map the configurations onto
    /// themselves.
    pub fn from_mirrors(a: &Configuration, b: &Configuration, mirrors: &[Line]) -> Result<Self> {
        let ua: Vec<Vec<f64>> = a.lines().iter().map(Line::unit_f64).collect();
        let ub: Vec<Vec<f64>> = b.lines().iter().map(Line::unit_f64).collect();
        let mut generators = Vec::new();
        for r in mirrors {
            let r = r.unit_f64();
            if r.len() != a.d {
                return Err(Error::domain("mirror of the wrong dimension"));
            }
            let rows = reflect_lines(&ua, &r)?;
            let cols = reflect_lines(&ub, &r)?;
            if rows != SignedPerm::identity(ua.len()) || cols != SignedPerm::identity(ub.len()) {
                generators.push((rows, cols));
            }
        }
        Self::new(a.m(), b.m(), generators)
    }

    /// The configuration's own symmetry hint, acting on both sides.
    pub fn from_configuration(a: &Configuration, b: &Configuration) -> Result<Self> {
        if a.mirrors.is_empty() {
            return Ok(Self::trivial(a.m(), b.m()));
        }
        Self::from_mirrors(a, b, &a.mirrors)
    }

    /// All elements, by breadth-first closure from the identity.
    pub fn closure(&self, cap: usize) -> Result<Vec<GroupElement>> {
        let id = (SignedPerm::identity(self.m1), SignedPerm::identity(self.m2));
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut queue = VecDeque::new();
        let mut out = Vec::new();
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(g) = queue.pop_front() {
            for (r, c) in &self.generators {
                let h = (r.compose(&g.0), c.compose(&g.1));
                if !seen.contains(&h) {
                    if seen.len() >= cap {
                        return Err(Error::resource(format!(
                            "group closure exceeds {cap} elements"
                        )));
                    }
                    seen.insert(h.clone());
                    queue.push_back(h);
                }
            }
            out.push(g);
        }
        Ok(out)
    }

    pub fn order(&self, cap: usize) -> Result<usize> {
        Ok(self.closure(cap)?.len())
    }

    /// Orbit decomposition of the matrix cells.
    pub fn invariant_basis(&self) -> InvariantBasis {
        InvariantBasis::new(self)
    }

    /// Applies one element to a float matrix.
    pub fn act_f64(g: &GroupElement, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for x in 0..m.nrows() {
            let (gx, sx) = g.0.apply(x);
            for y in 0..m.ncols() {
                let (gy, sy) = g.1.apply(y);
                out[(gx, gy)] = (sx * sy) as f64 * m[(x, y)];
            }
        }
        out
    }

    pub fn act_exact(g: &GroupElement, m: &ExactMatrix) -> ExactMatrix {
        let mut out = ExactMatrix::zeros(m.rows(), m.cols());
        for x in 0..m.rows() {
            let (gx, sx) = g.0.apply(x);
            for y in 0..m.cols() {
                let (gy, sy) = g.1.apply(y);
                let v = m.get(x, y);
                out.set(gx, gy, if sx * sy > 0 { v.clone() } else { -v });
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "m1": self.m1,
            "m2": self.m2,
            "generators": self.generators.iter().map(|(r, c)| serde_json::json!({
                "rows": r.to_signed_one_based(),
                "cols": c.to_signed_one_based(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Reads `{"m1", "m2", "generators": [{"rows": [...], "cols": [...]}]}`;
    /// `cols` defaults to `rows`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::domain("malformed group JSON");
        let m1 = v.get("m1").and_then(Value::as_u64).ok_or_else(bad)? as usize;
        let m2 = v
            .get("m2")
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .unwrap_or(m1);
        let gens = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(bad)?;
        let parse = |a: &Value| -> Result<SignedPerm> {
            let idx: Vec<i64> = a
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|e| e.as_i64().ok_or_else(bad))
                .collect::<Result<_>>()?;
            SignedPerm::from_signed_one_based(&idx)
        };
        let mut generators = Vec::new();
        for g in gens {
            let rows = parse(g.get("rows").ok_or_else(bad)?)?;
            let cols = match g.get("cols") {
                Some(c) => parse(c)?,
                None => rows.clone(),
            };
            generators.push((rows, cols));
        }
        Self::new(m1, m2, generators)
    }
}

fn reflect_lines(units: &[Vec<f64>], r: &[f64]) -> Result<SignedPerm> {
    let rr: f64 = r.iter().map(|t| t * t).sum();
    let mut image = Vec::with_capacity(units.len());
    let mut sign = Vec::with_capacity(units.len());
    for u in units {
        let c: f64 = u.iter().zip(r).map(|(p, q)| p * q).sum::<f64>() * 2.0 / rr;
        let v: Vec<f64> = u.iter().zip(r).map(|(p, q)| p - c * q).collect();
        let hit = units.iter().enumerate().find_map(|(j, w)| {
            let d: f64 = v.iter().zip(w).map(|(p, q)| p * q).sum();
            if d > 1.0 - 1e-9 {
                Some((j, 1))
            } else if d < -1.0 + 1e-9 {
                Some((j, -1))
            } else {
                None
            }
        });
        let (j, s) =
            hit.ok_or_else(|| Error::domain("mirror does not preserve the configuration"))?;
        image.push(j as u32);
        sign.push(s);
    }
    SignedPerm::new(image, sign)
}

/// Partition of the matrix cells into signed orbits.
///
/// Every invariant matrix takes the value `sign[c]·z[orbit[c]]` on cell `c`;
/// orbits in which some cell is mapped to minus itself are forced to zero and
/// carry no coordinate.
#[derive(Clone, Debug)]
pub struct InvariantBasis {
    m1: usize,
    m2: usize,
    /// Free-orbit index per cell, `None` for forced-zero cells.
    orbit: Vec<Option<usize>>,
    sign: Vec<i8>,
    /// Cells of each free orbit.
    members: Vec<Vec<usize>>,
    forced_zero: usize,
}

impl InvariantBasis {
    fn new(g: &SignedPermutationGroup) -> Self {
        let n = g.m1 * g.m2;
        let mut parent: Vec<usize> = (0..n).collect();
        // Parity relative to the parent: value[c] = parity[c]·value[parent[c]].
        let mut parity: Vec<i8> = vec![1; n];
        let mut conflict = vec![false; n];

        fn find(parent: &mut [usize], parity: &mut [i8], c: usize) -> (usize, i8) {
            let mut path = Vec::new();
            let mut cur = c;
            while parent[cur] != cur {
                path.push(cur);
                cur = parent[cur];
            }
            let root = cur;
            // Compress, accumulating parities from the top down.
            for &node in path.iter().rev() {
                let p = parent[node];
                if p != root {
                    parity[node] *= parity[p];
                }
                parent[node] = root;
            }
            (root, parity[c])
        }

        for (r, col) in &g.generators {
            for x in 0..g.m1 {
                let (gx, sx) = r.apply(x);
                for y in 0..g.m2 {
                    let (gy, sy) = col.apply(y);
                    let a = x * g.m2 + y;
                    let b = gx * g.m2 + gy;
                    let s = sx * sy;
                    let (ra, pa) = find(&mut parent, &mut parity, a);
                    let (rb, pb) = find(&mut parent, &mut parity, b);
                    // value[b] = s·value[a]
                    if ra == rb {
                        if pb != s * pa {
                            conflict[ra] = true;
                        }
                    } else {
                        parent[rb] = ra;
                        parity[rb] = s * pa * pb;
                        if conflict[rb] {
                            conflict[ra] = true;
                        }
                    }
                }
            }
        }

        let mut orbit = vec![None; n];
        let mut sign = vec![0i8; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut root_index = vec![usize::MAX; n];
        let mut forced_zero = 0;
        for c in 0..n {
            let (root, p) = find(&mut parent, &mut parity, c);
            if conflict[root] {
                forced_zero += 1;
                continue;
            }
            if root_index[root] == usize::MAX {
                root_index[root] = members.len();
                members.push(Vec::new());
            }
            let k = root_index[root];
            orbit[c] = Some(k);
            sign[c] = p;
            members[k].push(c);
        }
        // Orient each orbit so that its first cell has sign +1.
        for cells in &members {
            let s0 = sign[cells[0]];
            if s0 < 0 {
                for &c in cells {
                    sign[c] = -sign[c];
                }
            }
        }
        Self {
            m1: g.m1,
            m2: g.m2,
            orbit,
            sign,
            members,
            forced_zero,
        }
    }

    pub fn trivial(m1: usize, m2: usize) -> Self {
        SignedPermutationGroup::trivial(m1, m2).invariant_basis()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    /// Number of free orbits.
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn forced_zero_cells(&self) -> usize {
        self.forced_zero
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn members(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    pub fn cell(&self, x: usize, y: usize) -> (Option<usize>, i8) {
        let c = x * self.m2 + y;
        (self.orbit[c], self.sign[c])
    }

    /// Orbit-averaged coordinates `z_k = |O_k|⁻¹ Σ_{c∈O_k} sign_c M_c`.
    pub fn reduce(&self, m: &DMatrix<f64>) -> Vec<f64> {
        self.members
            .iter()
            .map(|cells| {
                let s: f64 = cells
                    .iter()
                    .map(|&c| self.sign[c] as f64 * self.at(m, c))
                    .sum();
                s / cells.len() as f64
            })
            .collect()
    }

    /// Orbit sums `Σ_{c∈O_k} sign_c·a_x·b_y` of a sign vertex; these are the
    /// exact coordinates of the vertex against orbit indicator matrices.
    pub fn vertex_sums(&self, a: &[i8], b: &[i8]) -> Vec<i64> {
        self.members
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|&c| (self.sign[c] * a[c / self.m2] * b[c % self.m2]) as i64)
                    .sum()
            })
            .collect()
    }

    fn at(&self, m: &DMatrix<f64>, c: usize) -> f64 {
        m[(c / self.m2, c % self.m2)]
    }

    /// Invariant matrix with orbit values `z`.
    pub fn expand(&self, z: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m1, self.m2);
        for (k, cells) in self.members.iter().enumerate() {
            for &c in cells {
                out[(c / self.m2, c % self.m2)] = self.sign[c] as f64 * z[k];
            }
        }
        out
    }

    /// Invariant integer matrix with orbit values `z`.
    pub fn expand_exact(&self, z: &[ExactScalar]) -> ExactMatrix {
        let mut out = ExactMatrix::zeros(self.m1, self.m2);
        for (k, cells) in self.members.iter().enumerate() {
            for &c in cells {
                let v = if self.sign[c] > 0 {
                    z[k].clone()
                } else {
                    -&z[k]
                };
                out.set(c / self.m2, c % self.m2, v);
            }
        }
        out
    }

    /// Group average of a float matrix, computed orbit by orbit.
    pub fn symmetrize(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.expand(&self.reduce(m))
    }

    /// Exact group average.
    pub fn symmetrize_exact(&self, m: &ExactMatrix) -> ExactMatrix {
        let z: Vec<ExactScalar> = self
            .members
            .iter()
            .map(|cells| {
                let mut acc = ExactScalar::zero();
                for &c in cells {
                    let v = m.get(c / self.m2, c % self.m2);
                    if self.sign[c] > 0 {
                        acc += v;
                    } else {
                        acc -= v;
                    }
                }
                acc.scale(&BigRational::new(1.into(), (cells.len() as i64).into()))
            })
            .collect();
        self.expand_exact(&z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hexagon_rotation() -> SignedPermutationGroup {
        let g = SignedPerm::from_signed_one_based(&[2, 3, -1]).unwrap();
        SignedPermutationGroup::new(3, 3, vec![(g.clone(), g)]).unwrap()
    }

    #[test]
    fn identity_closure() {
        let id = SignedPerm::identity(3);
        let g = SignedPermutationGroup::new(3, 3, vec![(id.clone(), id)]).unwrap();
        assert_eq!(g.order(10).unwrap(), 1);
    }

    #[test]
    fn twisted_rotation_has_order_six() {
        assert_eq!(hexagon_rotation().order(100).unwrap(), 6);
    }

    #[test]
    fn closure_cap_is_resource_error() {
        assert!(matches!(
            hexagon_rotation().order(3),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn full_symmetric_group_has_two_orbits() {
        let swap = SignedPerm::from_signed_one_based(&[2, 1, 3, 4]).unwrap();
        let cycle = SignedPerm::from_signed_one_based(&[2, 3, 4, 1]).unwrap();
        let g =
            SignedPermutationGroup::new(4, 4, vec![(swap.clone(), swap), (cycle.clone(), cycle)])
                .unwrap();
        let basis = g.invariant_basis();
        assert_eq!(basis.dim(), 2);
        assert_eq!(basis.forced_zero_cells(), 0);
    }

    #[test]
    fn trivial_group_has_singletons() {
        let basis = InvariantBasis::trivial(2, 3);
        assert_eq!(basis.dim(), 6);
    }

    #[test]
    fn one_based_round_trip() {
        let g = SignedPerm::from_signed_one_based(&[3, -1, 2]).unwrap();
        assert_eq!(g.to_signed_one_based(), vec![3, -1, 2]);
        assert!(SignedPerm::from_signed_one_based(&[1, 1]).is_err());
        assert!(SignedPerm::from_signed_one_based(&[0, 1]).is_err());
    }
}
