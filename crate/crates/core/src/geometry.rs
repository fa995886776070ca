//! Convex hulls of small point sets containing the origin in their interior.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

const PLANE_EPS: f64 = 1e-9;

/// A facet `{x : ⟨normal, x⟩ = offset}` with unit outward normal and the
/// indices of the points lying on it.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Unit normal of the hyperplane through `d` points in `R^d`, oriented away
/// from the origin, with its offset; `None` when the points are affinely
/// dependent or the plane passes through the origin.
fn plane_through(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let d = points.len();
    let base = points[0];
    let mut normal =
        match d {
            2 => vec![-(points[1][1] - base[1]), points[1][0] - base[0]],
            3 => cross(sub3(points[1], base), sub3(points[2], base)).to_vec(),
            _ => {
                let full = DMatrix::from_fn(d, d, |i, k| {
                    if i + 1 < d {
                        points[i + 1][k] - base[k]
                    } else {
                        0.0
                    }
                });
                let svd = full.svd(false, true);
                let vt = svd.v_t?;
                let (jmin, _) = svd.singular_values.iter().enumerate().fold(
                    (0, f64::INFINITY),
                    |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
                );
                (0..d).map(|k| vt[(jmin, k)]).collect()
            }
        };
    let n = dot(&normal, &normal).sqrt();
    if n < 1e-12 {
        return None;
    }
    for v in normal.iter_mut() {
        *v /= n;
    }
    if d > 3 {
        // Reject nearly dependent point sets: the normal must be orthogonal to
        // every spanning difference.
        for p in &points[1..] {
            let diff: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
            if dot(&diff, &normal).abs() > 1e-9 * dot(&diff, &diff).sqrt().max(1.0) {
                return None;
            }
        }
    }
    let mut offset = dot(&normal, base);
    if offset.abs() < 1e-12 {
        return None;
    }
    if offset < 0.0 {
        for v in normal.iter_mut() {
            *v = -*v;
        }
        offset = -offset;
    }
    Some((normal, offset))
}

fn supports(points: &[Vec<f64>], normal: &[f64], offset: f64) -> bool {
    points.iter().all(|p| dot(normal, p) <= offset + PLANE_EPS)
}

fn merge_planes(mut planes: Vec<(Vec<f64>, f64)>, points: &[Vec<f64>]) -> Vec<Facet> {
    planes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Facet> = Vec::new();
    for (normal, offset) in planes {
        let dup = out.iter().any(|f| {
            (f.offset - offset).abs() < 1e-8
                && f.normal
                    .iter()
                    .zip(&normal)
                    .all(|(a, b)| (a - b).abs() < 1e-8)
        });
        if dup {
            continue;
        }
        let vertices = (0..points.len())
            .filter(|&i| (dot(&normal, &points[i]) - offset).abs() <= PLANE_EPS)
            .collect();
        out.push(Facet {
            normal,
            offset,
            vertices,
        });
    }
    out
}

/// Convex hull of a 3D point set, facets with vertices in cyclic order.
#[derive(Clone, Debug)]
pub struct Hull3 {
    pub facets: Vec<Facet>,
}

impl Hull3 {
    /// Fan triangulation of every facet polygon.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for f in &self.facets {
            for k in 1..f.vertices.len() - 1 {
                out.push([f.vertices[0], f.vertices[k], f.vertices[k + 1]]);
            }
        }
        out
    }
}

fn order_polygon(f: &mut Facet, points: &[Vec<f64>]) {
    let n = [f.normal[0], f.normal[1], f.normal[2]];
    let c: Vec<f64> = (0..3)
        .map(|k| f.vertices.iter().map(|&i| points[i][k]).sum::<f64>() / f.vertices.len() as f64)
        .collect();
    let e1 = {
        let v = sub3(&points[f.vertices[0]], &c);
        let l = dot(&v, &v).sqrt();
        [v[0] / l, v[1] / l, v[2] / l]
    };
    let e2 = cross(n, e1);
    let mut keyed: Vec<(f64, usize)> = f
        .vertices
        .iter()
        .map(|&i| {
            let v = sub3(&points[i], &c);
            (dot(&v, &e2).atan2(dot(&v, &e1)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    f.vertices = keyed.into_iter().map(|(_, i)| i).collect();
}

/// Checks that the facets close up into the boundary of a 3-polytope: each
/// polygon edge is shared by exactly two facets and Euler's formula holds.
fn is_closed_surface(facets: &[Facet]) -> bool {
    use std::collections::{BTreeMap, BTreeSet};
    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut verts = BTreeSet::new();
    for f in facets {
        let k = f.vertices.len();
        if k < 3 {
            return false;
        }
        for i in 0..k {
            let (a, b) = (f.vertices[i], f.vertices[(i + 1) % k]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            verts.insert(a);
        }
    }
    edges.values().all(|&c| c == 2) && verts.len() + facets.len() == edges.len() + 2
}

/// Convex hull in `R^3` by enumerating candidate triangles among nearest
/// neighbours, verified to close up into a polytope boundary; the
/// neighbourhood grows until it does.
pub fn hull_3d(points: &[Vec<f64>]) -> Result<Hull3> {
    let n = points.len();
    if n < 4 || points.iter().any(|p| p.len() != 3) {
        return Err(Error::domain("3D hull needs at least four points in R^3"));
    }
    let mut k = 12.min(n - 1);
    loop {
        let neighbours: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                idx.sort_by(|&a, &b| {
                    let da = dot(&sub3(&points[a], &points[i]), &sub3(&points[a], &points[i]));
                    let db = dot(&sub3(&points[b], &points[i]), &sub3(&points[b], &points[i]));
                    da.partial_cmp(&db).unwrap()
                });
                idx.truncate(k);
                idx
            })
            .collect();
        let planes: Vec<(Vec<f64>, f64)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let nb = &neighbours[i];
                let mut found = Vec::new();
                for a in 0..nb.len() {
                    for b in a + 1..nb.len() {
                        let (j, l) = (nb[a], nb[b]);
                        // Each triangle is generated from its smallest vertex;
                        // triangles missed by a too-small neighbourhood make
                        // the closure check below fail and widen the search.
                        if j < i || l < i {
                            continue;
                        }
                        if let Some((nm, off)) =
                            plane_through(&[&points[i], &points[j], &points[l]])
                        {
                            if supports(points, &nm, off) {
                                found.push((nm, off));
                            }
                        }
                    }
                }
                found
            })
            .collect();
        let mut facets = merge_planes(planes, points);
        for f in facets.iter_mut() {
            order_polygon(f, points);
        }
        if is_closed_surface(&facets) {
            return Ok(Hull3 { facets });
        }
        if k >= n - 1 {
            return Err(Error::Degenerate(
                "point set is not full-dimensional around the origin".into(),
            ));
        }
        k = (2 * k).min(n - 1);
    }
}

/// All facets of the convex hull of `points` in `R^d`, `d ≤ 4`.
pub fn hull_facets(points: &[Vec<f64>], d: usize) -> Result<Vec<Facet>> {
    if !(2..=4).contains(&d) {
        return Err(Error::domain(format!(
            "facet enumeration supports 2 ≤ d ≤ 4, got {d}"
        )));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::domain("point of the wrong dimension"));
    }
    if d == 3 {
        return Ok(hull_3d(points)?.facets);
    }
    let n = points.len();
    let subsets = binomial(n, d);
    if subsets > 2e9 {
        return Err(Error::resource(format!(
            "{subsets:.0} candidate facets to enumerate"
        )));
    }
    let planes: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut found = Vec::new();
            let mut idx = vec![i];
            extend_subsets(points, d, &mut idx, i + 1, &mut found);
            found
        })
        .collect();
    let facets = merge_planes(planes, points);
    if facets.is_empty() {
        return Err(Error::Degenerate(
            "point set is not full-dimensional".into(),
        ));
    }
    Ok(facets)
}

fn extend_subsets(
    points: &[Vec<f64>],
    d: usize,
    idx: &mut Vec<usize>,
    start: usize,
    found: &mut Vec<(Vec<f64>, f64)>,
) {
    if idx.len() == d {
        let refs: Vec<&[f64]> = idx.iter().map(|&i| points[i].as_slice()).collect();
        if let Some((nm, off)) = plane_through(&refs) {
            if supports(points, &nm, off) {
                found.push((nm, off));
            }
        }
        return;
    }
    for j in start..points.len() {
        idx.push(j);
        extend_subsets(points, d, idx, j + 1, found);
        idx.pop();
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross_polytope(d: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[i] = s;
                pts.push(v);
            }
        }
        pts
    }

    #[test]
    fn cross_polytope_facets() {
        for d in 2..=4 {
            let f = hull_facets(&cross_polytope(d), d).unwrap();
            assert_eq!(f.len(), 1 << d);
            for facet in f {
                assert!((facet.offset - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cube_has_square_facets() {
        let mut pts = Vec::new();
        for m in 0..8 {
            pts.push(
                (0..3)
                    .map(|k| if m >> k & 1 == 1 { 1.0 } else { -1.0 })
                    .collect(),
            );
        }
        let h = hull_3d(&pts).unwrap();
        assert_eq!(h.facets.len(), 6);
        assert_eq!(h.triangles().len(), 12);
    }

    #[test]
    fn flat_set_is_degenerate() {
        let pts = vec![
            vec![1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, -1.0, 0.0],
        ];
        assert!(hull_3d(&pts).is_err());
    }
}
