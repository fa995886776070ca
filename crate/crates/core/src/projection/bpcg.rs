//! Blended pairwise conditional gradients for `min ½‖X − T‖²` over the
//! (symmetrised) correlation body, in orbit coordinates.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;
use crate::polytope::{InvariantBasis, SignStrategy, Strategy};
use crate::solver;

/// Orbit coordinates with the inner product `⟨x, y⟩ = Σ_k |O_k| x_k y_k`,
/// which is the Frobenius product of the expanded invariant matrices.
#[derive(Clone, Debug)]
pub struct ReducedSpace {
    pub basis: InvariantBasis,
    weights: Vec<f64>,
}

impl ReducedSpace {
    pub fn new(basis: InvariantBasis) -> Self {
        let weights = basis.orbit_sizes().iter().map(|&s| s as f64).collect();
        Self { basis, weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x)
            .zip(y)
            .map(|((w, a), b)| w * a * b)
            .sum()
    }

    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        self.inner(x, x)
    }

    pub fn reduce(&self, m: &DMatrix<f64>) -> Vec<f64> {
        self.basis.reduce(m)
    }

    pub fn expand(&self, z: &[f64]) -> DMatrix<f64> {
        self.basis.expand(z)
    }

    /// Coordinates of a strategy's symmetrised matrix, together with the
    /// exact orbit sums for sign strategies.
    pub fn embed(&self, s: &Strategy) -> (Vec<f64>, Option<Vec<i64>>) {
        match s {
            Strategy::Sign(v) => {
                let sums = self.basis.vertex_sums(&v.a, &v.b);
                let u = sums
                    .iter()
                    .zip(&self.weights)
                    .map(|(&r, &w)| r as f64 / w)
                    .collect();
                (u, Some(sums))
            }
            Strategy::Unit(_) => (self.reduce(&s.matrix_f64()), None),
        }
    }
}

/// One atom of the active set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub strategy: Strategy,
    pub weight: f64,
    /// Orbit coordinates of the symmetrised atom.
    pub coords: Vec<f64>,
    /// Exact orbit sums for sign vertices.
    pub sums: Option<Vec<i64>>,
}

/// Convex combination maintained by the projection.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ActiveSet {
    pub atoms: Vec<Atom>,
    /// Cached `Σ w_i u_i`.
    pub iterate: Vec<f64>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    fn recompute(&mut self, dim: usize) {
        let mut x = vec![0.0; dim];
        for a in &self.atoms {
            for (xi, ui) in x.iter_mut().zip(&a.coords) {
                *xi += a.weight * ui;
            }
        }
        self.iterate = x;
    }

    fn renormalize(&mut self, dim: usize) {
        let s = self.weight_sum();
        if s > 0.0 {
            self.atoms.iter_mut().for_each(|a| a.weight /= s);
        }
        self.recompute(dim);
    }

    fn prune(&mut self, dim: usize) {
        let before = self.atoms.len();
        self.atoms.retain(|a| a.weight >= PRUNE_WEIGHT);
        if self.atoms.len() != before {
            self.renormalize(dim);
        }
    }

    /// Largest deviation of `iterate` from the weighted atom sum.
    pub fn consistency_error(&self) -> f64 {
        let dim = self.iterate.len();
        let mut x = vec![0.0; dim];
        for a in &self.atoms {
            for (xi, ui) in x.iter_mut().zip(&a.coords) {
                *xi += a.weight * ui;
            }
        }
        x.iter()
            .zip(&self.iterate)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

/// Atoms whose weight falls below this are dropped.
pub const PRUNE_WEIGHT: f64 = 1e-12;

/// How the linear minimisation oracle is evaluated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LmoConfig {
    pub n: usize,
    pub restarts: usize,
    pub seed: u64,
    /// For `n = 1`, solve the oracle problem exactly (in floating point)
    /// when the smaller matrix side is at most this.
    pub exact_cap: usize,
}

impl Default for LmoConfig {
    fn default() -> Self {
        Self {
            n: 1,
            restarts: oracle::DEFAULT_LMO_RESTARTS,
            seed: 0,
            exact_cap: 24,
        }
    }
}

impl LmoConfig {
    /// Whether oracle answers are exact optima (up to float rounding).
    pub fn is_exact(&self, shape: (usize, usize)) -> bool {
        self.n == 1 && shape.0.min(shape.1) <= self.exact_cap
    }

    /// Strategy maximising `⟨M, V⟩` and its value.
    pub fn maximize(&self, m: &DMatrix<f64>, call: u64) -> Result<(Strategy, f64)> {
        if self.is_exact(m.shape()) {
            let (v, s, _) = solver::sdp1_float(m, None)?;
            return Ok((Strategy::Sign(s), v));
        }
        let seed = self
            .seed
            .wrapping_add(call.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let r = oracle::heuristic_sdp(m, self.n, self.restarts.max(1), seed)?;
        Ok((r.strategy, r.value))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BpcgOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub lmo: LmoConfig,
}

impl Default for BpcgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 20_000,
            lmo: LmoConfig::default(),
        }
    }
}

/// Output of one projection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Projection {
    pub active: ActiveSet,
    /// Last Frank-Wolfe gap `⟨X − T, X − V_lmo⟩`.
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub lmo_calls: usize,
    /// Objective `½‖X − T‖²` after every iteration.
    pub objective: Vec<f64>,
    /// Every distinct sign vertex returned by the oracle, keyed by orbit sums.
    #[serde(skip)]
    pub seen: Vec<Atom>,
}

impl Projection {
    pub fn distance(&self, space: &ReducedSpace, target: &[f64]) -> f64 {
        let d: Vec<f64> = self
            .active
            .iterate
            .iter()
            .zip(target)
            .map(|(x, t)| x - t)
            .collect();
        space.norm_sq(&d).sqrt()
    }
}

struct Oracle<'a> {
    space: &'a ReducedSpace,
    cfg: &'a LmoConfig,
    calls: u64,
    seen: HashMap<Vec<i64>, Atom>,
}

impl Oracle<'_> {
    /// Vertex minimising `⟨g, V⟩`.
    fn call(&mut self, g: &[f64]) -> Result<Atom> {
        let m = -self.space.expand(g);
        let (s, _) = self.cfg.maximize(&m, self.calls)?;
        self.calls += 1;
        let s = match s {
            Strategy::Sign(v) => Strategy::Sign(v.normalized()),
            other => other,
        };
        let (coords, sums) = self.space.embed(&s);
        let atom = Atom {
            strategy: s,
            weight: 0.0,
            coords,
            sums,
        };
        if let Some(k) = &atom.sums {
            self.seen.entry(k.clone()).or_insert_with(|| atom.clone());
        }
        Ok(atom)
    }
}

fn same_atom(a: &Atom, b: &Atom) -> bool {
    match (&a.sums, &b.sums) {
        (Some(x), Some(y)) => x == y,
        _ => a.coords == b.coords,
    }
}

/// Projects `target` (orbit coordinates) onto the symmetrised body.
///
/// `warm` seeds the active set; it is re-weighted to a convex combination.
pub fn bpcg_project(
    space: &ReducedSpace,
    target: &[f64],
    opts: &BpcgOptions,
    warm: Option<&ActiveSet>,
) -> Result<Projection> {
    let k = space.dim();
    if target.len() != k {
        return Err(Error::domain("target has the wrong number of coordinates"));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("target has non-finite entries"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let mut oracle = Oracle {
        space,
        cfg: &opts.lmo,
        calls: 0,
        seen: HashMap::new(),
    };
    let mut active = match warm {
        Some(w) if !w.is_empty() => {
            let mut w = w.clone();
            w.renormalize(k);
            w
        }
        _ => {
            let g: Vec<f64> = target.iter().map(|t| -t).collect();
            let mut first = oracle.call(&g)?;
            first.weight = 1.0;
            let mut s = ActiveSet {
                atoms: vec![first],
                iterate: Vec::new(),
            };
            s.recompute(k);
            s
        }
    };
    let scale = 1.0 + space.norm_sq(target);
    let tol = opts.tol * scale;
    let objective_of = |x: &[f64]| {
        let d: Vec<f64> = x.iter().zip(target).map(|(a, b)| a - b).collect();
        0.5 * space.norm_sq(&d)
    };
    let mut objective = vec![objective_of(&active.iterate)];
    let mut gap = f64::INFINITY;
    let mut phi = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let x = active.iterate.clone();
        let g: Vec<f64> = x.iter().zip(target).map(|(a, b)| a - b).collect();
        let scores: Vec<f64> = active
            .atoms
            .iter()
            .map(|a| space.inner(&g, &a.coords))
            .collect();
        let (ia, is) = argmax_argmin(&scores);
        let local = scores[ia] - scores[is];

        let mut fw_atom = None;
        if local < phi {
            let w = oracle.call(&g)?;
            let gx = space.inner(&g, &x);
            gap = gx - space.inner(&g, &w.coords);
            if gap <= tol {
                converged = true;
                objective.push(objective_of(&x));
                break;
            }
            phi = gap / 2.0;
            if local < gap {
                fw_atom = Some(w);
            }
        }

        match fw_atom {
            None => {
                // Pairwise step from the away atom to the local FW atom.
                let d: Vec<f64> = active.atoms[ia]
                    .coords
                    .iter()
                    .zip(&active.atoms[is].coords)
                    .map(|(a, s)| a - s)
                    .collect();
                let dd = space.norm_sq(&d);
                let gd = space.inner(&g, &d);
                if dd <= 0.0 || gd <= 0.0 {
                    // Nothing to gain locally; force an oracle call.
                    phi = f64::INFINITY;
                    if ia == is {
                        objective.push(objective_of(&x));
                        continue;
                    }
                    objective.push(objective_of(&x));
                    continue;
                }
                let gmax = active.atoms[ia].weight;
                let gamma = (gd / dd).min(gmax);
                active.atoms[is].weight += gamma;
                if gamma >= gmax {
                    active.atoms.swap_remove(ia);
                } else {
                    active.atoms[ia].weight -= gamma;
                }
                for (xi, di) in active.iterate.iter_mut().zip(&d) {
                    *xi -= gamma * di;
                }
            }
            Some(mut w) => {
                let d: Vec<f64> = x.iter().zip(&w.coords).map(|(a, b)| a - b).collect();
                let dd = space.norm_sq(&d);
                let gd = space.inner(&g, &d);
                let gamma = if dd > 0.0 {
                    (gd / dd).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                for a in active.atoms.iter_mut() {
                    a.weight *= 1.0 - gamma;
                }
                if let Some(existing) = active.atoms.iter_mut().find(|a| same_atom(a, &w)) {
                    existing.weight += gamma;
                } else {
                    w.weight = gamma;
                    active.atoms.push(w);
                }
                for (xi, di) in active.iterate.iter_mut().zip(&d) {
                    *xi -= gamma * di;
                }
            }
        }
        active.prune(k);
        if iterations % 64 == 0 {
            active.renormalize(k);
        }
        objective.push(objective_of(&active.iterate));
    }
    active.renormalize(k);
    let mut seen: Vec<Atom> = oracle.seen.into_values().collect();
    seen.sort_by(|a, b| a.sums.cmp(&b.sums));
    Ok(Projection {
        active,
        gap,
        converged,
        iterations,
        lmo_calls: oracle.calls as usize,
        objective,
        seen,
    })
}

fn argmax_argmin(v: &[f64]) -> (usize, usize) {
    let mut hi = 0;
    let mut lo = 0;
    for i in 1..v.len() {
        if v[i] > v[hi] {
            hi = i;
        }
        if v[i] < v[lo] {
            lo = i;
        }
    }
    (hi, lo)
}

/// Sign vertex as a matrix atom, used by callers that build active sets.
pub fn sign_atom(space: &ReducedSpace, s: SignStrategy, weight: f64) -> Atom {
    let s = Strategy::Sign(s.normalized());
    let (coords, sums) = space.embed(&s);
    Atom {
        strategy: s,
        weight,
        coords,
        sums,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(m1: usize, m2: usize) -> ReducedSpace {
        ReducedSpace::new(InvariantBasis::trivial(m1, m2))
    }

    #[test]
    fn vertex_target_is_reached_at_once() {
        let sp = full(2, 2);
        let t = vec![1.0, -1.0, 1.0, -1.0];
        let p = bpcg_project(&sp, &t, &BpcgOptions::default(), None).unwrap();
        assert!(p.converged);
        assert!(p.distance(&sp, &t) < 1e-12);
        assert!(p.gap.abs() < 1e-12);
    }

    #[test]
    fn zero_target() {
        let sp = full(2, 3);
        let t = vec![0.0; 6];
        let p = bpcg_project(&sp, &t, &BpcgOptions::default(), None).unwrap();
        assert!(p.converged);
        assert!(p.distance(&sp, &t) < 1e-3);
    }

    #[test]
    fn objective_never_increases() {
        let sp = full(3, 3);
        let t = vec![1.0, 0.5, -0.5, 0.5, 1.0, 0.5, -0.5, 0.5, 1.0];
        let p = bpcg_project(&sp, &t, &BpcgOptions::default(), None).unwrap();
        for w in p.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        assert!(p.distance(&sp, &t) > 1e-3);
        assert!(p.active.consistency_error() < 1e-9);
    }
}
