//! Iterative facet search: project `vP`, read off the separating normal,
//! shrink `v`, and stop once the normal is an exactly certified facet.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::bpcg::{bpcg_project, ActiveSet, Atom, BpcgOptions, LmoConfig, ReducedSpace};
use super::linalg::{affine_rank, integer_null_vector, integerize_normal};
use crate::config::CorrelationPoint;
use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::matrix::{ExactMatrix, IntMatrix};
use crate::polytope::{InvariantBasis, SignStrategy, Strategy};
use crate::solver::{self, SolveOptions};

/// `v` such that `⟨M, vP⟩ = sdp`, i.e. the point on the ray through `P` that
/// lies on the hyperplane `{X : ⟨M, X⟩ = SDP[M]}`.
pub fn v_update(inner_mp: f64, sdp: f64) -> Result<f64> {
    if !(sdp > 0.0) {
        return Err(Error::Degenerate(
            "SDP value of the normal is not positive".into(),
        ));
    }
    if !(inner_mp > 0.0) {
        return Err(Error::Degenerate("normal does not point towards P".into()));
    }
    Ok(sdp / inner_mp)
}

/// Separation ratio `⟨M, P⟩ / SDP[M]`, the reciprocal of [`v_update`].
pub fn separation_ratio(inner_mp: f64, sdp: f64) -> Result<f64> {
    if !(sdp > 0.0) {
        return Err(Error::Degenerate(
            "SDP value of the normal is not positive".into(),
        ));
    }
    Ok(inner_mp / sdp)
}

/// Writes `A = c(P − λI)` with `c > 0` if possible and returns `λ`.
pub fn recover_lambda(a: &ExactMatrix, p: &ExactMatrix) -> Option<ExactScalar> {
    if !a.is_square() || a.shape() != p.shape() {
        return None;
    }
    let m = a.rows();
    let mut c: Option<ExactScalar> = None;
    for x in 0..m {
        for y in 0..m {
            if x == y {
                continue;
            }
            let (av, pv) = (a.get(x, y), p.get(x, y));
            if pv.is_zero() {
                if !av.is_zero() {
                    return None;
                }
                continue;
            }
            let q = av.checked_div(pv)?;
            match &c {
                None => c = Some(q),
                Some(c0) if *c0 == q => {}
                Some(_) => return None,
            }
        }
    }
    let c = c?;
    if c.signum() <= 0 {
        return None;
    }
    let mut lambda: Option<ExactScalar> = None;
    for x in 0..m {
        let l = p.get(x, x) - &a.get(x, x).checked_div(&c)?;
        match &lambda {
            None => lambda = Some(l),
            Some(l0) if *l0 == l => {}
            Some(_) => return None,
        }
    }
    lambda
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FacetStatus {
    /// Exact valid inequality whose face has codimension one.
    Facet,
    /// Exact valid inequality, codimension not confirmed.
    Face,
    /// Offset from the heuristic oracle; not a certified inequality.
    Heuristic,
    /// `P` already lies in the body.
    Inside,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FacetOptions {
    pub n: usize,
    /// Projection tolerance of the first round; divided by 10 each round.
    pub tol: f64,
    pub tol_floor: f64,
    pub max_rounds: usize,
    /// Rounds without progress before giving up.
    pub stagnation_rounds: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub denominator_cap: u64,
    /// Relative slack for "vertex touches the separating hyperplane".
    pub touch_tol: f64,
    /// Largest smaller side for which offsets are solved exactly.
    pub exact_cap: usize,
    /// Largest number of face vertices enumerated for the rank check.
    pub face_cap: usize,
}

impl Default for FacetOptions {
    fn default() -> Self {
        Self {
            n: 1,
            tol: 1e-4,
            tol_floor: 1e-9,
            max_rounds: 60,
            stagnation_rounds: 4,
            max_iter: 20_000,
            restarts: 200,
            seed: 0,
            denominator_cap: 1000,
            touch_tol: 1e-6,
            exact_cap: solver::DEFAULT_BRANCH_CAP,
            face_cap: 1 << 20,
        }
    }
}

impl FacetOptions {
    fn lmo(&self) -> LmoConfig {
        LmoConfig {
            n: self.n,
            restarts: self.restarts,
            seed: self.seed,
            ..LmoConfig::default()
        }
    }

    fn round_tol(&self, r: usize) -> f64 {
        (self.tol * 0.1f64.powi(r as i32)).max(self.tol_floor)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FacetResult {
    pub status: FacetStatus,
    /// Integer normal `A`.
    pub normal: IntMatrix,
    /// Orbit values of `A`.
    pub orbit_values: Vec<i64>,
    /// `SDP_n[A]`; exact when `offset_certified`.
    pub offset: i64,
    pub offset_f64: f64,
    pub offset_certified: bool,
    /// `⟨A, P⟩`.
    pub inner: f64,
    #[serde(skip)]
    pub inner_exact: Option<ExactScalar>,
    /// `⟨A, P⟩ / SDP_n[A]`.
    pub ratio: f64,
    #[serde(skip)]
    pub ratio_exact: Option<ExactScalar>,
    #[serde(skip)]
    pub lambda: Option<ExactScalar>,
    /// Dimension of the symmetrised ambient space.
    pub dim: usize,
    /// Affine rank of the face spanned by the known tight vertices.
    pub face_rank: Option<usize>,
    /// `dim − face_rank`; 1 for a facet.
    pub codim: Option<usize>,
    /// Orbit sums of the tight vertices.
    pub face: Vec<Vec<i64>>,
    pub face_enumerated: bool,
    /// Tight atoms of the final projection.
    pub active: ActiveSet,
    /// `v` after every round that made progress.
    pub history: Vec<f64>,
    /// Projection tolerance used in every round.
    pub tolerances: Vec<f64>,
    pub rounds: usize,
    /// Objective traces of every projection, in order.
    #[serde(skip)]
    pub objectives: Vec<Vec<f64>>,
    pub gaps: Vec<f64>,
}

impl FacetResult {
    pub fn is_facet(&self) -> bool {
        self.status == FacetStatus::Facet
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    alpha: Vec<i64>,
    normal: IntMatrix,
    offset: i64,
    certified: bool,
    face: Vec<Vec<i64>>,
    enumerated: bool,
    inner: f64,
    v: f64,
}

struct Ctx<'a> {
    space: &'a ReducedSpace,
    p: &'a CorrelationPoint,
    p_red: Vec<f64>,
    opts: &'a FacetOptions,
}

impl Ctx<'_> {
    fn basis(&self) -> &InvariantBasis {
        &self.space.basis
    }

    fn normal_matrix(&self, alpha: &[i64]) -> Result<IntMatrix> {
        let (m1, m2) = self.basis().shape();
        let mut data = vec![0i64; m1 * m2];
        for x in 0..m1 {
            for y in 0..m2 {
                if let (Some(k), s) = self.basis().cell(x, y) {
                    data[x * m2 + y] = s as i64 * alpha[k];
                }
            }
        }
        IntMatrix::new(m1, m2, data)
    }

    fn orbit_inner(&self, alpha: &[i64], r: &[i64]) -> i128 {
        alpha
            .iter()
            .zip(r)
            .map(|(&a, &b)| a as i128 * b as i128)
            .sum()
    }

    /// Exact offset and tight vertices of the inequality with orbit values
    /// `alpha`. `touching` supplies tight vertices when the face cannot be
    /// enumerated.
    fn certify(&self, alpha: Vec<i64>, touching: &[Vec<i64>]) -> Result<Option<Candidate>> {
        if alpha.iter().all(|&a| a == 0) {
            return Ok(None);
        }
        let normal = self.normal_matrix(&alpha)?;
        let (m1, m2) = normal.shape();
        let side = m1.min(m2);
        let sizes = self.basis().orbit_sizes();
        let inner: f64 = alpha
            .iter()
            .zip(&self.p_red)
            .zip(&sizes)
            .map(|((&a, &p), &s)| a as f64 * p * s as f64)
            .sum();
        let (offset, certified, face, enumerated) =
            if self.opts.n == 1 && side <= self.opts.exact_cap {
                let transposed = m2 < m1;
                let work = if transposed {
                    normal.transpose()
                } else {
                    normal.clone()
                };
                match solver::face_vertices(&work, self.opts.face_cap) {
                    Ok((value, verts)) => {
                        let mut keys = BTreeSet::new();
                        for s in verts {
                            let s = if transposed { s.transpose() } else { s };
                            keys.insert(self.basis().vertex_sums(&s.a, &s.b));
                        }
                        (value, true, keys.into_iter().collect(), true)
                    }
                    Err(Error::Resource(_)) => {
                        let r = solver::sdp1_rectangular(
                            &crate::matrix::MatrixInput::Integer(normal.clone()),
                            &SolveOptions {
                                warm_restarts: 16,
                                ..SolveOptions::default()
                            },
                        )?;
                        let value = r
                            .value
                            .as_rational()
                            .and_then(|q| q.to_integer().to_i64())
                            .unwrap_or(0);
                        let tight = touching
                            .iter()
                            .filter(|t| self.orbit_inner(&alpha, t) == value as i128)
                            .cloned()
                            .collect();
                        (value, r.is_optimal(), tight, false)
                    }
                    Err(e) => return Err(e),
                }
            } else {
                let (_, v) = self.opts.lmo().maximize(&normal.to_f64(), 0)?;
                let tight = touching
                    .iter()
                    .filter(|t| {
                        (self.orbit_inner(&alpha, t) as f64 - v).abs() <= 1e-9 * (1.0 + v.abs())
                    })
                    .cloned()
                    .collect();
                (v.round() as i64, false, tight, false)
            };
        if offset <= 0 || inner <= 0.0 {
            return Ok(None);
        }
        Ok(Some(Candidate {
            v: offset as f64 / inner,
            alpha,
            normal,
            offset,
            certified,
            face,
            enumerated,
            inner,
        }))
    }

    fn candidate_alpha(&self, m: &[f64], touching: &[Vec<i64>]) -> Result<Option<Vec<i64>>> {
        let k = self.space.dim();
        let sizes = self.basis().orbit_sizes();
        let orient = |alpha: Vec<i64>| -> Vec<i64> {
            let dot: f64 = alpha
                .iter()
                .zip(m)
                .zip(&sizes)
                .map(|((&a, &x), &s)| a as f64 * x * s as f64)
                .sum();
            if dot < 0.0 {
                alpha.into_iter().map(|a| -a).collect()
            } else {
                alpha
            }
        };
        if touching.len() >= 2 && affine_rank(touching) + 1 == k {
            let diffs: Vec<Vec<i64>> = touching[1..]
                .iter()
                .map(|t| t.iter().zip(&touching[0]).map(|(a, b)| a - b).collect())
                .collect();
            if let Some(v) = integer_null_vector(&diffs, k) {
                if let Some(ints) = v.iter().map(BigInt::to_i64).collect::<Option<Vec<_>>>() {
                    return Ok(Some(orient(ints)));
                }
            }
        }
        let row = DMatrix::from_row_slice(1, k, m);
        match integerize_normal(&row, self.opts.denominator_cap, &[]) {
            Ok(a) => Ok(Some(orient(a.matrix))),
            Err(Error::Degenerate(_)) | Err(Error::RoundingFailed(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn finish(
        &self,
        c: Candidate,
        status: FacetStatus,
        last: Option<&ActiveSet>,
        trace: Trace,
    ) -> Result<FacetResult> {
        let k = self.space.dim();
        let face_rank = if c.face.is_empty() {
            None
        } else {
            Some(affine_rank(&c.face))
        };
        let codim = face_rank.map(|r| k - r);
        let status = match status {
            FacetStatus::Facet | FacetStatus::Face if !c.certified => FacetStatus::Heuristic,
            FacetStatus::Facet if codim != Some(1) => FacetStatus::Face,
            s => s,
        };
        let exact_normal = c.normal.to_exact();
        let inner_exact = match self.p.exact() {
            Some(pe) => Some(exact_normal.inner(pe)?),
            None => None,
        };
        let ratio_exact = inner_exact
            .as_ref()
            .and_then(|ip| ip.checked_div(&ExactScalar::from_int(c.offset)));
        let lambda = self
            .p
            .exact()
            .and_then(|pe| recover_lambda(&exact_normal, pe));
        let tight: BTreeSet<&Vec<i64>> = c.face.iter().collect();
        let mut active = ActiveSet::default();
        if let Some(last) = last {
            active.atoms = last
                .atoms
                .iter()
                .filter(|a| a.sums.as_ref().is_some_and(|s| tight.contains(s)))
                .cloned()
                .collect();
        }
        let s: f64 = active.atoms.iter().map(|a| a.weight).sum();
        if s > 0.0 {
            active.atoms.iter_mut().for_each(|a| a.weight /= s);
        }
        let mut x = vec![0.0; k];
        for a in &active.atoms {
            for (xi, ui) in x.iter_mut().zip(&a.coords) {
                *xi += a.weight * ui;
            }
        }
        active.iterate = x;
        Ok(FacetResult {
            status,
            orbit_values: c.alpha,
            offset: c.offset,
            offset_f64: c.offset as f64,
            offset_certified: c.certified,
            inner: c.inner,
            ratio: c.inner / c.offset as f64,
            ratio_exact,
            inner_exact,
            lambda,
            dim: k,
            face_rank,
            codim,
            face: c.face,
            face_enumerated: c.enumerated,
            normal: c.normal,
            active,
            history: trace.history,
            tolerances: trace.tolerances,
            rounds: trace.rounds,
            objectives: trace.objectives,
            gaps: trace.gaps,
        })
    }
}

#[derive(Default)]
struct Trace {
    history: Vec<f64>,
    tolerances: Vec<f64>,
    rounds: usize,
    objectives: Vec<Vec<f64>>,
    gaps: Vec<f64>,
}

/// Searches for the facet of the (symmetrised) rank-`n` body crossed by the
/// ray through `P`. `basis` fixes the symmetry; use
/// [`InvariantBasis::trivial`] for none.
pub fn facet_loop(
    p: &CorrelationPoint,
    basis: InvariantBasis,
    opts: &FacetOptions,
) -> Result<FacetResult> {
    if basis.shape() != (p.m1(), p.m2()) {
        return Err(Error::domain("group does not act on the shape of P"));
    }
    if opts.n == 0 {
        return Err(Error::domain("rank must be at least 1"));
    }
    let space = ReducedSpace::new(basis);
    let ctx = Ctx {
        p_red: space.reduce(p.float()),
        space: &space,
        p,
        opts,
    };
    let k = space.dim();
    let p_norm = space.norm_sq(&ctx.p_red).sqrt();
    if p_norm == 0.0 {
        return Err(Error::Degenerate("P has no invariant component".into()));
    }
    let lmo = opts.lmo();
    let mut trace = Trace {
        history: vec![1.0],
        ..Trace::default()
    };
    let mut v = 1.0f64;
    let mut pool: HashMap<Vec<i64>, Atom> = HashMap::new();
    let mut warm: Option<ActiveSet> = None;
    let mut best: Option<Candidate> = None;
    let mut last_m: Option<Vec<f64>> = None;
    let mut stagnant = 0;
    let mut pending_facet = false;

    for round in 0..opts.max_rounds {
        trace.rounds = round + 1;
        let tol = if pending_facet {
            opts.tol_floor
        } else {
            opts.round_tol(round)
        };
        trace.tolerances.push(tol);
        let target: Vec<f64> = ctx.p_red.iter().map(|x| v * x).collect();
        let bopts = BpcgOptions {
            tol,
            max_iter: opts.max_iter,
            lmo: LmoConfig {
                seed: opts.seed.wrapping_add(round as u64),
                ..lmo.clone()
            },
        };
        let proj = bpcg_project(&space, &target, &bopts, warm.as_ref())?;
        trace.objectives.push(proj.objective.clone());
        trace.gaps.push(proj.gap);
        for atom in proj.seen.iter().chain(&proj.active.atoms) {
            if let Some(key) = &atom.sums {
                pool.entry(key.clone()).or_insert_with(|| Atom {
                    weight: 0.0,
                    ..atom.clone()
                });
            }
        }
        let x = &proj.active.iterate;
        let m: Vec<f64> = target.iter().zip(x).map(|(t, x)| t - x).collect();
        let dist = space.norm_sq(&m).sqrt();
        let scale = 1.0 + v * p_norm;
        if round == 0
            && dist <= (2.0 * tol * (1.0 + v * v * p_norm * p_norm)).sqrt() + 1e-12 * scale
        {
            // Within the projection accuracy of the body.
            let sdp = lmo.maximize(&space.expand(&ctx.p_red), 0)?.1;
            let inner = space.norm_sq(&ctx.p_red);
            if inner <= sdp * (1.0 + 1e-9) {
                let alpha = match ctx.candidate_alpha(&ctx.p_red, &[])? {
                    Some(a) => a,
                    None => return Err(Error::Degenerate("cannot round P".into())),
                };
                let c = ctx
                    .certify(alpha, &[])?
                    .ok_or_else(|| Error::Degenerate("P is not separable".into()))?;
                return ctx.finish(c, FacetStatus::Inside, None, trace);
            }
        }

        if pending_facet {
            let c = best.clone().expect("pending facet has a candidate");
            let improved = if dist > 0.0 {
                let (_, sdp) = lmo.maximize(&space.expand(&m), u64::MAX - round as u64)?;
                v_update(space.inner(&m, &ctx.p_red), sdp).ok()
            } else {
                None
            };
            match improved {
                Some(vn) if vn < c.v * (1.0 - 1e-7) => {
                    pending_facet = false;
                    v = vn;
                    trace.history.push(v);
                    warm = Some(proj.active.clone());
                    continue;
                }
                _ => return ctx.finish(c, FacetStatus::Facet, Some(&proj.active), trace),
            }
        }

        let mut v_next = f64::INFINITY;
        if dist > 1e-14 * scale {
            last_m = Some(m.clone());
            let (_, sdp) = lmo.maximize(&space.expand(&m), round as u64)?;
            if let Ok(vn) = v_update(space.inner(&m, &ctx.p_red), sdp) {
                v_next = vn;
            }
        }

        if opts.n == 1 {
            let nhat: Vec<f64> = m.iter().map(|x| x / dist.max(f64::MIN_POSITIVE)).collect();
            let touching: Vec<Vec<i64>> = if dist > 1e-9 * scale {
                let vals: Vec<(f64, &Vec<i64>)> = pool
                    .values()
                    .map(|a| (space.inner(&nhat, &a.coords), a.sums.as_ref().unwrap()))
                    .collect();
                let top = vals.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
                let tau = opts.touch_tol * scale;
                let mut t: Vec<Vec<i64>> = vals
                    .into_iter()
                    .filter(|t| t.0 >= top - tau)
                    .map(|t| t.1.clone())
                    .collect();
                t.sort();
                t
            } else {
                let mut t: Vec<Vec<i64>> = proj
                    .active
                    .atoms
                    .iter()
                    .filter_map(|a| a.sums.clone())
                    .collect();
                t.sort();
                t
            };
            if let Some(alpha) = ctx.candidate_alpha(&m, &touching)? {
                if let Some(c) = ctx.certify(alpha, &touching)? {
                    let facet = c.certified && !c.face.is_empty() && affine_rank(&c.face) + 1 == k;
                    if c.certified && best.as_ref().is_none_or(|b| c.v < b.v) {
                        best = Some(c.clone());
                    }
                    if facet && c.v <= v_next.min(v) * (1.0 + 1e-12) {
                        if c.v < v {
                            v = c.v;
                            trace.history.push(v);
                        }
                        best = Some(c);
                        pending_facet = true;
                        warm = Some(proj.active.clone());
                        continue;
                    }
                }
            }
        }

        if v_next < v * (1.0 - 1e-12) {
            v = v_next;
            trace.history.push(v);
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= opts.stagnation_rounds {
                break;
            }
        }
        warm = Some(proj.active.clone());
    }

    if let Some(c) = best {
        let status = if affine_rank(&c.face) + 1 == k {
            FacetStatus::Facet
        } else {
            FacetStatus::Face
        };
        return ctx.finish(c, status, warm.as_ref(), trace);
    }
    let m = last_m.ok_or_else(|| Error::Degenerate("no separating direction found".into()))?;
    let alpha = ctx
        .candidate_alpha(&m, &[])?
        .ok_or_else(|| Error::RoundingFailed("normal could not be rounded".into()))?;
    let c = ctx
        .certify(alpha, &[])?
        .ok_or_else(|| Error::RoundingFailed("rounded normal does not separate P".into()))?;
    ctx.finish(c, FacetStatus::Face, warm.as_ref(), trace)
}

/// Full-matrix view of an active set: `Σ w_i V_i` with `V_i` the
/// symmetrised atoms.
pub fn active_matrix(space: &ReducedSpace, active: &ActiveSet) -> DMatrix<f64> {
    space.expand(&active.iterate)
}

/// Sign vertices of a facet result whose value on `A` equals the offset.
pub fn tight_strategies(result: &FacetResult) -> Vec<SignStrategy> {
    result
        .active
        .atoms
        .iter()
        .filter_map(|a| match &a.strategy {
            Strategy::Sign(s) => Some(s.clone()),
            Strategy::Unit(_) => None,
        })
        .collect()
}

/// Rank of a set of orbit-sum vectors after subtracting the first; exposed
/// for certificate checks.
pub fn face_rank(points: &[Vec<i64>]) -> usize {
    affine_rank(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{diagonal_modification, generate, gram};
    use crate::polytope::SignedPermutationGroup;

    #[test]
    fn v_and_ratio_are_reciprocal() {
        let v = v_update(5.0, 4.0).unwrap();
        let r = separation_ratio(5.0, 4.0).unwrap();
        assert!((v * r - 1.0).abs() < 1e-15);
        assert!(v_update(1.0, 0.0).is_err());
        assert!(v_update(-1.0, 1.0).is_err());
        assert!(separation_ratio(1.0, 0.0).is_err());
    }

    #[test]
    fn lambda_recovery() {
        let c = generate("hexagon").unwrap();
        let p = gram(&c, &c).unwrap();
        let p = p.exact().unwrap();
        let l = ExactScalar::from_ratio(2, 3);
        let a = diagonal_modification(p, &l)
            .unwrap()
            .scale(&ExactScalar::from_int(6));
        assert_eq!(recover_lambda(&a, p), Some(l));
        // A negative multiple is not of the form c(P − λI) with c > 0.
        let neg = a.scale(&ExactScalar::from_int(-1));
        assert_eq!(recover_lambda(&neg, p), None);
        let mut off = a.clone();
        off.set(0, 1, ExactScalar::from_int(17));
        assert_eq!(recover_lambda(&off, p), None);
    }

    #[test]
    fn face_rank_of_simplex() {
        let pts = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        assert_eq!(face_rank(&pts), 2);
        assert_eq!(face_rank(&pts[..2]), 1);
    }

    #[test]
    fn hexagon_loop() {
        let c = generate("hexagon").unwrap();
        let p = gram(&c, &c).unwrap();
        let basis = SignedPermutationGroup::from_configuration(&c, &c)
            .unwrap()
            .invariant_basis();
        let r = facet_loop(&p, basis, &FacetOptions::default()).unwrap();
        assert!(r.is_facet());
        assert_eq!(r.codim, Some(1));
        assert_eq!(r.ratio_exact, Some(ExactScalar::from_ratio(5, 4)));
        assert!(r.history.windows(2).all(|w| w[1] < w[0]));
        assert!(r.gaps.iter().all(|g| *g >= 0.0));
        assert!(!tight_strategies(&r).is_empty());
    }
}
