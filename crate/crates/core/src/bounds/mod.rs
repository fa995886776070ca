//! Bounds on `K_G(d→n)`: closed forms, ratio certificates, diagonal
//! modifications, shrinking factors and the upper-bound combiner.

mod closed;
mod store;

pub use closed::{
    davie_bound, davie_objective, gamma, gamma_ratio, interval_hi_f64, interval_lo_f64,
    psd_constant, soa_lower_n2, within, DavieBound, PiMultiple,
};
pub use store::{
    best_known, literature_entries, report_csv, report_rows, report_text, reported_entries,
    BestKnown, BoundCertificate, BoundKind, BoundValue, CertificateStore, Provenance, ReportRow,
    MAX_REPORT_ORDER,
};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::geometry;
use crate::matrix::{ExactMatrix, MatrixInput};
use crate::oracle::{self, OracleResult};
use crate::solver::{self, ExactSolveResult, SolveOptions};

/// `K_G(d→n) ≥ K_G(d)/K_G(n)`, from `K_G(d) ≤ K_G(d→n)·K_G(n)`.
pub fn multiplicative_lower(kg_d_lower: f64, kg_n_upper: f64) -> Result<f64> {
    if !(kg_n_upper > 0.0) || !kg_d_lower.is_finite() {
        return Err(Error::domain("need a positive upper bound on K_G(n)"));
    }
    Ok(kg_d_lower / kg_n_upper)
}

/// Certificate form of [`multiplicative_lower`].
pub fn multiplicative_certificate(
    kg_d: &BoundCertificate,
    kg_n: &BoundCertificate,
) -> Result<BoundCertificate> {
    if kg_d.kind != BoundKind::Lower || kg_d.n != 1 || kg_n.kind != BoundKind::Upper || kg_n.n != 1
    {
        return Err(Error::domain(
            "need a lower bound on K_G(d) and an upper bound on K_G(n)",
        ));
    }
    if kg_n.d > kg_d.d {
        return Err(Error::domain("need n ≤ d"));
    }
    let value = multiplicative_lower(kg_d.conservative_f64(), kg_n.conservative_f64())?;
    let provenance =
        if kg_d.provenance == Provenance::Heuristic || kg_n.provenance == Provenance::Heuristic {
            Provenance::Heuristic
        } else {
            Provenance::ClosedForm
        };
    Ok(BoundCertificate {
        id: format!("mult-{}-{}", kg_d.id, kg_n.id),
        d: kg_d.d,
        n: kg_n.d,
        kind: BoundKind::Lower,
        value: BoundValue::Float(value.next_down()),
        provenance,
        source: "K_G(d) ≤ K_G(d→n)·K_G(n)".into(),
        witness: json!({ "numerator": kg_d.id, "denominator": kg_n.id }),
        chain: vec![kg_d.id.clone(), kg_n.id.clone()],
    })
}

/// Largest `η` with `η·S^{d−1} ⊂ conv{±a_x}`, with the hull facet attaining it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShrinkingFactor {
    pub eta: f64,
    /// Unit outward normal of the closest facet.
    pub normal: Vec<f64>,
    /// Indices into the `±a_x` point list (`2x` for `a_x`, `2x+1` for `−a_x`).
    pub facet_vertices: Vec<usize>,
    pub facet_count: usize,
}

/// Inradius of the centrally symmetric hull of a configuration's lines.
pub fn shrinking_factor(conf: &Configuration) -> Result<ShrinkingFactor> {
    let d = conf.d;
    let mut points = Vec::with_capacity(2 * conf.m());
    for l in conf.lines() {
        let u = l.unit_f64();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        points.push(u);
        points.push(neg);
    }
    if d == 1 {
        return Ok(ShrinkingFactor {
            eta: 1.0,
            normal: vec![1.0],
            facet_vertices: vec![0],
            facet_count: 2,
        });
    }
    let facets = geometry::hull_facets(&points, d)?;
    let best = facets
        .iter()
        .min_by(|a, b| a.offset.total_cmp(&b.offset))
        .ok_or_else(|| Error::Degenerate("hull has no facets".into()))?;
    if !(best.offset > 0.0) {
        return Err(Error::Degenerate(
            "origin is not interior to the hull".into(),
        ));
    }
    Ok(ShrinkingFactor {
        eta: best.offset,
        normal: best.normal.clone(),
        facet_vertices: best.vertices.clone(),
        facet_count: facets.len(),
    })
}

/// `K_G(d→n) ≤ 1/(α·η_A·η_B)` when `αP` lies in the rank-`n` body and the
/// hulls of the two configurations contain balls of radii `η_A`, `η_B`.
pub fn shrinking_upper(
    d: usize,
    n: usize,
    alpha: &BigRational,
    eta_a: f64,
    eta_b: f64,
) -> Result<BoundCertificate> {
    let a = alpha.to_f64().unwrap_or(f64::NAN);
    if !(a > 0.0) || !(eta_a > 0.0 && eta_a <= 1.0) || !(eta_b > 0.0 && eta_b <= 1.0) {
        return Err(Error::domain("need α > 0 and 0 < η_A, η_B ≤ 1"));
    }
    // Round the denominator down and the quotient up.
    let den = (a * eta_a * eta_b) * (1.0 - 4.0 * f64::EPSILON);
    let value = (1.0 / den).next_up();
    Ok(BoundCertificate {
        id: format!("upper-d{d}-n{n}"),
        d,
        n,
        kind: BoundKind::Upper,
        value: BoundValue::Float(value),
        provenance: Provenance::ClosedForm,
        source: "1/(α·η_A·η_B)".into(),
        witness: json!({
            "alpha": crate::exact::json::rational_to_json(alpha),
            "alpha_f64": a,
            "eta_a": eta_a,
            "eta_b": eta_b,
        }),
        chain: Vec::new(),
    })
}

/// Value of `SDP_n[M]` used in a ratio certificate.
#[derive(Clone, Debug)]
pub enum SdpValue<'a> {
    Exact(&'a ExactSolveResult),
    Heuristic(&'a OracleResult),
}

/// `K_G(d→n) ≥ sdp_d_lower / SDP_n[M]`, where `sdp_d_lower ≤ SDP_d[M]`
/// (typically `⟨M, P⟩` for a verified `P`).
pub fn ratio_certificate(
    id: impl Into<String>,
    d: usize,
    n: usize,
    sdp_d_lower: &ExactScalar,
    sdp_n: SdpValue<'_>,
    witness: serde_json::Value,
) -> Result<BoundCertificate> {
    let (value, provenance, extra) = match sdp_n {
        SdpValue::Exact(r) => {
            if r.value.signum() <= 0 {
                return Err(Error::Degenerate("SDP value is not positive".into()));
            }
            let q = sdp_d_lower
                .checked_div(&r.value)
                .ok_or_else(|| Error::Degenerate("SDP value is not invertible".into()))?;
            let prov = if r.is_optimal() && r.certified && n == 1 {
                Provenance::Exact
            } else {
                Provenance::Heuristic
            };
            (
                BoundValue::Exact(q),
                prov,
                json!({ "sdp_n": r.value.to_json(), "nodes": r.nodes_visited }),
            )
        }
        SdpValue::Heuristic(r) => {
            if !(r.value > 0.0) {
                return Err(Error::Degenerate("SDP value is not positive".into()));
            }
            (
                BoundValue::Float(sdp_d_lower.to_f64() / r.value),
                Provenance::Heuristic,
                json!({ "sdp_n": r.value, "restarts": r.restarts_used, "seed": r.seed }),
            )
        }
    };
    Ok(BoundCertificate {
        id: id.into(),
        d,
        n,
        kind: BoundKind::Lower,
        value,
        provenance,
        source: "⟨M,P⟩/SDP_n[M]".into(),
        witness: json!({ "sdp_d_lower": sdp_d_lower.to_json(), "solve": extra, "data": witness }),
        chain: Vec::new(),
    })
}

/// Result of the diagonal-modification search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagonalSearch {
    pub lambda: ExactScalar,
    /// `⟨P − λI, P⟩ / SDP_1[P − λI]`.
    pub ratio: ExactScalar,
    pub sdp: ExactScalar,
    /// Breakpoints of `λ ↦ SDP_1[P − λI]` inside the search interval.
    pub breakpoints: Vec<ExactScalar>,
    /// Number of `SDP_1` evaluations.
    pub evaluations: usize,
    /// False when some `SDP_1` value came from the heuristic.
    pub certified: bool,
}

/// Piece of the convex function `λ ↦ SDP_1[P − λI]`: the vertex `a bᵀ`
/// contributes `aᵀPb − λ·⟨a, b⟩`.
#[derive(Clone, Debug, PartialEq)]
struct Line {
    intercept: ExactScalar,
    slope: i64,
}

impl Line {
    fn at(&self, l: &ExactScalar) -> ExactScalar {
        &self.intercept + &(&ExactScalar::from_int(self.slope) * l)
    }
}

struct DiagEval<'a> {
    p: &'a ExactMatrix,
    exact: bool,
    restarts: usize,
    seed: u64,
    evaluations: usize,
    certified: bool,
}

impl DiagEval<'_> {
    fn eval(&mut self, l: &ExactScalar) -> Result<(ExactScalar, Line)> {
        self.evaluations += 1;
        let a = crate::config::diagonal_modification(self.p, l)?;
        let s = if self.exact {
            let r = solver::sdp1_rectangular(&MatrixInput::Exact(a), &SolveOptions::default())?;
            if !r.is_optimal() || !r.certified {
                self.certified = false;
            }
            r.strategy
        } else {
            self.certified = false;
            let r = oracle::heuristic_sdp(&a.to_f64(), 1, self.restarts, self.seed)?;
            match r.strategy {
                crate::polytope::Strategy::Sign(s) => s,
                crate::polytope::Strategy::Unit(_) => {
                    return Err(Error::domain("rank-one oracle returned vectors"))
                }
            }
        };
        let ab: i64 = s.a.iter().zip(&s.b).map(|(&x, &y)| (x * y) as i64).sum();
        let value_p = crate::polytope::vertex_value(self.p, &s)?;
        let line = Line {
            intercept: value_p,
            slope: -ab,
        };
        Ok((line.at(l), line))
    }
}

/// Searches `λ ∈ [lo, hi]` for the best ratio `⟨P − λI, P⟩/SDP_1[P − λI]`.
///
/// `SDP_1[P − λI]` is a maximum of affine functions of `λ`; a grid of
/// `steps + 1` points is refined by intersecting the affine pieces found at
/// neighbouring points until every breakpoint is located. On each piece the
/// ratio is monotone, so the optimum is a breakpoint or an endpoint.
pub fn diagonal_modification_search(
    p: &ExactMatrix,
    lo: &ExactScalar,
    hi: &ExactScalar,
    steps: usize,
    restarts: usize,
    seed: u64,
) -> Result<DiagonalSearch> {
    if !p.is_square() {
        return Err(Error::domain("diagonal modification needs a square matrix"));
    }
    if lo > hi {
        return Err(Error::domain("empty λ interval"));
    }
    let steps = steps.max(1);
    let mut ev = DiagEval {
        p,
        exact: p.rows() <= solver::DEFAULT_BRANCH_CAP,
        restarts: restarts.max(1),
        seed,
        evaluations: 0,
        certified: true,
    };
    let width = hi - lo;
    let grid: Vec<ExactScalar> = (0..=steps)
        .map(|i| lo + &width.scale(&BigRational::new((i as i64).into(), (steps as i64).into())))
        .collect();
    let mut pts: Vec<(ExactScalar, ExactScalar, Line)> = Vec::new();
    for l in &grid {
        let (v, line) = ev.eval(l)?;
        pts.push((l.clone(), v, line));
    }
    let mut breakpoints = Vec::new();
    for w in pts.windows(2) {
        refine(&mut ev, &w[0], &w[1], &mut breakpoints, 0)?;
    }
    breakpoints.sort();
    breakpoints.dedup();
    let norm = p.inner(p)?;
    let tr = p.trace();
    let mut best: Option<(ExactScalar, ExactScalar, ExactScalar)> = None;
    let mut candidates: Vec<ExactScalar> = breakpoints.clone();
    candidates.push(lo.clone());
    candidates.push(hi.clone());
    candidates.sort();
    candidates.dedup();
    for l in candidates {
        let (g, _) = ev.eval(&l)?;
        if g.signum() <= 0 {
            continue;
        }
        let num = &norm - &(&l * &tr);
        let Some(r) = num.checked_div(&g) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| r > b.1) {
            best = Some((l, r, g));
        }
    }
    let (lambda, ratio, sdp) =
        best.ok_or_else(|| Error::Degenerate("no λ with positive SDP value".into()))?;
    Ok(DiagonalSearch {
        lambda,
        ratio,
        sdp,
        breakpoints,
        evaluations: ev.evaluations,
        certified: ev.certified,
    })
}

fn refine(
    ev: &mut DiagEval<'_>,
    left: &(ExactScalar, ExactScalar, Line),
    right: &(ExactScalar, ExactScalar, Line),
    out: &mut Vec<ExactScalar>,
    depth: usize,
) -> Result<()> {
    let (ll, _, la) = left;
    let (lr, _, lb) = right;
    if la == lb || depth > 64 {
        return Ok(());
    }
    if la.slope == lb.slope {
        // Parallel pieces cannot both be maximal at the two ends of a
        // segment of a convex function unless they coincide.
        return Ok(());
    }
    let x = (&lb.intercept - &la.intercept)
        .checked_div(&ExactScalar::from_int(la.slope - lb.slope))
        .expect("non-zero slope difference");
    if x < *ll || x > *lr {
        return Ok(());
    }
    let (gx, lx) = ev.eval(&x)?;
    if gx <= la.at(&x) {
        out.push(x);
        return Ok(());
    }
    let mid = (x.clone(), gx, lx);
    refine(ev, left, &mid, out, depth + 1)?;
    refine(ev, &mid, right, out, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{generate, gram};
    use crate::exact::ratio;

    #[test]
    fn multiplicative_examples() {
        let s2 = std::f64::consts::SQRT_2;
        assert!((multiplicative_lower(1.4367, s2).unwrap() - 1.0159).abs() < 1e-4);
        assert!((multiplicative_lower(1.48579, s2).unwrap() - 1.0506).abs() < 1e-4);
    }

    #[test]
    fn shrinking_upper_examples() {
        let one = shrinking_upper(3, 2, &ratio(1, 1), 1.0, 1.0).unwrap();
        assert!((one.value_f64() - 1.0).abs() < 1e-12 && one.value_f64() >= 1.0);
        let c = shrinking_upper(3, 2, &ratio(4, 5), 0.9, 0.9).unwrap();
        assert!((c.value_f64() - 1.54321).abs() < 1e-5);
        assert!(shrinking_upper(3, 2, &ratio(0, 1), 1.0, 1.0).is_err());
        assert!(shrinking_upper(3, 2, &ratio(1, 1), 1.5, 1.0).is_err());
    }

    #[test]
    fn shrinking_factor_simple() {
        let sq = Configuration::new(
            "square",
            2,
            vec![
                crate::config::Line::from_ints(&[1, 0]).unwrap(),
                crate::config::Line::from_ints(&[0, 1]).unwrap(),
            ],
            true,
        )
        .unwrap();
        assert!((shrinking_factor(&sq).unwrap().eta - 0.5f64.sqrt()).abs() < 1e-12);
        let oct = Configuration::new(
            "octahedron",
            3,
            vec![
                crate::config::Line::from_ints(&[1, 0, 0]).unwrap(),
                crate::config::Line::from_ints(&[0, 1, 0]).unwrap(),
                crate::config::Line::from_ints(&[0, 0, 1]).unwrap(),
            ],
            true,
        )
        .unwrap();
        assert!((shrinking_factor(&oct).unwrap().eta - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hexagon_diagonal_modification() {
        let c = generate("hexagon").unwrap();
        let p = gram(&c, &c).unwrap();
        let r = diagonal_modification_search(
            p.exact().unwrap(),
            &ExactScalar::zero(),
            &ExactScalar::one(),
            6,
            16,
            0,
        )
        .unwrap();
        assert_eq!(r.lambda, ExactScalar::from_ratio(2, 3));
        assert_eq!(r.ratio, ExactScalar::from_ratio(5, 4));
        assert!(r.certified);
    }

    #[test]
    fn icosahedron_and_d4() {
        let ico = generate("icosahedron").unwrap();
        assert!((shrinking_factor(&ico).unwrap().eta - 0.79465).abs() < 1e-5);
        let c = generate("24cell").unwrap();
        let p = gram(&c, &c).unwrap();
        let r = diagonal_modification_search(
            p.exact().unwrap(),
            &ExactScalar::zero(),
            &ExactScalar::one(),
            3,
            16,
            0,
        )
        .unwrap();
        assert_eq!(r.lambda, ExactScalar::from_ratio(2, 3));
        assert_eq!(r.ratio, ExactScalar::from_ratio(7, 5));
    }

    #[test]
    fn ratio_certificate_scale_invariant() {
        let m = ExactMatrix::from_ints(2, 2, &[1, 1, 1, -1]).unwrap();
        let opts = SolveOptions::default();
        let r = solver::sdp1_exact(&m, &opts).unwrap();
        let lower = &ExactScalar::from_int(2) * &ExactScalar::sqrt_int(2);
        let c = ratio_certificate("chsh", 2, 1, &lower, SdpValue::Exact(&r), json!(null)).unwrap();
        assert_eq!(c.value, BoundValue::Exact(ExactScalar::sqrt_int(2)));
        assert_eq!(c.provenance, Provenance::Exact);
        let m3 = m.scale(&ExactScalar::from_ratio(3, 7));
        let r3 = solver::sdp1_exact(&m3, &opts).unwrap();
        let lower3 = &lower * &ExactScalar::from_ratio(3, 7);
        let c3 =
            ratio_certificate("chsh3", 2, 1, &lower3, SdpValue::Exact(&r3), json!(null)).unwrap();
        assert_eq!(c.value, c3.value);
    }

    #[test]
    fn davie_values() {
        let b = davie_bound(1000, 1e-10).unwrap();
        assert!((b.value - 1.676956674).abs() < 1e-6);
        assert!((b.lambda - 0.255730213).abs() < 1e-6);
    }
}
