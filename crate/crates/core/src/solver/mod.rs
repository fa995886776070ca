//! Exact computation of `SDP_1[M] = max_{a,b ∈ {±1}} Σ M_xy a_x b_y`.
//!
//! For fixed `a` the best `b` is `b_y = sign(Σ_x M_xy a_x)`, so the search
//! runs over `a` only, with `a[0]` fixed by the global sign symmetry.

mod bnb;

use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use bnb::Checkpoint;

use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::matrix::{ExactMatrix, IntMatrix, MatrixInput};
use crate::oracle;
use crate::polytope::{vertex_value, SignStrategy, Strategy};
use bnb::{brute_force, Search};

/// Largest `m1` accepted by the exhaustive reference solver.
pub const BRUTE_FORCE_CAP: usize = 22;

/// Default cap on the branching side of [`sdp1_rectangular`].
pub const DEFAULT_BRANCH_CAP: usize = 34;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofFlag {
    Optimal,
    BudgetExceeded,
}

/// Result of an exact solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactSolveResult {
    pub value: ExactScalar,
    pub value_f64: f64,
    pub strategy: SignStrategy,
    pub nodes_visited: u64,
    pub proof_flag: ProofFlag,
    /// False when the input was given in floating point, in which case the
    /// optimum is only as good as float arithmetic.
    pub certified: bool,
}

impl ExactSolveResult {
    pub fn is_optimal(&self) -> bool {
        self.proof_flag == ProofFlag::Optimal
    }
}

/// Knobs for the branch-and-bound solvers.
#[derive(Clone)]
pub struct SolveOptions {
    pub node_budget: Option<u64>,
    pub warm_start: Option<SignStrategy>,
    /// Heuristic restarts used to build a warm start when none is given;
    /// zero disables it.
    pub warm_restarts: usize,
    pub seed: u64,
    pub branch_cap: usize,
    pub checkpoint: Option<Arc<dyn Fn(&Checkpoint) + Send + Sync>>,
    pub checkpoint_every: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            node_budget: None,
            warm_start: None,
            warm_restarts: oracle::DEFAULT_LMO_RESTARTS,
            seed: 0,
            branch_cap: DEFAULT_BRANCH_CAP,
            checkpoint: None,
            checkpoint_every: 10_000_000,
        }
    }
}

impl std::fmt::Debug for SolveOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveOptions")
            .field("node_budget", &self.node_budget)
            .field("warm_start", &self.warm_start)
            .field("warm_restarts", &self.warm_restarts)
            .field("seed", &self.seed)
            .field("branch_cap", &self.branch_cap)
            .finish()
    }
}

fn int_data(m: &IntMatrix) -> Result<Vec<i64>> {
    // Partial sums stay below the total absolute sum.
    if m.abs_sum() > (i64::MAX / 4) as u128 {
        return Err(Error::resource(
            "integer matrix entries too large for 64-bit search",
        ));
    }
    Ok(m.data().to_vec())
}

fn f64_data(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let (m1, m2) = m.shape();
    Ok((0..m1)
        .flat_map(|x| (0..m2).map(move |y| m[(x, y)]))
        .collect())
}

/// Safe pruning slack for float searches on a matrix with absolute entry
/// sum `abs_sum`.
fn float_margin(abs_sum: f64, m1: usize) -> f64 {
    1e-12 * (1.0 + abs_sum) * (m1 as f64 + 2.0)
}

fn best_response_sign(cols: impl Iterator<Item = i32>) -> Vec<i8> {
    cols.map(|s| if s < 0 { -1 } else { 1 }).collect()
}

fn strategy_int(m: &IntMatrix, a: Vec<i8>) -> SignStrategy {
    let b = best_response_sign((0..m.cols()).map(|y| {
        let s: i128 = (0..m.rows())
            .map(|x| m.get(x, y) as i128 * a[x] as i128)
            .sum();
        s.signum() as i32
    }));
    SignStrategy { a, b }
}

fn strategy_exact(m: &ExactMatrix, a: Vec<i8>) -> SignStrategy {
    let b = best_response_sign((0..m.cols()).map(|y| column_sum(m, &a, y).signum()));
    SignStrategy { a, b }
}

fn column_sum(m: &ExactMatrix, a: &[i8], y: usize) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    for (x, &s) in a.iter().enumerate() {
        let v = m.get(x, y);
        if v.is_zero() {
            continue;
        }
        if s > 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    acc
}

fn exact_objective(m: &ExactMatrix, a: &[i8]) -> ExactScalar {
    let mut acc = ExactScalar::zero();
    for y in 0..m.cols() {
        acc += &column_sum(m, a, y).abs();
    }
    acc
}

fn warm_a(m: &DMatrix<f64>, opts: &SolveOptions, transposed: bool) -> Result<Option<Vec<i8>>> {
    if let Some(w) = &opts.warm_start {
        let s = if transposed { w.transpose() } else { w.clone() };
        if s.a.len() != m.nrows() {
            return Err(Error::domain("warm start has the wrong size"));
        }
        return Ok(Some(s.a));
    }
    if opts.warm_restarts == 0 {
        return Ok(None);
    }
    let res = oracle::heuristic_sdp(m, 1, opts.warm_restarts, opts.seed)?;
    Ok(match res.strategy {
        Strategy::Sign(s) => Some(s.a),
        Strategy::Unit(_) => None,
    })
}

fn int_result(
    m: &IntMatrix,
    factor: &ExactScalar,
    value: i64,
    a: Vec<i8>,
    nodes: u64,
    complete: bool,
) -> ExactSolveResult {
    let v = factor * &ExactScalar::from_int(value);
    ExactSolveResult {
        value_f64: v.to_f64(),
        value: v,
        strategy: strategy_int(m, a),
        nodes_visited: nodes,
        proof_flag: if complete {
            ProofFlag::Optimal
        } else {
            ProofFlag::BudgetExceeded
        },
        certified: true,
    }
}

/// Exhaustive reference solver, `m1 ≤ 22`.
pub fn sdp1_bruteforce(m: &MatrixInput) -> Result<ExactSolveResult> {
    let (m1, m2) = m.shape();
    if m1 > BRUTE_FORCE_CAP {
        return Err(Error::resource(format!(
            "brute force limited to m1 ≤ {BRUTE_FORCE_CAP}, got {m1}"
        )));
    }
    if m1 == 0 || m2 == 0 {
        return Err(Error::domain("empty matrix"));
    }
    let nodes = 1u64 << (m1 - 1);
    match m {
        MatrixInput::Integer(im) => {
            let (v, a) = brute_force(&int_data(im)?, m1, m2);
            Ok(int_result(im, &ExactScalar::one(), v, a, nodes, true))
        }
        MatrixInput::Exact(em) => {
            if let Some((factor, im)) = em.integer_factorization() {
                let (v, a) = brute_force(&int_data(&im)?, m1, m2);
                let mut r = int_result(&im, &factor, v, a, nodes, true);
                r.strategy = strategy_exact(em, r.strategy.a);
                return Ok(r);
            }
            // Radical entries: enumerate exactly.
            let mut best: Option<(ExactScalar, Vec<i8>)> = None;
            let mut a = vec![1i8; m1];
            for mask in 0..nodes {
                for x in 1..m1 {
                    a[x] = if mask >> (x - 1) & 1 == 1 { -1 } else { 1 };
                }
                let v = exact_objective(em, &a);
                let replace = match &best {
                    None => true,
                    Some((bv, ba)) => v > *bv || (v == *bv && a < *ba),
                };
                if replace {
                    best = Some((v, a.clone()));
                }
            }
            let (v, a) = best.expect("at least one assignment");
            Ok(ExactSolveResult {
                value_f64: v.to_f64(),
                value: v,
                strategy: strategy_exact(em, a),
                nodes_visited: nodes,
                proof_flag: ProofFlag::Optimal,
                certified: true,
            })
        }
        MatrixInput::Float(fm) => {
            let (v, a) = brute_force(&f64_data(fm)?, m1, m2);
            Ok(ExactSolveResult {
                value: ExactScalar::from_rational(crate::exact::exact_from_f64(v)?),
                value_f64: v,
                strategy: SignStrategy::best_response_f64(fm, a),
                nodes_visited: nodes,
                proof_flag: ProofFlag::Optimal,
                certified: false,
            })
        }
    }
}

/// Branch and bound over the rows of `m`.
pub fn sdp1_branch_and_bound(m: &MatrixInput, opts: &SolveOptions) -> Result<ExactSolveResult> {
    let (m1, m2) = m.shape();
    if m1 == 0 || m2 == 0 {
        return Err(Error::domain("empty matrix"));
    }
    if m1 > 63 {
        return Err(Error::resource(format!("cannot branch on {m1} rows")));
    }
    let fm = m.to_f64();
    let warm = warm_a(&fm, opts, false)?;
    let cp = opts.checkpoint.as_deref();
    match m {
        MatrixInput::Integer(im) => solve_int(im, &ExactScalar::one(), warm, opts),
        MatrixInput::Exact(em) => {
            if let Some((factor, im)) = em.integer_factorization() {
                let mut r = solve_int(&im, &factor, warm, opts)?;
                r.strategy = strategy_exact(em, r.strategy.a);
                return Ok(r);
            }
            solve_radical(em, &fm, warm, opts)
        }
        MatrixInput::Float(_) => {
            let data = f64_data(&fm)?;
            let search = Search::new(&data, m1, m2, 0.0)
                .budget(opts.node_budget)
                .checkpoint(cp, opts.checkpoint_every);
            let found = search.run(warm.as_deref());
            Ok(ExactSolveResult {
                value: ExactScalar::from_rational(crate::exact::exact_from_f64(found.value)?),
                value_f64: found.value,
                strategy: SignStrategy::best_response_f64(&fm, found.a),
                nodes_visited: found.nodes,
                proof_flag: if found.complete {
                    ProofFlag::Optimal
                } else {
                    ProofFlag::BudgetExceeded
                },
                certified: false,
            })
        }
    }
}

fn solve_int(
    im: &IntMatrix,
    factor: &ExactScalar,
    warm: Option<Vec<i8>>,
    opts: &SolveOptions,
) -> Result<ExactSolveResult> {
    let data = int_data(im)?;
    let search = Search::new(&data, im.rows(), im.cols(), 0i64)
        .budget(opts.node_budget)
        .checkpoint(opts.checkpoint.as_deref(), opts.checkpoint_every);
    let found = search.run(warm.as_deref());
    Ok(int_result(
        im,
        factor,
        found.value,
        found.a,
        found.nodes,
        found.complete,
    ))
}

/// Float search with a safety margin; every leaf close to the incumbent is
/// re-evaluated exactly and the exact maximum is kept.
fn solve_radical(
    em: &ExactMatrix,
    fm: &DMatrix<f64>,
    warm: Option<Vec<i8>>,
    opts: &SolveOptions,
) -> Result<ExactSolveResult> {
    let (m1, m2) = em.shape();
    let data = f64_data(fm)?;
    let margin = float_margin(fm.iter().map(|v| v.abs()).sum(), m1);
    let exact_best: Mutex<Option<(ExactScalar, Vec<i8>)>> = Mutex::new(None);
    let record = |a: &[i8], _v: f64| {
        let v = exact_objective(em, a);
        let mut guard = exact_best.lock().expect("solver mutex");
        let replace = match &*guard {
            None => true,
            Some((bv, ba)) => v > *bv || (v == *bv && a < ba.as_slice()),
        };
        if replace {
            *guard = Some((v, a.to_vec()));
        }
    };
    let search = Search::new(&data, m1, m2, margin)
        .budget(opts.node_budget)
        .checkpoint(opts.checkpoint.as_deref(), opts.checkpoint_every)
        .on_leaf(Some(&record));
    let found = search.run(warm.as_deref());
    let (value, a) = exact_best
        .into_inner()
        .expect("solver mutex")
        .unwrap_or_else(|| (exact_objective(em, &found.a), found.a.clone()));
    Ok(ExactSolveResult {
        value_f64: value.to_f64(),
        value,
        strategy: strategy_exact(em, a),
        nodes_visited: found.nodes,
        proof_flag: if found.complete {
            ProofFlag::Optimal
        } else {
            ProofFlag::BudgetExceeded
        },
        certified: true,
    })
}

fn transpose_input(m: &MatrixInput) -> MatrixInput {
    match m {
        MatrixInput::Integer(im) => MatrixInput::Integer(im.transpose()),
        MatrixInput::Exact(em) => MatrixInput::Exact(em.transpose()),
        MatrixInput::Float(fm) => MatrixInput::Float(fm.transpose()),
    }
}

/// Branch and bound on the smaller side of a rectangular matrix.
pub fn sdp1_rectangular(m: &MatrixInput, opts: &SolveOptions) -> Result<ExactSolveResult> {
    let (m1, m2) = m.shape();
    let transposed = m2 < m1;
    let side = m1.min(m2);
    if side > opts.branch_cap {
        return Err(Error::resource(format!(
            "smaller side {side} exceeds the branch cap {}",
            opts.branch_cap
        )));
    }
    if !transposed {
        return sdp1_branch_and_bound(m, opts);
    }
    let mut topts = opts.clone();
    topts.warm_start = opts.warm_start.as_ref().map(SignStrategy::transpose);
    let mut r = sdp1_branch_and_bound(&transpose_input(m), &topts)?;
    r.strategy = r.strategy.transpose().normalized();
    Ok(r)
}

/// `SDP_1` of an exact matrix, branching on the smaller side.
pub fn sdp1_exact(m: &ExactMatrix, opts: &SolveOptions) -> Result<ExactSolveResult> {
    sdp1_rectangular(&MatrixInput::Exact(m.clone()), opts)
}

/// Float `SDP_1` used inside projection loops: brute force for tiny inputs,
/// branch and bound otherwise. Returns the value and the maximising vertex.
pub fn sdp1_float(m: &DMatrix<f64>, budget: Option<u64>) -> Result<(f64, SignStrategy, bool)> {
    let transposed = m.ncols() < m.nrows();
    let mm = if transposed { m.transpose() } else { m.clone() };
    let (m1, m2) = mm.shape();
    let data = f64_data(&mm)?;
    let (v, a, complete) = if m1 <= 12 {
        let (v, a) = brute_force(&data, m1, m2);
        (v, a, true)
    } else {
        let found = Search::new(&data, m1, m2, 0.0).budget(budget).run(None);
        (found.value, found.a, found.complete)
    };
    let s = SignStrategy::best_response_f64(&mm, a);
    let s = if transposed {
        s.transpose().normalized()
    } else {
        s
    };
    Ok((v, s, complete))
}

/// All vertices `a bᵀ` (with `a[0] = +1`) attaining `SDP_1` of an integer
/// matrix, together with that value. Columns with zero sum contribute both
/// signs of `b_y`. Fails once more than `cap` vertices are found.
pub fn face_vertices(m: &IntMatrix, cap: usize) -> Result<(i64, Vec<SignStrategy>)> {
    let (m1, m2) = (m.rows(), m.cols());
    if m1 == 0 || m2 == 0 {
        return Err(Error::domain("empty matrix"));
    }
    if m1 > 63 {
        return Err(Error::resource(format!("cannot branch on {m1} rows")));
    }
    let data = int_data(m)?;
    let best = Search::new(&data, m1, m2, 0i64).run(None);
    let optimal: Mutex<std::collections::BTreeSet<Vec<i8>>> = Mutex::new(Default::default());
    let record = |a: &[i8], v: i64| {
        if v == best.value {
            optimal.lock().expect("solver mutex").insert(a.to_vec());
        }
    };
    Search::new(&data, m1, m2, 0i64)
        .on_leaf(Some(&record))
        .run(Some(&best.a));
    let mut out = Vec::new();
    for a in optimal.into_inner().expect("solver mutex") {
        let cols: Vec<i128> = (0..m2)
            .map(|y| (0..m1).map(|x| m.get(x, y) as i128 * a[x] as i128).sum())
            .collect();
        let ties: Vec<usize> = (0..m2).filter(|&y| cols[y] == 0).collect();
        if ties.len() >= 63 || out.len() + (1usize << ties.len()) > cap {
            return Err(Error::resource(format!(
                "face has more than {cap} vertices"
            )));
        }
        for mask in 0..1u64 << ties.len() {
            let mut b: Vec<i8> = cols.iter().map(|&c| if c < 0 { -1 } else { 1 }).collect();
            for (i, &y) in ties.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    b[y] = -1;
                }
            }
            out.push(SignStrategy { a: a.clone(), b });
        }
    }
    Ok((best.value, out))
}

/// Checks the certificate of an exact solve: the value is attained by the
/// reported strategy.
pub fn verify_attained(m: &ExactMatrix, r: &ExactSolveResult) -> Result<bool> {
    Ok(vertex_value(m, &r.strategy)? == r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(m1: usize, m2: usize, v: &[i64]) -> MatrixInput {
        MatrixInput::Integer(IntMatrix::new(m1, m2, v.to_vec()).unwrap())
    }

    #[test]
    fn one_by_one() {
        let r = sdp1_bruteforce(&int(1, 1, &[-7])).unwrap();
        assert_eq!(r.value, ExactScalar::from_int(7));
    }

    #[test]
    fn chsh() {
        let m = int(2, 2, &[1, 1, 1, -1]);
        assert_eq!(sdp1_bruteforce(&m).unwrap().value, ExactScalar::from_int(2));
        let r = sdp1_branch_and_bound(&m, &SolveOptions::default()).unwrap();
        assert_eq!(r.value, ExactScalar::from_int(2));
        assert!(r.is_optimal());
    }

    #[test]
    fn chsh_face() {
        let m = IntMatrix::new(2, 2, vec![1, 1, 1, -1]).unwrap();
        let (v, face) = face_vertices(&m, 100).unwrap();
        assert_eq!(v, 2);
        // Both choices of a leave one column at zero.
        assert_eq!(face.len(), 4);
        let id = IntMatrix::new(2, 2, vec![1, 0, 0, 1]).unwrap();
        let (v, face) = face_vertices(&id, 100).unwrap();
        assert_eq!(v, 2);
        assert_eq!(face.len(), 2);
        let zero = IntMatrix::new(1, 3, vec![0, 0, 0]).unwrap();
        assert_eq!(face_vertices(&zero, 100).unwrap().1.len(), 8);
        assert!(face_vertices(&zero, 7).is_err());
    }

    #[test]
    fn brute_force_cap() {
        let m = MatrixInput::Float(DMatrix::zeros(23, 2));
        assert!(matches!(sdp1_bruteforce(&m), Err(Error::Resource(_))));
    }

    #[test]
    fn branch_cap() {
        let m = MatrixInput::Float(DMatrix::from_element(35, 40, 1.0));
        assert!(matches!(
            sdp1_rectangular(&m, &SolveOptions::default()),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let data: Vec<i64> = (0..400).map(|i| ((i * 7919) % 13) as i64 - 6).collect();
        let m = int(20, 20, &data);
        let opts = SolveOptions {
            node_budget: Some(10),
            warm_restarts: 0,
            ..SolveOptions::default()
        };
        let r = sdp1_branch_and_bound(&m, &opts).unwrap();
        assert_eq!(r.proof_flag, ProofFlag::BudgetExceeded);
    }
}
