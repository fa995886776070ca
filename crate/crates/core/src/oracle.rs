//! Alternating-maximisation heuristic for `SDP_n[M]` and the linear
//! minimisation oracle built on it.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{SignStrategy, Strategy, UnitStrategy};

/// Alternations allowed per restart before giving up on a fixpoint.
pub const ALTERNATION_CAP: usize = 10_000;

/// Restarts used inside projection runs unless configured otherwise.
pub const DEFAULT_LMO_RESTARTS: usize = 1_000;

/// Best strategy found by the heuristic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub strategy: Strategy,
    pub value: f64,
    pub restarts_used: usize,
    pub seed: u64,
    /// Restarts stopped by [`ALTERNATION_CAP`] rather than convergence.
    pub cap_hits: usize,
}

/// Random-number stream for one restart: the run seed selects the key and
/// the restart index selects the stream, so restarts are independent of
/// scheduling.
pub fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    rng
}

fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

fn normalize_or_fallback(v: &mut [f64]) {
    let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|t| *t /= n);
    } else {
        v.iter_mut().for_each(|t| *t = 0.0);
        v[0] = 1.0;
    }
}

/// One round of the alternating update for `n = 1`: `b ← sign(Mᵀa)` then
/// `a ← sign(M b)`. Returns the new strategy and its value.
pub fn alternate_once_sign(m: &DMatrix<f64>, a: &[i8]) -> (SignStrategy, f64) {
    let (m1, m2) = m.shape();
    let b: Vec<i8> = (0..m2)
        .map(|y| sign((0..m1).map(|x| m[(x, y)] * a[x] as f64).sum()))
        .collect();
    let row: Vec<f64> = (0..m1)
        .map(|x| (0..m2).map(|y| m[(x, y)] * b[y] as f64).sum())
        .collect();
    let a2: Vec<i8> = row.iter().map(|&r| sign(r)).collect();
    let value = row.iter().map(|r| r.abs()).sum();
    (SignStrategy { a: a2, b }, value)
}

/// One round of the alternating update for unit vectors in `R^n`:
/// `b_y ∝ Σ_x M_xy a_x`, then `a_x ∝ Σ_y M_xy b_y`, with `(1, 0, …, 0)` for
/// zero sums.
pub fn alternate_once_unit(m: &DMatrix<f64>, n: usize, a: &[Vec<f64>]) -> (UnitStrategy, f64) {
    let (m1, m2) = m.shape();
    let mut b = vec![vec![0.0; n]; m2];
    for (y, by) in b.iter_mut().enumerate() {
        for x in 0..m1 {
            let w = m[(x, y)];
            if w != 0.0 {
                for k in 0..n {
                    by[k] += w * a[x][k];
                }
            }
        }
        normalize_or_fallback(by);
    }
    let mut a2 = vec![vec![0.0; n]; m1];
    let mut value = 0.0;
    for (x, ax) in a2.iter_mut().enumerate() {
        for (y, by) in b.iter().enumerate() {
            let w = m[(x, y)];
            if w != 0.0 {
                for k in 0..n {
                    ax[k] += w * by[k];
                }
            }
        }
        value += ax.iter().map(|t| t * t).sum::<f64>().sqrt();
        normalize_or_fallback(ax);
    }
    (UnitStrategy { n, a: a2, b }, value)
}

struct Restart {
    strategy: Strategy,
    value: f64,
    capped: bool,
}

fn run_restart(m: &DMatrix<f64>, n: usize, seed: u64, r: u64) -> Restart {
    let mut rng = restart_rng(seed, r);
    let m1 = m.nrows();
    if n == 1 {
        let mut a: Vec<i8> = (0..m1)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let mut best = (
            SignStrategy {
                a: a.clone(),
                b: vec![1; m.ncols()],
            },
            f64::NEG_INFINITY,
        );
        for _ in 0..ALTERNATION_CAP {
            let (s, v) = alternate_once_sign(m, &a);
            let fixpoint = s.a == a;
            a = s.a.clone();
            best = (s, v);
            if fixpoint {
                let (s, v) = best;
                return Restart {
                    strategy: Strategy::Sign(s.normalized()),
                    value: v,
                    capped: false,
                };
            }
        }
        let (s, v) = best;
        Restart {
            strategy: Strategy::Sign(s.normalized()),
            value: v,
            capped: true,
        }
    } else {
        let mut a: Vec<Vec<f64>> = (0..m1)
            .map(|_| {
                let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                normalize_or_fallback(&mut v);
                v
            })
            .collect();
        let mut prev = f64::NEG_INFINITY;
        let mut last = None;
        for _ in 0..ALTERNATION_CAP {
            let (s, v) = alternate_once_unit(m, n, &a);
            a = s.a.clone();
            let done = v - prev < 1e-12;
            prev = v;
            last = Some((s, v));
            if done {
                let (s, v) = last.unwrap();
                return Restart {
                    strategy: Strategy::Unit(s),
                    value: v,
                    capped: false,
                };
            }
        }
        let (s, v) = last.expect("at least one alternation");
        Restart {
            strategy: Strategy::Unit(s),
            value: v,
            capped: true,
        }
    }
}

fn strategy_cmp(a: &Strategy, b: &Strategy) -> Ordering {
    match (a, b) {
        (Strategy::Sign(x), Strategy::Sign(y)) => (&x.a, &x.b).cmp(&(&y.a, &y.b)),
        (Strategy::Unit(x), Strategy::Unit(y)) => {
            let fx = x.a.iter().chain(&x.b).flatten();
            let fy = y.a.iter().chain(&y.b).flatten();
            fx.zip(fy)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        }
        (Strategy::Sign(_), Strategy::Unit(_)) => Ordering::Less,
        (Strategy::Unit(_), Strategy::Sign(_)) => Ordering::Greater,
    }
}

/// Keeps the larger value; equal values keep the lexicographically smaller
/// strategy, so the reduction does not depend on evaluation order.
fn better(a: Restart, b: Restart) -> Restart {
    let capped = a.capped || b.capped;
    let mut winner = match a.value.total_cmp(&b.value) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if strategy_cmp(&a.strategy, &b.strategy) != Ordering::Greater {
                a
            } else {
                b
            }
        }
    };
    winner.capped = capped;
    winner
}

/// Heuristic lower bound on `SDP_n[M] = max Σ M_xy ⟨a_x, b_y⟩` by
/// alternating maximisation from `restarts` random starts.
pub fn heuristic_sdp(
    m: &DMatrix<f64>,
    n: usize,
    restarts: usize,
    seed: u64,
) -> Result<OracleResult> {
    if restarts == 0 {
        return Err(Error::domain("at least one restart is required"));
    }
    if n == 0 {
        return Err(Error::domain("rank n must be at least 1"));
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::domain("empty matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let results: Vec<(Restart, usize)> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let res = run_restart(m, n, seed, r);
            let hit = usize::from(res.capped);
            (res, hit)
        })
        .collect();
    let cap_hits = results.iter().map(|(_, h)| h).sum();
    let best = results
        .into_iter()
        .map(|(r, _)| r)
        .reduce(better)
        .expect("restarts ≥ 1");
    Ok(OracleResult {
        strategy: best.strategy,
        value: best.value,
        restarts_used: restarts,
        seed,
        cap_hits,
    })
}

/// Linear minimisation oracle: the strategy minimising `⟨gradient, V⟩`,
/// reported with `value = ⟨gradient, V⟩`.
pub fn lmo(gradient: &DMatrix<f64>, n: usize, restarts: usize, seed: u64) -> Result<OracleResult> {
    let mut res = heuristic_sdp(&(-gradient), n, restarts, seed)?;
    res.value = -res.value;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chsh() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0])
    }

    #[test]
    fn sign_step_uses_plus_one_for_zero() {
        let (s, v) = alternate_once_sign(&chsh(), &[1, 1]);
        assert_eq!(s.b, vec![1, 1]);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn unit_step_identity() {
        let m = DMatrix::identity(2, 2);
        let (s, v) = alternate_once_unit(&m, 2, &[vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(s.b, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn chsh_values() {
        assert_eq!(heuristic_sdp(&chsh(), 1, 100, 1).unwrap().value, 2.0);
        let v2 = heuristic_sdp(&chsh(), 2, 100, 1).unwrap().value;
        assert!((v2 - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_gives_zero() {
        let res = lmo(&DMatrix::zeros(3, 4), 1, 5, 0).unwrap();
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn rejects_zero_restarts() {
        assert!(heuristic_sdp(&chsh(), 1, 0, 0).is_err());
    }
}
