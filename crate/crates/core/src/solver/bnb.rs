//! Depth-first branch and bound for `max_a Σ_y |Σ_x M_xy a_x|`.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

/// Arithmetic the search runs in. Values met during the search are
/// non-negative, and `key` must be order-preserving on them.
pub(crate) trait Arith: Copy + Send + Sync + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn abs(self) -> Self;
    fn key(self) -> u64;
    fn from_key(k: u64) -> Self;
    fn to_f64(self) -> f64;
}

impl Arith for i64 {
    fn zero() -> Self {
        0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn abs(self) -> Self {
        i64::abs(self)
    }
    fn key(self) -> u64 {
        self.max(0) as u64
    }
    fn from_key(k: u64) -> Self {
        k as i64
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Arith for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn key(self) -> u64 {
        self.max(0.0).to_bits()
    }
    fn from_key(k: u64) -> Self {
        f64::from_bits(k)
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Progress snapshot passed to checkpoint callbacks.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub nodes: u64,
    pub incumbent: f64,
}

pub(crate) type CheckpointFn = dyn Fn(&Checkpoint) + Send + Sync;

pub(crate) struct Search<'a, T: Arith> {
    /// Row-major, rows already permuted into branching order.
    rows: Vec<T>,
    m1: usize,
    m2: usize,
    /// `order[i]` is the original index of branching position `i`.
    order: Vec<usize>,
    /// `suffix[k*m2 + y] = Σ_{i ≥ k} |M_{order[i], y}|`.
    suffix: Vec<T>,
    /// Pruning slack: a node is discarded when `bound + margin < incumbent`.
    margin: T,
    budget: Option<u64>,
    nodes: AtomicU64,
    aborted: AtomicBool,
    incumbent: AtomicU64,
    checkpoint: Option<&'a CheckpointFn>,
    checkpoint_every: u64,
    /// Called on every leaf within `margin` of the incumbent; used for exact
    /// re-evaluation when the search arithmetic is inexact.
    on_leaf: Option<&'a (dyn Fn(&[i8], T) + Send + Sync)>,
}

/// Outcome of a search, in original row order with `a[0] = +1`.
#[derive(Clone, Debug)]
pub(crate) struct Found<T> {
    pub value: T,
    pub a: Vec<i8>,
    pub nodes: u64,
    pub complete: bool,
}

#[derive(Clone)]
struct Best<T> {
    value: T,
    a: Option<Vec<i8>>,
}

impl<T: Arith> Best<T> {
    fn offer(&mut self, value: T, a: Vec<i8>) {
        let replace = match &self.a {
            None => true,
            Some(cur) => value > self.value || (value == self.value && a < *cur),
        };
        if replace {
            self.value = value;
            self.a = Some(a);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if let Some(a) = other.a {
            self.offer(other.value, a);
        }
        self
    }
}

impl<'a, T: Arith> Search<'a, T> {
    /// `matrix` is row-major `m1 × m2`.
    pub fn new(matrix: &[T], m1: usize, m2: usize, margin: T) -> Self {
        let l1 = |x: usize| (0..m2).fold(T::zero(), |acc, y| acc.add(matrix[x * m2 + y].abs()));
        let mut order: Vec<usize> = (0..m1).collect();
        // Decreasing row L1 norm; stable so ties keep index order.
        order.sort_by(|&p, &q| {
            l1(q)
                .partial_cmp(&l1(p))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut rows = Vec::with_capacity(m1 * m2);
        for &x in &order {
            rows.extend_from_slice(&matrix[x * m2..(x + 1) * m2]);
        }
        let mut suffix = vec![T::zero(); (m1 + 1) * m2];
        for k in (0..m1).rev() {
            for y in 0..m2 {
                suffix[k * m2 + y] = suffix[(k + 1) * m2 + y].add(rows[k * m2 + y].abs());
            }
        }
        Self {
            rows,
            m1,
            m2,
            order,
            suffix,
            margin,
            budget: None,
            nodes: AtomicU64::new(0),
            aborted: AtomicBool::new(false),
            incumbent: AtomicU64::new(0),
            checkpoint: None,
            checkpoint_every: 10_000_000,
            on_leaf: None,
        }
    }

    pub fn budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }

    pub fn checkpoint(mut self, f: Option<&'a CheckpointFn>, every: u64) -> Self {
        self.checkpoint = f;
        self.checkpoint_every = every.max(1);
        self
    }

    pub fn on_leaf(mut self, f: Option<&'a (dyn Fn(&[i8], T) + Send + Sync)>) -> Self {
        self.on_leaf = f;
        self
    }

    /// Value of a full assignment given in original row order.
    pub fn evaluate(&self, a: &[i8]) -> T {
        let mut col = vec![T::zero(); self.m2];
        for (i, &x) in self.order.iter().enumerate() {
            self.accumulate(&mut col, i, a[x]);
        }
        col.iter().fold(T::zero(), |acc, c| acc.add(c.abs()))
    }

    fn accumulate(&self, col: &mut [T], i: usize, s: i8) {
        let row = &self.rows[i * self.m2..(i + 1) * self.m2];
        if s > 0 {
            for (c, &v) in col.iter_mut().zip(row) {
                *c = c.add(v);
            }
        } else {
            for (c, &v) in col.iter_mut().zip(row) {
                *c = c.sub(v);
            }
        }
    }

    fn bound(&self, col: &[T], k: usize) -> T {
        let suf = &self.suffix[k * self.m2..(k + 1) * self.m2];
        col.iter()
            .zip(suf)
            .fold(T::zero(), |acc, (c, s)| acc.add(c.abs()).add(*s))
    }

    fn incumbent(&self) -> T {
        T::from_key(self.incumbent.load(Ordering::Relaxed))
    }

    fn raise_incumbent(&self, v: T) {
        self.incumbent.fetch_max(v.key(), Ordering::Relaxed);
    }

    fn count_node(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(cb) = self.checkpoint {
            if n % self.checkpoint_every == 0 {
                cb(&Checkpoint {
                    nodes: n,
                    incumbent: self.incumbent_f64(),
                });
            }
        }
        if let Some(b) = self.budget {
            if n > b {
                self.aborted.store(true, Ordering::Relaxed);
            }
        }
        !self.aborted.load(Ordering::Relaxed)
    }

    fn incumbent_f64(&self) -> f64 {
        self.incumbent().to_f64()
    }

    fn leaf(&self, col: &[T], signs: &[i8], best: &mut Best<T>) {
        let value = col.iter().fold(T::zero(), |acc, c| acc.add(c.abs()));
        if value.add(self.margin) < self.incumbent() {
            return;
        }
        let mut a = vec![0i8; self.m1];
        for (i, &x) in self.order.iter().enumerate() {
            a[x] = signs[i];
        }
        if a[0] < 0 {
            a.iter_mut().for_each(|s| *s = -*s);
        }
        if let Some(f) = self.on_leaf {
            f(&a, value);
        }
        self.raise_incumbent(value);
        best.offer(value, a);
    }

    fn dfs(&self, col: &mut Vec<T>, signs: &mut Vec<i8>, k: usize, best: &mut Best<T>) {
        if !self.count_node() {
            return;
        }
        if k == self.m1 {
            self.leaf(col, signs, best);
            return;
        }
        if self.bound(col, k).add(self.margin) < self.incumbent() {
            return;
        }
        for s in [1i8, -1] {
            self.accumulate(col, k, s);
            signs.push(s);
            self.dfs(col, signs, k + 1, best);
            signs.pop();
            self.accumulate(col, k, -s);
            if self.aborted.load(Ordering::Relaxed) {
                return;
            }
        }
    }

    /// Runs the search. `warm` seeds the incumbent with a known assignment.
    pub fn run(&self, warm: Option<&[i8]>) -> Found<T> {
        let mut seed_best = Best {
            value: T::zero(),
            a: None,
        };
        if let Some(a) = warm {
            let mut a = a.to_vec();
            if a[0] < 0 {
                a.iter_mut().for_each(|s| *s = -*s);
            }
            let v = self.evaluate(&a);
            if let Some(f) = self.on_leaf {
                f(&a, v);
            }
            self.raise_incumbent(v);
            seed_best.offer(v, a);
        }
        // The first branching variable is fixed to +1; split the next few
        // levels into independent prefixes.
        let depth = (self.m1 - 1).min(10);
        let prefixes: Vec<u32> = (0..1u32 << depth).collect();
        let results: Vec<Best<T>> = prefixes
            .par_iter()
            .map(|&mask| {
                let mut col = vec![T::zero(); self.m2];
                let mut signs = Vec::with_capacity(self.m1);
                self.accumulate(&mut col, 0, 1);
                signs.push(1);
                for i in 0..depth {
                    let s = if mask >> i & 1 == 1 { -1 } else { 1 };
                    self.accumulate(&mut col, i + 1, s);
                    signs.push(s);
                }
                let mut best = Best {
                    value: T::zero(),
                    a: None,
                };
                self.dfs(&mut col, &mut signs, depth + 1, &mut best);
                best
            })
            .collect();
        let best = results.into_iter().fold(seed_best, Best::merge);
        let (value, a) = match best.a {
            Some(a) => (best.value, a),
            None => {
                let a = vec![1; self.m1];
                (self.evaluate(&a), a)
            }
        };
        Found {
            value,
            a,
            nodes: self.nodes.load(Ordering::Relaxed),
            complete: !self.aborted.load(Ordering::Relaxed),
        }
    }
}

/// Exhaustive search over `a ∈ {±1}^{m1}` with `a[0] = +1`, in Gray-code
/// order. Ties keep the lexicographically smallest `a`.
pub(crate) fn brute_force<T: Arith>(matrix: &[T], m1: usize, m2: usize) -> (T, Vec<i8>) {
    let mut a = vec![1i8; m1];
    let mut col: Vec<T> = (0..m2)
        .map(|y| (0..m1).fold(T::zero(), |acc, x| acc.add(matrix[x * m2 + y])))
        .collect();
    let value = |col: &[T]| col.iter().fold(T::zero(), |acc, c| acc.add(c.abs()));
    let mut best = (value(&col), a.clone());
    let free = m1 - 1;
    for step in 1u64..(1u64 << free) {
        let bit = step.trailing_zeros() as usize;
        let x = bit + 1;
        a[x] = -a[x];
        let row = &matrix[x * m2..(x + 1) * m2];
        for (c, &v) in col.iter_mut().zip(row) {
            // a[x] flipped: add or remove twice the row.
            *c = if a[x] > 0 {
                c.add(v).add(v)
            } else {
                c.sub(v).sub(v)
            };
        }
        let v = value(&col);
        if v > best.0 || (v == best.0 && a < best.1) {
            best = (v, a.clone());
        }
    }
    best
}
