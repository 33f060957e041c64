use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{BinaryRelation, RelationError};
use crate::model::{Distribution, Rational};

/// A weighting `w` witnessing `μ L(R) ν`: supported on `R`, with left
/// marginal `μ` and right marginal `ν`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightingFunction<T: Ord = crate::model::StateId> {
    pub entries: BTreeMap<(T, T), Rational>,
}

impl<T: Ord + Clone> WeightingFunction<T> {
    pub fn weight(&self, x: &T, y: &T) -> Rational {
        self.entries.get(&(x.clone(), y.clone())).cloned().unwrap_or_else(Rational::zero)
    }

    /// Re-checks the three defining conditions.
    pub fn witnesses(&self, r: &BinaryRelation<T>, mu: &Distribution<T>, nu: &Distribution<T>) -> bool {
        let mut left: BTreeMap<T, Rational> = BTreeMap::new();
        let mut right: BTreeMap<T, Rational> = BTreeMap::new();
        for ((x, y), w) in &self.entries {
            if w.is_negative() || (!w.is_zero() && !r.contains(x, y)) {
                return false;
            }
            *left.entry(x.clone()).or_insert_with(Rational::zero) += w;
            *right.entry(y.clone()).or_insert_with(Rational::zero) += w;
        }
        left.retain(|_, v| !v.is_zero());
        right.retain(|_, v| !v.is_zero());
        let as_map = |d: &Distribution<T>| d.iter().map(|(k, v)| (k.clone(), v.clone())).collect::<BTreeMap<_, _>>();
        left == as_map(mu) && right == as_map(nu)
    }
}

struct Edge {
    to: usize,
    cap: BigInt,
    rev: usize,
}

struct FlowGraph {
    adj: Vec<Vec<Edge>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph { adj: (0..n).map(|_| Vec::new()).collect() }
    }

    /// Adds an edge and returns its position in `adj[from]`.
    fn add_edge(&mut self, from: usize, to: usize, cap: BigInt) -> usize {
        let a = self.adj[from].len();
        let b = self.adj[to].len();
        self.adj[from].push(Edge { to, cap, rev: b });
        self.adj[to].push(Edge { to: from, cap: BigInt::zero(), rev: a });
        a
    }

    /// Edmonds-Karp; augmenting paths are found by BFS in edge insertion order.
    fn max_flow(&mut self, s: usize, t: usize) -> BigInt {
        let mut total = BigInt::zero();
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (k, e) in self.adj[u].iter().enumerate() {
                    if !seen[e.to] && e.cap.is_positive() {
                        seen[e.to] = true;
                        prev[e.to] = Some((u, k));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck: Option<BigInt> = None;
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                let c = &self.adj[u][k].cap;
                if bottleneck.as_ref().is_none_or(|b| c < b) {
                    bottleneck = Some(c.clone());
                }
                v = u;
            }
            let f = bottleneck.expect("path has an edge");
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                self.adj[u][k].cap -= &f;
                let rev = self.adj[u][k].rev;
                self.adj[v][rev].cap += &f;
                v = u;
            }
            total += f;
        }
    }
}

/// Decides `μ L(R) ν` by a maximum flow over capacities scaled to integers.
/// Returns a witnessing weighting when the lifting holds.
pub fn lift_check<T: Ord + Clone>(
    r: &BinaryRelation<T>,
    mu: &Distribution<T>,
    nu: &Distribution<T>,
) -> Result<Option<WeightingFunction<T>>, RelationError> {
    if mu.support().any(|x| !r.left().contains(x)) {
        return Err(RelationError::UniverseMismatch("support of μ outside the left universe".into()));
    }
    if nu.support().any(|y| !r.right().contains(y)) {
        return Err(RelationError::UniverseMismatch("support of ν outside the right universe".into()));
    }
    if mu.mass() != nu.mass() {
        return Ok(None);
    }
    let scale = mu
        .iter()
        .chain(nu.iter())
        .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    let int = |p: &Rational| (p * Rational::from_integer(scale.clone())).to_integer();

    let xs: Vec<(&T, &Rational)> = mu.iter().collect();
    let ys: Vec<(&T, &Rational)> = nu.iter().collect();
    let source = 0;
    let sink = 1 + xs.len() + ys.len();
    let mut g = FlowGraph::new(sink + 1);
    for (i, (_, p)) in xs.iter().enumerate() {
        g.add_edge(source, 1 + i, int(p));
    }
    let total = int(&mu.mass());
    let mut middle = Vec::new();
    for (i, (x, _)) in xs.iter().enumerate() {
        for (j, (y, _)) in ys.iter().enumerate() {
            if r.contains(x, y) {
                let k = g.add_edge(1 + i, 1 + xs.len() + j, total.clone());
                middle.push((i, j, k));
            }
        }
    }
    for (j, (_, p)) in ys.iter().enumerate() {
        g.add_edge(1 + xs.len() + j, sink, int(p));
    }
    if g.max_flow(source, sink) != total {
        return Ok(None);
    }
    let mut entries = BTreeMap::new();
    for (i, j, k) in middle {
        let used = &total - &g.adj[1 + i][k].cap;
        if used.is_positive() {
            entries.insert(
                (xs[i].0.clone(), ys[j].0.clone()),
                Rational::new(used, scale.clone()),
            );
        }
    }
    Ok(Some(WeightingFunction { entries }))
}
