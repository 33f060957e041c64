//! The Markov chain a determinate scheduler induces on `(state, stage)`
//! nodes, solved exactly one strongly connected component at a time.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::{DeterminateScheduler, SchedError, Stage};
use crate::linalg;
use crate::model::{Cpa, Distribution, Rational, StateId};

type Node = (StateId, Stage);

/// Reachable part of the induced chain.
pub(super) struct Chain {
    pub nodes: Vec<Node>,
    pub succ: Vec<Vec<(usize, Rational)>>,
    pub stop: Vec<Rational>,
    pub step_cost: Vec<Rational>,
}

pub(super) fn build_chain(sched: &DeterminateScheduler, start: StateId, cpa: &Cpa) -> Result<Chain, SchedError> {
    sched.validate(cpa)?;
    let mut ids: HashMap<Node, usize> = HashMap::new();
    let mut chain = Chain {
        nodes: Vec::new(),
        succ: Vec::new(),
        stop: Vec::new(),
        step_cost: Vec::new(),
    };
    let mut queue = VecDeque::new();
    let root = (start, Stage::PreAction);
    ids.insert(root, 0);
    chain.nodes.push(root);
    queue.push_back(0);
    while let Some(k) = queue.pop_front() {
        let (s, stage) = chain.nodes[k];
        let c = sched.choice(s, stage);
        if !c.stop.is_zero() && stage != sched.final_stage() {
            return Err(SchedError::WrongTrace(sched.label.to_string()));
        }
        let mut succ: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut cost = Rational::zero();
        for (&tr, p) in &c.transitions {
            if p.is_zero() {
                continue;
            }
            let next = sched.next_stage(cpa, stage, tr).expect("validated");
            let t = cpa.transition(tr);
            cost += p * &t.cost;
            for (&v, q) in t.target.iter() {
                let node = (v, next);
                let id = *ids.entry(node).or_insert_with(|| {
                    chain.nodes.push(node);
                    queue.push_back(chain.nodes.len() - 1);
                    chain.nodes.len() - 1
                });
                *succ.entry(id).or_insert_with(Rational::zero) += p * q;
            }
        }
        chain.succ.push(succ.into_iter().collect());
        chain.stop.push(c.stop);
        chain.step_cost.push(cost);
    }
    // Every reachable node must be able to reach a node that stops.
    let n = chain.nodes.len();
    let mut pred = vec![Vec::new(); n];
    for (k, out) in chain.succ.iter().enumerate() {
        for (j, _) in out {
            pred[*j].push(k);
        }
    }
    let mut live = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&k| !chain.stop[k].is_zero()).collect();
    for &k in &queue {
        live[k] = true;
    }
    while let Some(k) = queue.pop_front() {
        for &j in &pred[k] {
            if !live[j] {
                live[j] = true;
                queue.push_back(j);
            }
        }
    }
    if live.iter().any(|l| !l) {
        return Err(SchedError::NonTerminating);
    }
    Ok(chain)
}

impl Chain {
    /// Solves `x = b + M x` where `M` is the transition matrix (`forward`
    /// false) or its transpose (`forward` true).
    fn solve(&self, b: &[Rational], forward: bool) -> Vec<Rational> {
        let n = self.nodes.len();
        let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
        for _ in 0..n {
            graph.add_node(());
        }
        // x_k depends on x_j through coefficient m[k][j].
        let mut deps: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for (k, out) in self.succ.iter().enumerate() {
            for (j, p) in out {
                if forward {
                    deps[*j].push((k, p.clone()));
                } else {
                    deps[k].push((*j, p.clone()));
                }
            }
        }
        for (k, ds) in deps.iter().enumerate() {
            for (j, _) in ds {
                graph.add_edge((k as u32).into(), (*j as u32).into(), ());
            }
        }
        // Tarjan lists components with dependencies first.
        let mut x: Vec<Option<Rational>> = vec![None; n];
        for comp in tarjan_scc(&graph) {
            let members: Vec<usize> = comp.iter().map(|v| v.index()).collect();
            let pos: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &k)| (k, i)).collect();
            let m = members.len();
            let mut a = vec![vec![Rational::zero(); m]; m];
            let mut rhs = vec![Rational::zero(); m];
            for (i, &k) in members.iter().enumerate() {
                a[i][i] = Rational::one();
                rhs[i] = b[k].clone();
                for (j, p) in &deps[k] {
                    match pos.get(j) {
                        Some(&jj) => a[i][jj] -= p,
                        None => rhs[i] += p * x[*j].as_ref().expect("dependency solved earlier"),
                    }
                }
            }
            let sol = linalg::solve(a, rhs).expect("terminating chains have a unique solution");
            for (i, &k) in members.iter().enumerate() {
                x[k] = Some(sol[i].clone());
            }
        }
        x.into_iter().map(|v| v.expect("every node solved")).collect()
    }
}

/// Distribution where the scheduled run stops, its expected cost and the
/// expected number of visits to each `(state, stage)` node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSummary {
    pub target: Distribution,
    pub cost: Rational,
    pub visits: BTreeMap<(StateId, Stage), Rational>,
}

pub fn analyze(sched: &DeterminateScheduler, start: StateId, cpa: &Cpa) -> Result<ChainSummary, SchedError> {
    let chain = build_chain(sched, start, cpa)?;
    let n = chain.nodes.len();
    let mut e0 = vec![Rational::zero(); n];
    e0[0] = Rational::one();
    let visits = chain.solve(&e0, true);
    let expected = chain.solve(&chain.step_cost, false);
    let mut pairs = Vec::new();
    let mut total = Rational::zero();
    for k in 0..n {
        let m = &visits[k] * &chain.stop[k];
        total += &m;
        pairs.push((chain.nodes[k].0, m));
    }
    if !total.is_one() {
        return Err(SchedError::NonTerminating);
    }
    let target = Distribution::from_pairs(pairs).expect("stop masses form a distribution");
    let visits = chain.nodes.iter().copied().zip(visits).collect();
    Ok(ChainSummary {
        target,
        cost: expected[0].clone(),
        visits,
    })
}

/// Distribution over states where the weak transition ends.
pub fn scheduler_target(sched: &DeterminateScheduler, start: StateId, cpa: &Cpa) -> Result<Distribution, SchedError> {
    analyze(sched, start, cpa).map(|s| s.target)
}

/// Expected total cost `E(n) = Σ_tr σ(n)(tr) · (c(tr) + Σ_v ρ(v) · E(v, stage'))`.
pub fn scheduler_cost(sched: &DeterminateScheduler, start: StateId, cpa: &Cpa) -> Result<Rational, SchedError> {
    let chain = build_chain(sched, start, cpa)?;
    Ok(chain.solve(&chain.step_cost, false)[0].clone())
}
