//! Brute-force reference for minimal weak transition costs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};

use super::{analyze, DeterminateScheduler, SchedError, Stage, StageChoice};
use crate::flownet::WeakLabel;
use crate::lp::{self, LpOutcome, StandardFormLp};
use crate::model::{Cpa, Distribution, Rational, StateId};
use crate::relations::BinaryRelation;

type Node = (StateId, Stage);

/// Outcomes `(target, cost)` of every deterministic determinate scheduler
/// that terminates, moving only in nodes fewer than `depth` steps from the
/// start.
pub fn deterministic_outcomes(
    cpa: &Cpa,
    start: StateId,
    label: &WeakLabel,
    depth: usize,
) -> Result<BTreeSet<(Distribution, Rational)>, SchedError> {
    let mut out = BTreeSet::new();
    let mut assign: BTreeMap<Node, Option<usize>> = BTreeMap::new();
    let probe = DeterminateScheduler::new(label.clone());
    go(cpa, start, &probe, depth, &mut assign, &mut out)?;
    Ok(out)
}

fn go(
    cpa: &Cpa,
    start: StateId,
    probe: &DeterminateScheduler,
    depth: usize,
    assign: &mut BTreeMap<Node, Option<usize>>,
    out: &mut BTreeSet<(Distribution, Rational)>,
) -> Result<(), SchedError> {
    let root = (start, Stage::PreAction);
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([(root, 0usize)]);
    let mut open = None;
    while let Some((node, d)) = queue.pop_front() {
        match assign.get(&node) {
            None => {
                open = Some((node, d));
                break;
            }
            Some(None) => {}
            Some(Some(tr)) => {
                let next = probe.next_stage(cpa, node.1, *tr).expect("only allowed transitions are assigned");
                for &v in cpa.transition(*tr).target.support() {
                    if seen.insert((v, next)) {
                        queue.push_back(((v, next), d + 1));
                    }
                }
            }
        }
    }
    let Some((node, d)) = open else {
        let mut sched = probe.clone();
        for (&(s, stage), choice) in assign.iter() {
            if let Some(tr) = choice {
                sched.set(s, stage, StageChoice::only(*tr));
            }
        }
        match analyze(&sched, start, cpa) {
            Ok(summary) => {
                out.insert((summary.target, summary.cost));
            }
            Err(SchedError::NonTerminating) => {}
            Err(e) => return Err(e),
        }
        return Ok(());
    };
    let mut options: Vec<Option<usize>> = Vec::new();
    if node.1 == probe.final_stage() {
        options.push(None);
    }
    if d < depth {
        for &tr in cpa.outgoing(node.0) {
            if probe.next_stage(cpa, node.1, tr).is_some() {
                options.push(Some(tr));
            }
        }
    }
    for opt in options {
        assign.insert(node, opt);
        go(cpa, start, probe, depth, assign, out)?;
    }
    assign.remove(&node);
    Ok(())
}

/// Minimal cost of a weak transition from `start` with `label` reaching some
/// `ν` with `target L(r) ν`, over convex mixtures of deterministic
/// determinate schedulers. In acyclic models every scheduler is such a
/// mixture; in cyclic ones the result is an upper bound.
pub fn enumerate_min_cost(
    cpa: &Cpa,
    start: StateId,
    label: &WeakLabel,
    target: &Distribution,
    r: &BinaryRelation,
    depth: usize,
) -> Result<Option<Rational>, SchedError> {
    let outcomes: Vec<(Distribution, Rational)> =
        deterministic_outcomes(cpa, start, label, depth)?.into_iter().collect();
    if outcomes.is_empty() {
        return Ok(None);
    }
    let k = outcomes.len();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    for u in target.support() {
        for v in r.image(u) {
            pairs.push((*u, v));
        }
    }
    let mut lp = StandardFormLp::new(k + pairs.len());
    let one = Rational::one();
    lp.add_row((0..k).map(|i| (i, one.clone())).collect(), one.clone());
    for (u, p) in target.iter() {
        let row = pairs.iter().enumerate().filter(|(_, (x, _))| x == u).map(|(j, _)| (k + j, one.clone())).collect();
        lp.add_row(row, p.clone());
    }
    let mut reached: BTreeSet<StateId> = pairs.iter().map(|(_, v)| *v).collect();
    for (nu, _) in &outcomes {
        reached.extend(nu.support().copied());
    }
    for v in reached {
        let mut row: Vec<(usize, Rational)> = pairs
            .iter()
            .enumerate()
            .filter(|(_, (_, y))| *y == v)
            .map(|(j, _)| (k + j, one.clone()))
            .collect();
        for (i, (nu, _)) in outcomes.iter().enumerate() {
            let p = nu.prob(&v);
            if !p.is_zero() {
                row.push((i, -p));
            }
        }
        lp.add_row(row, Rational::zero());
    }
    for (i, (_, c)) in outcomes.iter().enumerate() {
        lp.objective[i] = c.clone();
    }
    match lp::solve(&lp).map_err(crate::flownet::FlowError::from)? {
        LpOutcome::Optimal { value, .. } => Ok(Some(value)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("costs are nonnegative"),
    }
}
