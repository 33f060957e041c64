//! Re-checks a claimed witness directly against the step conditions,
//! without the caches and shortcuts of the decision procedures.

use std::collections::BTreeSet;

use super::minor::{border_extension, check_strong_pair, check_weak_pair};
use super::quotient::Stats;
use super::{border_states, BisimError, CostMode, RelationKind, Verdict};
use crate::flownet::{
    add_cost_constraint, build_feasibility_lp, build_network, build_strongprob_lp, solve, CostBound, FlowError,
    WeakLabel,
};
use crate::model::{disjoint_union, Cpa, StateId};
use crate::relations::{lift_check, BinaryRelation};

/// Whether `t` matches transition `tr` up to the equivalence `w`.
fn step_holds(cpa: &Cpa, kind: RelationKind, preserving: bool, tr: usize, t: StateId, w: &BinaryRelation) -> Result<bool, BisimError> {
    let trn = cpa.transition(tr);
    let bound = preserving.then_some((&trn.cost, CostBound::Equal));
    match kind {
        RelationKind::Strong => Ok(cpa.outgoing(t).iter().map(|&i| cpa.transition(i)).any(|d| {
            d.action == trn.action
                && (!preserving || d.cost == trn.cost)
                && matches!(lift_check(w, &trn.target, &d.target), Ok(Some(_)))
        })),
        RelationKind::StrongProb => match build_strongprob_lp(cpa, t, &trn.action, &trn.target, w, bound) {
            Err(FlowError::NoSuchTransitions) => Ok(false),
            Err(e) => Err(e.into()),
            Ok(lp) => Ok(solve(&lp)?.is_feasible()),
        },
        RelationKind::WeakProb => {
            let label = WeakLabel::of(cpa.alphabet(), &trn.action);
            let net = build_network(cpa, t, &label, &trn.target, w)?;
            let mut lp = build_feasibility_lp(&net);
            if let Some((c, mode)) = bound {
                add_cost_constraint(&mut lp, c, mode);
            }
            Ok(solve(&lp)?.is_feasible())
        }
    }
}

fn verify(verdict: &Verdict, a1: &Cpa, a2: &Cpa) -> Result<bool, BisimError> {
    let union = disjoint_union(a1, a2)?;
    let cpa = &union.cpa;
    let w = &verdict.partition;
    if cpa.states() != verdict.union.cpa.states() || !w.universe().eq(0..cpa.num_states()) {
        return Ok(false);
    }
    let wrel = w.as_relation();
    let preserving = verdict.mode == CostMode::Preserving;
    for (tr, trn) in cpa.transitions().iter().enumerate() {
        for &t in w.class_members(trn.source) {
            if t != trn.source && !step_holds(cpa, verdict.kind, preserving, tr, t, &wrel)? {
                return Ok(false);
            }
        }
    }
    let (start1, start2) = union.starts;
    if verdict.mode != CostMode::Minor {
        return Ok(w.same_class(start1, start2));
    }
    let Some(rc) = &verdict.cost_relation else {
        return Ok(false);
    };
    let s1_states: BTreeSet<StateId> = union.left_states().collect();
    let s2_states: BTreeSet<StateId> = union.right_states().collect();
    if rc.left() != &s2_states || rc.right() != &s1_states || !rc.pairs().all(|(x, y)| w.same_class(*x, *y)) {
        return Ok(false);
    }
    if !rc.contains(&start2, &start1) {
        return Ok(false);
    }
    let stats = Stats::default();
    if verdict.kind == RelationKind::WeakProb {
        if s2_states.iter().any(|s2| rc.image(s2).is_empty()) {
            return Ok(false);
        }
        let border = border_states(cpa, w);
        let b1: BTreeSet<StateId> = border.intersection(&s1_states).copied().collect();
        let b2: BTreeSet<StateId> = border.intersection(&s2_states).copied().collect();
        for (tr, trn) in cpa.transitions().iter().enumerate() {
            let partners = rc.image(&trn.source);
            if partners.is_empty() {
                continue;
            }
            let ext = border_extension(cpa, &trn.target, &b2, &stats)?;
            for s1 in partners {
                if !check_weak_pair(cpa, tr, s1, &ext, rc, &b1, &s1_states, &stats, false)?.passed {
                    return Ok(false);
                }
            }
        }
    } else {
        for (tr, trn) in cpa.transitions().iter().enumerate() {
            for s1 in rc.image(&trn.source) {
                if !check_strong_pair(cpa, verdict.kind, tr, s1, rc, &s1_states, &stats)?.passed {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Re-validates the relations of a verdict that holds against `a1` and
/// `a2`. Verdicts that do not hold, and checks that fail to run, yield
/// `false`.
pub fn verify_witness(verdict: &Verdict, a1: &Cpa, a2: &Cpa) -> bool {
    verdict.holds && verify(verdict, a1, a2).unwrap_or(false)
}
