//! Minor-cost relations: a plain bisimulation `W` together with a cost
//! relation `R_c ⊆ W ∩ (S2 × S1)` pruned until every pair satisfies the
//! cost-bounded step condition.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use super::quotient::{quotient_with, Stats};
use super::{border_states, BisimError, CostMode, Diagnostic, MinorStep, RelationKind, Verdict};
use crate::flownet::{
    build_hyper_instance, build_network, build_strongprob_lp, solve, solve_mincost, CostBound, FlowError, WeakLabel,
};
use crate::model::{disjoint_union, Cpa, DisjointUnion, Distribution, Rational, StateId};
use crate::relations::{lift_check, BinaryRelation, Partition};

/// `W ∩ (S2 × S1)` with S2 the right operand.
pub(super) fn initial_cost_relation(union: &DisjointUnion, w: &Partition) -> BinaryRelation {
    let mut rc = BinaryRelation::empty(union.right_states(), union.left_states());
    for s2 in union.right_states() {
        for &s1 in w.class_members(s2) {
            if s1 < union.left_len {
                rc.insert(s2, s1).expect("pair within the universes");
            }
        }
    }
    rc
}

/// `r` restricted to left elements in `support` and right elements in
/// `right`, with exactly those universes.
pub(super) fn restrict(r: &BinaryRelation, support: &Distribution, right: &BTreeSet<StateId>) -> BinaryRelation {
    let mut out = BinaryRelation::empty(support.support().copied(), right.iter().copied());
    for &u in support.support() {
        for v in r.image(&u) {
            if right.contains(&v) {
                out.insert(u, v).expect("pair within the universes");
            }
        }
    }
    out
}

/// Cheapest way to extend a challenger target to a distribution over the
/// border states `b2`, with that distribution.
pub(super) fn border_extension(
    cpa: &Cpa,
    mu: &Distribution,
    b2: &BTreeSet<StateId>,
    stats: &Stats,
) -> Result<Option<(Rational, Distribution)>, BisimError> {
    let Some(&b) = b2.iter().next() else {
        return Ok(None);
    };
    if mu.support().all(|s| b2.contains(s)) {
        return Ok(Some((Rational::zero(), mu.clone())));
    }
    let (hyper, h) = build_hyper_instance(cpa, mu);
    let rel = BinaryRelation::from_pairs([b], b2.iter().copied(), b2.iter().map(|&v| (b, v)))
        .expect("pairs within the universes");
    let net = build_network(&hyper, h, &WeakLabel::Tau, &Distribution::dirac(b), &rel)?;
    stats.count_lp();
    let sol = solve_mincost(&net)?;
    Ok(match sol.value {
        Some(v) => Some((v, net.reached_distribution(&sol.assignment))),
        None => None,
    })
}

/// Checks `s1` against challenger transition `tr` of the weak minor-cost
/// relation, given the challenger's border extension.
pub(super) fn check_weak_pair(
    cpa: &Cpa,
    tr: usize,
    s1: StateId,
    extension: &Option<(Rational, Distribution)>,
    rc: &BinaryRelation,
    b1: &BTreeSet<StateId>,
    s1_states: &BTreeSet<StateId>,
    stats: &Stats,
    shortcuts: bool,
) -> Result<MinorStep, BisimError> {
    let trn = cpa.transition(tr);
    let label = WeakLabel::of(cpa.alphabet(), &trn.action);
    let (condition, border_cost, target, bound, right) = match extension {
        Some((c, g)) => (1, Some(c.clone()), g, &trn.cost + c, b1),
        None => (2, None, &trn.target, trn.cost.clone(), s1_states),
    };
    let rel = restrict(rc, target, right);
    let mut step = MinorStep {
        transition: tr,
        defender: s1,
        condition,
        border_cost,
        bound: bound.clone(),
        defender_cost: None,
        passed: false,
    };
    if target.support().any(|u| rel.image(u).is_empty()) {
        return Ok(step);
    }
    if shortcuts {
        let lifts = |nu: &Distribution| nu.support().all(|v| right.contains(v)) && matches!(lift_check(&rel, target, nu), Ok(Some(_)));
        if label == WeakLabel::Tau && lifts(&Distribution::dirac(s1)) {
            step.defender_cost = Some(Rational::zero());
            step.passed = true;
            return Ok(step);
        }
        let direct = cpa.outgoing(s1).iter().map(|&i| cpa.transition(i)).any(|d| {
            WeakLabel::of(cpa.alphabet(), &d.action) == label && d.cost <= bound && lifts(&d.target)
        });
        if direct {
            step.passed = true;
            return Ok(step);
        }
    }
    let net = build_network(cpa, s1, &label, target, &rel)?;
    stats.count_lp();
    let sol = solve_mincost(&net)?;
    step.passed = sol.value.as_ref().is_some_and(|v| *v <= bound);
    step.defender_cost = sol.value;
    Ok(step)
}

/// Checks `s1` against challenger transition `tr` of the strong minor-cost
/// relations.
pub(super) fn check_strong_pair(
    cpa: &Cpa,
    kind: RelationKind,
    tr: usize,
    s1: StateId,
    rc: &BinaryRelation,
    s1_states: &BTreeSet<StateId>,
    stats: &Stats,
) -> Result<MinorStep, BisimError> {
    let trn = cpa.transition(tr);
    let rel = restrict(rc, &trn.target, s1_states);
    let mut step = MinorStep {
        transition: tr,
        defender: s1,
        condition: 0,
        border_cost: None,
        bound: trn.cost.clone(),
        defender_cost: None,
        passed: false,
    };
    let single = cpa.outgoing(s1).iter().map(|&i| cpa.transition(i)).any(|d| {
        d.action == trn.action && d.cost <= trn.cost && matches!(lift_check(&rel, &trn.target, &d.target), Ok(Some(_)))
    });
    step.passed = match kind {
        RelationKind::Strong => single,
        _ if single => true,
        _ => match build_strongprob_lp(cpa, s1, &trn.action, &trn.target, &rel, Some((&trn.cost, CostBound::AtMost))) {
            Err(FlowError::NoSuchTransitions) => false,
            Err(e) => return Err(e.into()),
            Ok(lp) => {
                stats.count_lp();
                solve(&lp)?.is_feasible()
            }
        },
    };
    Ok(step)
}

/// Prunes `rc` until every pair passes `check` for every challenger
/// transition of its S2 state. A passed pair is rechecked only when the
/// part of the relation returned by `deps` has changed.
fn prune(
    union: &DisjointUnion,
    rc: &mut BinaryRelation,
    diagnostics: &mut Vec<Diagnostic>,
    removed: &mut Vec<(StateId, StateId)>,
    mut deps: impl FnMut(usize, &BinaryRelation) -> Result<Vec<(StateId, StateId)>, BisimError>,
    mut check: impl FnMut(usize, StateId, &BinaryRelation) -> Result<MinorStep, BisimError>,
) -> Result<Vec<MinorStep>, BisimError> {
    let cpa = &union.cpa;
    let mut steps: BTreeMap<(usize, StateId), MinorStep> = BTreeMap::new();
    let mut passed: HashMap<(usize, StateId), Vec<(StateId, StateId)>> = HashMap::new();
    loop {
        let mut changed = false;
        for (tr, trn) in cpa.transitions().iter().enumerate() {
            if trn.source < union.left_len {
                continue;
            }
            let s2 = trn.source;
            let partners = rc.image(&s2);
            if partners.is_empty() {
                continue;
            }
            let used = deps(tr, rc)?;
            for s1 in partners {
                if passed.get(&(tr, s1)) == Some(&used) {
                    continue;
                }
                let step = check(tr, s1, rc)?;
                if step.passed {
                    passed.insert((tr, s1), used.clone());
                } else {
                    rc.remove(&s2, &s1);
                    removed.push((s2, s1));
                    diagnostics.push(Diagnostic {
                        transition: tr,
                        defender: s1,
                        reason: match step.condition {
                            1 => format!("no border match within cost {}", step.bound),
                            2 => format!("no match within cost {}", step.bound),
                            _ => format!("no strong match within cost {}", step.bound),
                        },
                    });
                    changed = true;
                }
                steps.insert((tr, s1), step);
            }
        }
        if !changed {
            return Ok(steps.into_values().collect());
        }
    }
}

/// Decides `cheap ⪅ expensive` for minor cost weak probabilistic
/// bisimilarity. Challengers come from `expensive` (S2), defenders from
/// `cheap` (S1).
pub fn decide_minor_weak(cheap: &Cpa, expensive: &Cpa) -> Result<Verdict, BisimError> {
    let union = disjoint_union(cheap, expensive)?;
    let stats = Stats::default();
    let (w, mut diagnostics) = quotient_with(&union.cpa, RelationKind::WeakProb, CostMode::Plain, &stats)?;
    let mut rc = initial_cost_relation(&union, &w);
    let (start1, start2) = union.starts;
    let mut removed = Vec::new();
    let mut steps = Vec::new();
    let related = w.same_class(start1, start2);
    if related {
        let cpa = &union.cpa;
        let border = border_states(cpa, &w);
        let b1: BTreeSet<StateId> = border.iter().copied().filter(|&s| s < union.left_len).collect();
        let b2: BTreeSet<StateId> = border.iter().copied().filter(|&s| s >= union.left_len).collect();
        let s1_states: BTreeSet<StateId> = union.left_states().collect();
        let mut extensions = Vec::with_capacity(cpa.transitions().len());
        for tr in cpa.transitions() {
            extensions.push(if tr.source >= union.left_len {
                border_extension(cpa, &tr.target, &b2, &stats)?
            } else {
                None
            });
        }
        let deps = |tr: usize, rc: &BinaryRelation| {
            let (target, right) = match &extensions[tr] {
                Some((_, g)) => (g, &b1),
                None => (&cpa.transition(tr).target, &s1_states),
            };
            Ok(restrict(rc, target, right).pairs().copied().collect())
        };
        let check =
            |tr: usize, s1: StateId, rc: &BinaryRelation| check_weak_pair(cpa, tr, s1, &extensions[tr], rc, &b1, &s1_states, &stats, true);
        steps = prune(&union, &mut rc, &mut diagnostics, &mut removed, deps, check)?;
    }
    let total = union.right_states().all(|s2| !rc.image(&s2).is_empty());
    let holds = related && rc.contains(&start2, &start1) && total;
    Ok(Verdict {
        kind: RelationKind::WeakProb,
        mode: CostMode::Minor,
        holds,
        union,
        partition: w,
        cost_relation: Some(rc),
        diagnostics,
        removed_pairs: removed,
        steps,
        lp_solved: stats.lps(),
    })
}

/// Minor-cost strong or strong probabilistic bisimilarity, `cheap` being
/// the defender side.
pub(super) fn decide_minor_strong(kind: RelationKind, cheap: &Cpa, expensive: &Cpa) -> Result<Verdict, BisimError> {
    let union = disjoint_union(cheap, expensive)?;
    let stats = Stats::default();
    let (w, mut diagnostics) = quotient_with(&union.cpa, kind, CostMode::Plain, &stats)?;
    let mut rc = initial_cost_relation(&union, &w);
    let (start1, start2) = union.starts;
    let mut removed = Vec::new();
    let mut steps = Vec::new();
    let related = w.same_class(start1, start2);
    if related {
        let cpa = &union.cpa;
        let s1_states: BTreeSet<StateId> = union.left_states().collect();
        let deps = |tr: usize, rc: &BinaryRelation| {
            Ok(restrict(rc, &cpa.transition(tr).target, &s1_states).pairs().copied().collect())
        };
        let check = |tr: usize, s1: StateId, rc: &BinaryRelation| check_strong_pair(cpa, kind, tr, s1, rc, &s1_states, &stats);
        steps = prune(&union, &mut rc, &mut diagnostics, &mut removed, deps, check)?;
    }
    let holds = related && rc.contains(&start2, &start1);
    Ok(Verdict {
        kind,
        mode: CostMode::Minor,
        holds,
        union,
        partition: w,
        cost_relation: Some(rc),
        diagnostics,
        removed_pairs: removed,
        steps,
        lp_solved: stats.lps(),
    })
}
