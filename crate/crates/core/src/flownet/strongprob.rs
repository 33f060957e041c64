use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::problem::{ConstraintKind, CostBound, LpProblem, LpVariable};
use super::FlowError;
use crate::model::{Cpa, Distribution, Rational, StateId};
use crate::relations::BinaryRelation;

/// LP deciding whether some convex combination of the `action`
/// transitions of `t` reaches a distribution `ν` with `μ L(W) ν`.
///
/// Variables are the weights `p_i` and weighting entries `f_{u,v}` for
/// `(u, v) ∈ W`; rows for states outside `supp μ` would force their entries
/// to zero and are left out together with those entries. An optional cost
/// constraint compares `Σ p_i · c(tr_i)` with a bound.
pub fn build_strongprob_lp(
    cpa: &Cpa,
    t: StateId,
    action: &str,
    mu: &Distribution,
    w: &BinaryRelation,
    cost: Option<(&Rational, CostBound)>,
) -> Result<LpProblem, FlowError> {
    if mu.support().any(|u| !w.left().contains(u)) {
        return Err(FlowError::UniverseMismatch("support of μ outside the relation's left universe".into()));
    }
    let trs: Vec<usize> = cpa
        .outgoing(t)
        .iter()
        .copied()
        .filter(|&i| cpa.transition(i).action == action)
        .collect();
    if trs.is_empty() {
        return Err(FlowError::NoSuchTransitions);
    }
    let mut variables: Vec<LpVariable> = trs.iter().map(|&i| LpVariable::Weight(i)).collect();
    let mut pair_vars = Vec::new();
    for u in mu.support() {
        for v in w.image(u) {
            pair_vars.push((*u, v));
            variables.push(LpVariable::Pair(*u, v));
        }
    }
    let k = trs.len();
    let mut lp = LpProblem::new(variables);
    let one = Rational::one();
    lp.push((0..k).map(|i| (i, one.clone())).collect(), ConstraintKind::Eq, one.clone());
    for (u, p) in mu.iter() {
        let terms = pair_vars
            .iter()
            .enumerate()
            .filter(|(_, (x, _))| x == u)
            .map(|(j, _)| (k + j, one.clone()))
            .collect();
        lp.push(terms, ConstraintKind::Eq, p.clone());
    }
    let mut targets: BTreeSet<StateId> = pair_vars.iter().map(|(_, v)| *v).collect();
    for &i in &trs {
        targets.extend(cpa.transition(i).target.support().copied());
    }
    for v in targets {
        let mut terms: Vec<(usize, Rational)> = pair_vars
            .iter()
            .enumerate()
            .filter(|(_, (_, y))| *y == v)
            .map(|(j, _)| (k + j, one.clone()))
            .collect();
        for (i, &tr) in trs.iter().enumerate() {
            let p = cpa.transition(tr).target.prob(&v);
            if !p.is_zero() {
                terms.push((i, -p));
            }
        }
        lp.push(terms, ConstraintKind::Eq, Rational::zero());
    }
    lp.cost_terms = trs
        .iter()
        .enumerate()
        .filter(|(_, &tr)| !cpa.transition(tr).cost.is_zero())
        .map(|(i, &tr)| (i, cpa.transition(tr).cost.clone()))
        .collect();
    if let Some((bound, mode)) = cost {
        super::add_cost_constraint(&mut lp, bound, mode);
    }
    Ok(lp)
}
