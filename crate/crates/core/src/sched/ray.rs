use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::chain::build_chain;
use super::{DeterminateScheduler, SchedError, Stage};
use crate::model::{Cpa, Rational, StateId};

/// Expected cost by enumerating every finite fragment `α` ending in a stop:
/// `Σ_α c_σ(α) · cone(α) · σ(α)(⊥)`. Steps sharing action and target state
/// are merged into one fragment step, and their costs are averaged with the
/// normalized weights `σ(tr) · ρ_tr(t) / Σ_tr' σ(tr') · ρ_tr'(t)`.
pub fn ray_cost_acyclic(sched: &DeterminateScheduler, start: StateId, cpa: &Cpa) -> Result<Rational, SchedError> {
    let chain = match build_chain(sched, start, cpa) {
        Err(SchedError::NonTerminating) => return Err(SchedError::CyclicModel),
        other => other?,
    };
    if has_cycle(&chain.succ) {
        return Err(SchedError::CyclicModel);
    }
    let mut total = Rational::zero();
    let mut stack = vec![((start, Stage::PreAction), Rational::one(), Rational::zero())];
    while let Some(((s, stage), cone, cost)) = stack.pop() {
        let choice = sched.choice(s, stage);
        if !choice.stop.is_zero() {
            total += &cone * &choice.stop * &cost;
        }
        // (action, target) -> (mass, weighted cost, next stage)
        let mut steps: BTreeMap<(&str, StateId), (Rational, Rational, Stage)> = BTreeMap::new();
        for (&tr, p) in &choice.transitions {
            let t = cpa.transition(tr);
            let next = sched.next_stage(cpa, stage, tr).expect("validated");
            for (&v, q) in t.target.iter() {
                let w = p * q;
                let entry = steps
                    .entry((t.action.as_str(), v))
                    .or_insert_with(|| (Rational::zero(), Rational::zero(), next));
                entry.1 += &w * &t.cost;
                entry.0 += w;
            }
        }
        for ((_, v), (mass, weighted, next)) in steps {
            if mass.is_zero() {
                continue;
            }
            let step_cost = weighted / &mass;
            stack.push(((v, next), &cone * &mass, &cost + step_cost));
        }
    }
    Ok(total)
}

fn has_cycle(succ: &[Vec<(usize, Rational)>]) -> bool {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; succ.len()];
    for root in 0..succ.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some((k, i)) = stack.pop() {
            if i < succ[k].len() {
                stack.push((k, i + 1));
                let j = succ[k][i].0;
                match state[j] {
                    1 => return true,
                    0 => {
                        state[j] = 1;
                        stack.push((j, 0));
                    }
                    _ => {}
                }
            } else {
                state[k] = 2;
            }
        }
    }
    false
}
