//! Reward-accumulating MDP policies as schedulers of an unfolded automaton.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{DeterminateScheduler, Stage, StageChoice};
use crate::flownet::WeakLabel;
use crate::model::{check_mdp, Alphabet, Cpa, Distribution, Fragment, MdpPolicy, ModelError, Rational, StateId, Transition};

/// Unfolds `m` into a tree whose states are the fragments of length at most
/// `policy.horizon` with positive probability under the policy. Every
/// action becomes internal. The returned scheduler follows the policy
/// strictly below the horizon and stops on it, so its expected cost is the
/// expected total reward of the policy.
pub fn embed_mdp_policy(m: &Cpa, policy: &MdpPolicy) -> Result<(Cpa, DeterminateScheduler, StateId), ModelError> {
    check_mdp(m)?;
    let mut frags: Vec<Fragment> = vec![Fragment::initial(m.start())];
    let mut transitions = Vec::new();
    let mut picks: Vec<(StateId, BTreeMap<usize, Rational>)> = Vec::new();
    let mut k = 0;
    while k < frags.len() {
        let frag = frags[k].clone();
        if frag.len() < policy.horizon {
            let s = frag.last();
            if m.outgoing(s).is_empty() {
                return Err(ModelError::NotAnMdp(format!("deadlock in state `{}`", m.state_name(s))));
            }
            let pick = policy.choice.get(&frag).ok_or_else(|| {
                ModelError::Weight(format!("policy undefined on a fragment of length {}", frag.len()))
            })?;
            let mut choice = BTreeMap::new();
            for (a, pa) in pick {
                if pa.is_zero() {
                    continue;
                }
                let tr = m
                    .outgoing(s)
                    .iter()
                    .map(|&i| m.transition(i))
                    .find(|tr| tr.action == *a)
                    .ok_or_else(|| ModelError::Weight(format!("action `{a}` not enabled in `{}`", m.state_name(s))))?;
                let mut target = Vec::new();
                for (&t, p) in tr.target.iter() {
                    frags.push(frag.extend(a, t));
                    target.push((frags.len() - 1, p.clone()));
                }
                choice.insert(transitions.len(), pa.clone());
                transitions.push(Transition {
                    source: k,
                    action: a.clone(),
                    target: Distribution::from_pairs(target)?,
                    cost: tr.cost.clone(),
                });
            }
            picks.push((k, choice));
        }
        k += 1;
    }
    let names = (0..frags.len()).map(|i| format!("f{i}")).collect();
    let actions = m.alphabet().actions().cloned().collect();
    let tree = Cpa::new(format!("{}_unfolded", m.name), names, 0, Alphabet::new(Vec::new(), actions), transitions)?;
    let mut sched = DeterminateScheduler::new(WeakLabel::Tau);
    for (s, choice) in picks {
        let mass: Rational = choice.values().sum();
        if mass != Rational::from_integer(1.into()) {
            return Err(ModelError::Weight(format!("policy mass {mass} at fragment state `f{s}`")));
        }
        sched.set(s, Stage::PreAction, StageChoice { transitions: choice, stop: Rational::zero() });
    }
    Ok((tree, sched, 0))
}
