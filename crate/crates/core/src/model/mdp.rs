//! Markov decision processes with rewards, viewed as automata where every
//! state enables each action at most once and costs act as rewards.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{Cpa, ModelError, Rational, StateId};

/// A finite execution fragment `s0 a0 s1 ... sn`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fragment {
    pub states: Vec<StateId>,
    pub actions: Vec<String>,
}

impl Fragment {
    pub fn initial(s: StateId) -> Self {
        Fragment {
            states: vec![s],
            actions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> StateId {
        *self.states.last().expect("fragments are never empty")
    }

    pub fn extend(&self, action: &str, s: StateId) -> Fragment {
        let mut f = self.clone();
        f.actions.push(action.to_string());
        f.states.push(s);
        f
    }
}

/// History-dependent randomized policy for a fixed horizon.
#[derive(Debug, Clone)]
pub struct MdpPolicy {
    pub horizon: usize,
    pub choice: BTreeMap<Fragment, BTreeMap<String, Rational>>,
}

impl MdpPolicy {
    /// Tabulates `f` on every fragment shorter than the horizon that is
    /// reachable in `m` from its start state.
    pub fn from_fn(
        m: &Cpa,
        horizon: usize,
        f: impl Fn(&Fragment) -> BTreeMap<String, Rational>,
    ) -> Self {
        let mut choice = BTreeMap::new();
        let mut stack = vec![Fragment::initial(m.start())];
        while let Some(frag) = stack.pop() {
            if frag.len() >= horizon {
                continue;
            }
            let pick = f(&frag);
            for a in pick.keys() {
                if let Some(&i) = m.outgoing(frag.last()).iter().find(|&&i| m.transition(i).action == *a) {
                    for &s in m.transition(i).target.support() {
                        stack.push(frag.extend(a, s));
                    }
                }
            }
            choice.insert(frag, pick);
        }
        MdpPolicy { horizon, choice }
    }
}

/// Checks that `m` has at most one transition per state and action.
pub(crate) fn check_mdp(m: &Cpa) -> Result<(), ModelError> {
    for s in 0..m.num_states() {
        let out = m.outgoing(s);
        for (k, &i) in out.iter().enumerate() {
            if out[..k].iter().any(|&j| m.transition(j).action == m.transition(i).action) {
                return Err(ModelError::NotAnMdp(format!(
                    "state `{}` enables `{}` twice",
                    m.state_name(s),
                    m.transition(i).action
                )));
            }
        }
    }
    Ok(())
}

/// Expected reward accumulated over fragments of exactly `policy.horizon`
/// steps, by enumeration of all such fragments.
pub fn mdp_expected_total_reward(m: &Cpa, policy: &MdpPolicy) -> Result<Rational, ModelError> {
    check_mdp(m)?;
    let mut total = Rational::zero();
    let mut stack = vec![(Fragment::initial(m.start()), Rational::one(), Rational::zero())];
    while let Some((frag, prob, reward)) = stack.pop() {
        if frag.len() == policy.horizon {
            total += prob * reward;
            continue;
        }
        let s = frag.last();
        if m.outgoing(s).is_empty() {
            return Err(ModelError::NotAnMdp(format!("deadlock in state `{}`", m.state_name(s))));
        }
        let pick = policy.choice.get(&frag).ok_or_else(|| {
            ModelError::Weight(format!("policy undefined on a fragment of length {}", frag.len()))
        })?;
        let mass: Rational = pick.values().sum();
        if !mass.is_one() || pick.values().any(|p| *p < Rational::zero()) {
            return Err(ModelError::Weight(format!("policy mass {mass} at fragment of length {}", frag.len())));
        }
        for (a, pa) in pick {
            if pa.is_zero() {
                continue;
            }
            let tr = m
                .outgoing(s)
                .iter()
                .map(|&i| m.transition(i))
                .find(|tr| tr.action == *a)
                .ok_or_else(|| {
                    ModelError::Weight(format!("action `{a}` not enabled in `{}`", m.state_name(s)))
                })?;
            for (&t, p) in tr.target.iter() {
                stack.push((frag.extend(a, t), &prob * pa * p, &reward + &tr.cost));
            }
        }
    }
    Ok(total)
}
