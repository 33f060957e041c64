//! Cost probabilistic automata and the distributions they are built from.

mod distribution;
mod mdp;
mod parse;
mod union;

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use thiserror::Error;

pub use distribution::Distribution;
pub(crate) use mdp::check_mdp;
pub use mdp::{mdp_expected_total_reward, Fragment, MdpPolicy};
pub use parse::{parse_model, parse_rational, serialize_model, ParsedModel};
pub use union::{disjoint_union, DisjointUnion, Side};

/// Exact rational number used for every probability and cost.
pub type Rational = num_rational::BigRational;

/// Index of a state in its automaton's declaration order.
pub type StateId = usize;

/// Token reserved for the silent label of weak transitions.
pub const TAU: &str = "tau";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Validation {
        line: Option<usize>,
        message: String,
    },
    #[error("invalid weights: {0}")]
    Weight(String),
    #[error("transitions do not share source and action")]
    MixedTransitions,
    #[error("not an MDP: {0}")]
    NotAnMdp(String),
    #[error("alphabet clash: {0}")]
    AlphabetClash(String),
}

impl ModelError {
    pub(crate) fn validation(message: impl Into<String>) -> Self {
        ModelError::Validation {
            line: None,
            message: message.into(),
        }
    }
}

/// Partition of the action alphabet into visible and hidden actions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet {
    pub external: Vec<String>,
    pub internal: Vec<String>,
}

impl Alphabet {
    pub fn new(external: Vec<String>, internal: Vec<String>) -> Self {
        Alphabet { external, internal }
    }

    pub fn is_external(&self, action: &str) -> bool {
        self.external.iter().any(|a| a == action)
    }

    pub fn is_internal(&self, action: &str) -> bool {
        self.internal.iter().any(|a| a == action)
    }

    pub fn contains(&self, action: &str) -> bool {
        self.is_external(action) || self.is_internal(action)
    }

    pub fn actions(&self) -> impl Iterator<Item = &String> {
        self.external.iter().chain(self.internal.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub action: String,
    pub target: Distribution,
    pub cost: Rational,
}

/// A cost probabilistic automaton.
///
/// States are identified by their index in `states`; transitions keep
/// declaration order, which every algorithm in this crate iterates in.
#[derive(Debug, Clone)]
pub struct Cpa {
    pub name: String,
    states: Vec<String>,
    start: StateId,
    alphabet: Alphabet,
    transitions: Vec<Transition>,
    index: HashMap<String, StateId>,
    outgoing: Vec<Vec<usize>>,
}

impl PartialEq for Cpa {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.start == other.start
            && self.alphabet == other.alphabet
            && self.transitions == other.transitions
    }
}

impl Cpa {
    /// Builds an automaton, checking ids, alphabet, masses and costs.
    /// Reachability is not enforced here; see [`Cpa::prune_unreachable`].
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        start: StateId,
        alphabet: Alphabet,
        transitions: Vec<Transition>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            check_state_id(s).map_err(ModelError::validation)?;
            if index.insert(s.clone(), i).is_some() {
                return Err(ModelError::validation(format!("duplicate state `{s}`")));
            }
        }
        if start >= states.len() {
            return Err(ModelError::validation("start state out of range"));
        }
        let mut seen = BTreeSet::new();
        for a in alphabet.actions() {
            check_action_id(a).map_err(ModelError::validation)?;
            if !seen.insert(a.clone()) {
                return Err(ModelError::validation(format!(
                    "action `{a}` declared twice"
                )));
            }
        }
        let mut outgoing = vec![Vec::new(); states.len()];
        for (i, tr) in transitions.iter().enumerate() {
            if tr.source >= states.len() {
                return Err(ModelError::validation("transition source out of range"));
            }
            if !alphabet.contains(&tr.action) {
                return Err(ModelError::validation(format!(
                    "undeclared action `{}`",
                    tr.action
                )));
            }
            if tr.cost < Rational::zero() {
                return Err(ModelError::validation(format!(
                    "negative cost {} on transition from `{}`",
                    tr.cost, states[tr.source]
                )));
            }
            if let Some(&s) = tr.target.support().find(|&&s| s >= states.len()) {
                return Err(ModelError::validation(format!("target state {s} out of range")));
            }
            if !tr.target.is_full() {
                return Err(ModelError::validation(format!(
                    "target of transition from `{}` has mass {}",
                    states[tr.source],
                    tr.target.mass()
                )));
            }
            outgoing[tr.source].push(i);
        }
        Ok(Cpa {
            name: name.into(),
            states,
            start,
            alphabet,
            transitions,
            index,
            outgoing,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, i: usize) -> &Transition {
        &self.transitions[i]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    /// Indices of the transitions leaving `s`, in declaration order.
    pub fn outgoing(&self, s: StateId) -> &[usize] {
        &self.outgoing[s]
    }

    pub fn is_internal(&self, action: &str) -> bool {
        self.alphabet.is_internal(action)
    }

    /// States reachable from the start state, as a membership vector.
    pub fn reachable(&self) -> Vec<bool> {
        self.reachable_from(&[self.start])
    }

    pub fn reachable_from(&self, roots: &[StateId]) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for &r in roots {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &i in &self.outgoing[s] {
                for &t in self.transitions[i].target.support() {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    /// Removes states unreachable from the start state. Returns the pruned
    /// automaton and the names of removed states.
    pub fn prune_unreachable(self) -> (Cpa, Vec<String>) {
        let keep = self.reachable();
        if keep.iter().all(|&k| k) {
            return (self, Vec::new());
        }
        let mut remap = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        let mut removed = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            if keep[i] {
                remap[i] = states.len();
                states.push(s.clone());
            } else {
                removed.push(s.clone());
            }
        }
        let transitions = self
            .transitions
            .into_iter()
            .filter(|tr| keep[tr.source])
            .map(|tr| Transition {
                source: remap[tr.source],
                target: tr.target.map_states(|s| remap[*s]),
                action: tr.action,
                cost: tr.cost,
            })
            .collect();
        let cpa = Cpa::new(
            self.name,
            states,
            remap[self.start],
            self.alphabet,
            transitions,
        )
        .expect("pruning preserves validity");
        (cpa, removed)
    }

    /// Cost of the combined transition `Σ w_i · tr_i`. All transitions must
    /// leave `t` with the same action.
    pub fn strong_combined_cost(
        &self,
        t: StateId,
        weights: &[(usize, Rational)],
    ) -> Result<Rational, ModelError> {
        let mut action: Option<&str> = None;
        let mut total = Rational::zero();
        let mut mass = Rational::zero();
        for (i, w) in weights {
            let tr = self
                .transitions
                .get(*i)
                .ok_or_else(|| ModelError::Weight(format!("no transition {i}")))?;
            if tr.source != t || action.is_some_and(|a| a != tr.action) {
                return Err(ModelError::MixedTransitions);
            }
            action = Some(&tr.action);
            if *w < Rational::zero() {
                return Err(ModelError::Weight("negative weight".into()));
            }
            total += w * &tr.cost;
            mass += w;
        }
        if !mass.is_one() {
            return Err(ModelError::Weight(format!("weights sum to {mass}")));
        }
        Ok(total)
    }

    /// The combined target `Σ w_i · μ_i` of transitions leaving `t`.
    pub fn strong_combined_target(
        &self,
        t: StateId,
        weights: &[(usize, Rational)],
    ) -> Result<Distribution, ModelError> {
        self.strong_combined_cost(t, weights)?;
        let parts: Vec<(Rational, Distribution)> = weights
            .iter()
            .map(|(i, w)| (w.clone(), self.transitions[*i].target.clone()))
            .collect();
        Distribution::convex_combine(&parts)
    }
}

fn check_common(id: &str, what: &str) -> Result<(), String> {
    if id.is_empty() {
        return Err(format!("empty {what} id"));
    }
    if let Some(c) = id
        .chars()
        .find(|c| c.is_whitespace() || matches!(c, ':' | '#' | '\\'))
    {
        return Err(format!("{what} id `{id}` contains `{c}`"));
    }
    Ok(())
}

/// State ids may contain commas only inside parentheses, so that composed
/// names `(l,r)` stay unambiguous.
pub(crate) fn check_state_id(id: &str) -> Result<(), String> {
    check_common(id, "state")?;
    let mut depth = 0i64;
    for c in id.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(format!("state id `{id}` has unbalanced parentheses"));
                }
            }
            ',' if depth == 0 => {
                return Err(format!("state id `{id}` contains a bare comma"));
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(format!("state id `{id}` has unbalanced parentheses"));
    }
    Ok(())
}

pub(crate) fn check_action_id(id: &str) -> Result<(), String> {
    check_common(id, "action")?;
    if id == TAU {
        return Err("`tau` is reserved and cannot be declared as an action".into());
    }
    if let Some(c) = id.chars().find(|c| matches!(c, ',' | '(' | ')')) {
        return Err(format!("action id `{id}` contains `{c}`"));
    }
    Ok(())
}
