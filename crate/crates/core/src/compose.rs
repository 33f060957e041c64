//! Parallel composition of cost probabilistic automata.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{parse_rational, Alphabet, Cpa, Distribution, ModelError, Rational, StateId, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("automata are not compatible: {0}")]
    Incompatible(String),
    #[error("unknown cost generator `{0}` (expected sum or scaled-sum:<rational>)")]
    UnknownGenerator(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Combines the costs of the two sides of a composed step. Implementations
/// must be symmetric, map `(0, 0)` to `0`, distribute over convex
/// combinations and be strictly monotone in each argument.
pub trait CostGenerator {
    fn combine(&self, x: &Rational, y: &Rational) -> Rational;
}

/// Built-in generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorFunction {
    /// `x + y`
    Sum,
    /// `k · (x + y)` for `k > 0`
    ScaledSum(Rational),
}

impl CostGenerator for GeneratorFunction {
    fn combine(&self, x: &Rational, y: &Rational) -> Rational {
        match self {
            GeneratorFunction::Sum => x + y,
            GeneratorFunction::ScaledSum(k) => k * (x + y),
        }
    }
}

impl std::str::FromStr for GeneratorFunction {
    type Err = ComposeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "sum" {
            return Ok(GeneratorFunction::Sum);
        }
        if let Some(k) = s.strip_prefix("scaled-sum:") {
            let k = parse_rational(k).map_err(|_| ComposeError::UnknownGenerator(s.into()))?;
            if !k.is_positive() {
                return Err(ComposeError::UnknownGenerator(s.into()));
            }
            return Ok(GeneratorFunction::ScaledSum(k));
        }
        Err(ComposeError::UnknownGenerator(s.into()))
    }
}

impl fmt::Display for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorFunction::Sum => write!(f, "sum"),
            GeneratorFunction::ScaledSum(k) => write!(f, "scaled-sum:{k}"),
        }
    }
}

/// Requires `Σ1 ∩ H2 = ∅ = H1 ∩ Σ2`: no action of one side is hidden in
/// the other.
pub fn check_compatible(a1: &Cpa, a2: &Cpa) -> Result<(), ComposeError> {
    for a in a1.alphabet().actions() {
        if a2.is_internal(a) {
            return Err(ComposeError::Incompatible(format!(
                "`{a}` of `{}` is internal to `{}`",
                a1.name, a2.name
            )));
        }
    }
    for a in a2.alphabet().actions() {
        if a1.is_internal(a) {
            return Err(ComposeError::Incompatible(format!(
                "`{a}` of `{}` is internal to `{}`",
                a2.name, a1.name
            )));
        }
    }
    Ok(())
}

/// `A1 ∥_g A2`: shared actions synchronize with cost `g(c1, c2)`, all other
/// actions interleave with cost `g(c, 0)`. Only states reachable from the
/// pair of start states are kept; they are named `(<left>,<right>)`.
pub fn compose_cpa(a1: &Cpa, a2: &Cpa, g: &dyn CostGenerator) -> Result<Cpa, ComposeError> {
    check_compatible(a1, a2)?;
    let shared = |a: &str| a1.alphabet().contains(a) && a2.alphabet().contains(a);
    let zero = Rational::zero();

    let mut ids: HashMap<(StateId, StateId), StateId> = HashMap::from([((a1.start(), a2.start()), 0)]);
    let mut pairs: Vec<(StateId, StateId)> = vec![(a1.start(), a2.start())];
    let mut queue = VecDeque::from([0]);
    let mut transitions = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (s1, s2) = pairs[id];
        let mut steps: Vec<(&str, Distribution<(StateId, StateId)>, Rational)> = Vec::new();
        for &i in a1.outgoing(s1) {
            let t1 = a1.transition(i);
            if shared(&t1.action) {
                for &j in a2.outgoing(s2) {
                    let t2 = a2.transition(j);
                    if t2.action == t1.action {
                        steps.push((&t1.action, t1.target.product(&t2.target), g.combine(&t1.cost, &t2.cost)));
                    }
                }
            } else {
                let target = t1.target.product(&Distribution::dirac(s2));
                steps.push((&t1.action, target, g.combine(&t1.cost, &zero)));
            }
        }
        for &j in a2.outgoing(s2) {
            let t2 = a2.transition(j);
            if !shared(&t2.action) {
                let target = Distribution::dirac(s1).product(&t2.target);
                steps.push((&t2.action, target, g.combine(&zero, &t2.cost)));
            }
        }
        for (action, target, cost) in steps {
            let mut weights = Vec::with_capacity(target.len());
            for (p, w) in target.iter() {
                let next = *ids.entry(*p).or_insert_with(|| {
                    pairs.push(*p);
                    queue.push_back(pairs.len() - 1);
                    pairs.len() - 1
                });
                weights.push((next, w.clone()));
            }
            transitions.push(Transition {
                source: id,
                action: action.to_string(),
                target: Distribution::from_pairs(weights)?,
                cost,
            });
        }
    }

    let mut alphabet = a1.alphabet().clone();
    for a in &a2.alphabet().external {
        if !alphabet.is_external(a) {
            alphabet.external.push(a.clone());
        }
    }
    alphabet.internal.extend(a2.alphabet().internal.iter().cloned());
    let names = pairs
        .iter()
        .map(|&(x, y)| format!("({},{})", a1.state_name(x), a2.state_name(y)))
        .collect();
    let name = format!("{}_{}", a1.name, a2.name);
    Ok(Cpa::new(name, names, 0, Alphabet::new(alphabet.external, alphabet.internal), transitions)?)
}
