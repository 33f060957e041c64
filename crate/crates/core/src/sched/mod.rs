//! Determinate schedulers: extraction from optimal flows, the distribution
//! and expected cost they induce, and brute-force reference computations.

mod chain;
mod mdp;
mod oracle;
mod ray;

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::flownet::{FlowError, FlowNetwork, LpSolution, LpStatus, Vertex, WeakLabel};
use crate::model::{Cpa, Rational, StateId};

pub use chain::{analyze, scheduler_cost, scheduler_target, ChainSummary};
pub use mdp::embed_mdp_policy;
pub use oracle::{deterministic_outcomes, enumerate_min_cost};
pub use ray::ray_cost_acyclic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchedError {
    #[error("scheduler does not terminate with probability one")]
    NonTerminating,
    #[error("scheduler stops before performing `{0}`")]
    WrongTrace(String),
    #[error("invalid scheduler choice: {0}")]
    InvalidChoice(String),
    #[error("model has a cycle reachable under the scheduler")]
    CyclicModel,
    #[error("flow solution is not feasible")]
    NotOptimal,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Whether the visible action has already been performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    PreAction,
    PostAction,
}

/// Sub-distribution over transition indices plus the probability of stopping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageChoice {
    pub transitions: BTreeMap<usize, Rational>,
    pub stop: Rational,
}

impl StageChoice {
    pub fn stop() -> Self {
        StageChoice {
            transitions: BTreeMap::new(),
            stop: Rational::one(),
        }
    }

    pub fn only(tr: usize) -> Self {
        StageChoice {
            transitions: BTreeMap::from([(tr, Rational::one())]),
            stop: Rational::zero(),
        }
    }
}

/// A scheduler whose choice depends only on the current state and on
/// whether the visible action has occurred. Missing entries stop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminateScheduler {
    pub label: WeakLabel,
    pub choices: BTreeMap<(StateId, Stage), StageChoice>,
}

impl DeterminateScheduler {
    pub fn new(label: WeakLabel) -> Self {
        DeterminateScheduler {
            label,
            choices: BTreeMap::new(),
        }
    }

    pub fn choice(&self, s: StateId, stage: Stage) -> StageChoice {
        self.choices.get(&(s, stage)).cloned().unwrap_or_else(StageChoice::stop)
    }

    pub fn set(&mut self, s: StateId, stage: Stage, choice: StageChoice) {
        self.choices.insert((s, stage), choice);
    }

    /// Stage reached by taking transition `tr` in `stage`, or `None` when
    /// the transition is not allowed there.
    pub fn next_stage(&self, cpa: &Cpa, stage: Stage, tr: usize) -> Option<Stage> {
        let action = &cpa.transition(tr).action;
        if cpa.is_internal(action) {
            return Some(stage);
        }
        match (&self.label, stage) {
            (WeakLabel::Action(a), Stage::PreAction) if a == action => Some(Stage::PostAction),
            _ => None,
        }
    }

    /// Stage in which stopping ends the weak transition correctly.
    pub fn final_stage(&self) -> Stage {
        match self.label {
            WeakLabel::Tau => Stage::PreAction,
            WeakLabel::Action(_) => Stage::PostAction,
        }
    }

    /// Checks masses and that every chosen transition leaves its state with
    /// a label allowed in its stage.
    pub fn validate(&self, cpa: &Cpa) -> Result<(), SchedError> {
        for (&(s, stage), c) in &self.choices {
            let mut mass = c.stop.clone();
            if c.stop.is_negative() {
                return Err(SchedError::InvalidChoice(format!("negative stop mass in `{}`", cpa.state_name(s))));
            }
            for (&tr, p) in &c.transitions {
                if p.is_negative() {
                    return Err(SchedError::InvalidChoice(format!("negative weight on transition {tr}")));
                }
                if tr >= cpa.transitions().len() || cpa.transition(tr).source != s {
                    return Err(SchedError::InvalidChoice(format!(
                        "transition {tr} does not leave `{}`",
                        cpa.state_name(s)
                    )));
                }
                if self.next_stage(cpa, stage, tr).is_none() {
                    return Err(SchedError::InvalidChoice(format!(
                        "transition {tr} is not allowed in stage {stage:?}"
                    )));
                }
                mass += p;
            }
            if !mass.is_one() {
                return Err(SchedError::InvalidChoice(format!(
                    "choice in `{}` has mass {mass}",
                    cpa.state_name(s)
                )));
            }
        }
        Ok(())
    }
}

/// Reads a determinate scheduler off a feasible flow: each outgoing edge of
/// a state vertex is chosen in proportion to its share of the inflow, and
/// flow into relation vertices is the stop probability. States without
/// inflow stop.
pub fn extract_scheduler(net: &FlowNetwork, sol: &LpSolution) -> Result<DeterminateScheduler, SchedError> {
    if sol.status != LpStatus::Optimal {
        return Err(SchedError::NotOptimal);
    }
    let x = &sol.assignment;
    let mut sched = DeterminateScheduler::new(net.label.clone());
    let mut outs: BTreeMap<(StateId, Stage), Vec<(Option<usize>, Rational)>> = BTreeMap::new();
    let mut inflow: BTreeMap<(StateId, Stage), Rational> = BTreeMap::new();
    let key = |v: &Vertex| match *v {
        Vertex::State(s) => Some((s, Stage::PreAction)),
        Vertex::Post(s) => Some((s, Stage::PostAction)),
        _ => None,
    };
    for (e, (a, b)) in net.edges().enumerate() {
        if x[e].is_zero() {
            continue;
        }
        if let Some(k) = key(&b) {
            *inflow.entry(k).or_insert_with(Rational::zero) += &x[e];
        }
        if let Some(k) = key(&a) {
            let tr = match b {
                Vertex::Trans(_, i) | Vertex::PostTrans(_, i) => Some(i),
                _ => None,
            };
            outs.entry(k).or_default().push((tr, x[e].clone()));
        }
    }
    for (k, total) in inflow {
        let mut choice = StageChoice {
            transitions: BTreeMap::new(),
            stop: Rational::zero(),
        };
        for (tr, f) in outs.remove(&k).unwrap_or_default() {
            let share = f / &total;
            match tr {
                Some(i) => {
                    choice.transitions.insert(i, share);
                }
                None => choice.stop += share,
            }
        }
        sched.set(k.0, k.1, choice);
    }
    Ok(sched)
}

/// One line per scheduled node: `(state, stage) -> [tr#:prob ...] stop:prob`.
pub fn format_scheduler(sched: &DeterminateScheduler, cpa: &Cpa) -> String {
    let mut out = String::new();
    for (&(s, stage), c) in &sched.choices {
        let stage = match stage {
            Stage::PreAction => "pre",
            Stage::PostAction => "post",
        };
        let trs: Vec<String> = c.transitions.iter().map(|(tr, p)| format!("{tr}:{p}")).collect();
        out.push_str(&format!("({}, {stage}) -> [{}] stop:{}\n", cpa.state_name(s), trs.join(" "), c.stop));
    }
    out
}
