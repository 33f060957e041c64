//! Flow networks whose feasible flows correspond to weak combined
//! transitions, and the linear programs built over them.
//!
//! For a state `t`, a label `a` (or τ), a distribution `μ` and a relation
//! `R`, the network routes one unit of flow from the source through `t`,
//! along internal transitions (stage before `a`), at most one `a`
//! transition, more internal transitions (stage after `a`), and finally into
//! relation vertices `u_R` that drain `μ(u)` each. An edge `(v, u_R)` exists
//! when `u R v`, so a feasible flow proves `μ L(R) ν` for the distribution
//! `ν` of states where flow stops.

mod problem;
mod strongprob;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::lp::LpError;
use crate::model::{Alphabet, Cpa, Distribution, Rational, StateId, Transition, TAU};
use crate::relations::BinaryRelation;

pub use problem::{
    add_cost_constraint, build_feasibility_lp, build_mincost_lp, dump_lp, solve, solve_feasibility, solve_mincost,
    ConstraintKind, CostBound, LinearConstraint, LpProblem, LpSolution, LpStatus, LpVariable,
};
pub use strongprob::build_strongprob_lp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("`{0}` is not an external action")]
    NotExternal(String),
    #[error("no transition from the state carries the action")]
    NoSuchTransitions,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Label of a weak transition: τ or a visible action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeakLabel {
    Tau,
    Action(String),
}

impl WeakLabel {
    /// τ for internal actions, the action itself otherwise.
    pub fn of(alphabet: &Alphabet, action: &str) -> WeakLabel {
        if alphabet.is_internal(action) {
            WeakLabel::Tau
        } else {
            WeakLabel::Action(action.to_string())
        }
    }

    pub fn parse(text: &str) -> WeakLabel {
        if text == TAU {
            WeakLabel::Tau
        } else {
            WeakLabel::Action(text.to_string())
        }
    }
}

impl fmt::Display for WeakLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeakLabel::Tau => write!(f, "{TAU}"),
            WeakLabel::Action(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Source,
    Sink,
    /// `v`: state before the visible action.
    State(StateId),
    /// `v^tr`: internal transition taken before the visible action.
    Trans(StateId, usize),
    /// `v_a`: state after the visible action.
    Post(StateId),
    /// `v^tr_a`: the visible transition itself, or an internal one after it.
    PostTrans(StateId, usize),
    /// `u_R`: collects flow for `μ(u)`.
    Rel(StateId),
}

impl Vertex {
    pub fn label(&self, cpa: &Cpa) -> String {
        match *self {
            Vertex::Source => "src".into(),
            Vertex::Sink => "sink".into(),
            Vertex::State(v) => cpa.state_name(v).into(),
            Vertex::Trans(v, tr) => format!("{}^tr{tr}", cpa.state_name(v)),
            Vertex::Post(v) => format!("{}_a", cpa.state_name(v)),
            Vertex::PostTrans(v, tr) => format!("{}^tr{tr}_a", cpa.state_name(v)),
            Vertex::Rel(u) => format!("{}_R", cpa.state_name(u)),
        }
    }
}

/// `f_out = ρ · f_in` for an edge leaving a transition vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Balance {
    pub out_edge: usize,
    pub in_edge: usize,
    pub ratio: Rational,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub anchor: StateId,
    pub label: WeakLabel,
    pub mu: Distribution,
    pub relation: BinaryRelation,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    balances: Vec<Balance>,
    /// `c_f`: transition cost on edges that enter a transition vertex.
    costs: Vec<Rational>,
    /// Transition entered by each edge, when it is a cost-carrying edge.
    entered: Vec<Option<usize>>,
}

impl FlowNetwork {
    fn add_vertex(&mut self, v: Vertex) {
        self.index.insert(v, self.vertices.len());
        self.vertices.push(v);
    }

    fn add_edge(&mut self, from: Vertex, to: Vertex) -> usize {
        let key = (self.index[&from], self.index[&to]);
        if let Some(&e) = self.edge_index.get(&key) {
            return e;
        }
        let e = self.edges.len();
        self.edges.push(key);
        self.edge_index.insert(key, e);
        self.costs.push(Rational::from_integer(0.into()));
        self.entered.push(None);
        e
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.vertices[a], self.vertices[b]))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (Vertex, Vertex) {
        let (a, b) = self.edges[e];
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_id(&self, from: &Vertex, to: &Vertex) -> Option<usize> {
        let key = (self.vertex_index(from)?, self.vertex_index(to)?);
        self.edge_index.get(&key).copied()
    }

    pub fn balances(&self) -> &[Balance] {
        &self.balances
    }

    pub fn edge_cost(&self, e: usize) -> &Rational {
        &self.costs[e]
    }

    /// The transition whose vertex edge `e` enters, for cost-carrying edges.
    pub fn entered_transition(&self, e: usize) -> Option<usize> {
        self.entered[e]
    }

    /// Edges whose tail is unreachable from the source or whose head cannot
    /// reach the sink. Flow on them is a detached circulation, so they can be
    /// set to zero without affecting feasibility or lowering optimality.
    pub fn dead_edges(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut fwd = vec![Vec::new(); n];
        let mut bwd = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            fwd[a].push(b);
            bwd[b].push(a);
        }
        let sweep = |adj: &Vec<Vec<usize>>, root: usize| {
            let mut seen = vec![false; n];
            seen[root] = true;
            let mut q = VecDeque::from([root]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        q.push_back(y);
                    }
                }
            }
            seen
        };
        let from_src = sweep(&fwd, self.index[&Vertex::Source]);
        let to_sink = sweep(&bwd, self.index[&Vertex::Sink]);
        (0..self.edges.len())
            .filter(|&e| {
                let (a, b) = self.edges[e];
                !from_src[a] || !to_sink[b]
            })
            .collect()
    }
}

fn is_internal_tr(cpa: &Cpa, tr: &Transition) -> bool {
    cpa.is_internal(&tr.action)
}

/// Builds `N(t, a, μ, R)`. The left universe of `r` must contain the support
/// of `μ`; its right side ranges over the states where flow may stop.
pub fn build_network(
    cpa: &Cpa,
    t: StateId,
    label: &WeakLabel,
    mu: &Distribution,
    r: &BinaryRelation,
) -> Result<FlowNetwork, FlowError> {
    let n = cpa.num_states();
    if t >= n {
        return Err(FlowError::UniverseMismatch(format!("state {t} out of range")));
    }
    if mu.support().any(|u| !r.left().contains(u)) {
        return Err(FlowError::UniverseMismatch("support of μ outside the relation's left universe".into()));
    }
    if r.left().iter().chain(r.right()).any(|&s| s >= n) {
        return Err(FlowError::UniverseMismatch("relation mentions unknown states".into()));
    }
    let visible = match label {
        WeakLabel::Tau => None,
        WeakLabel::Action(a) => {
            if !cpa.alphabet().is_external(a) {
                return Err(FlowError::NotExternal(a.clone()));
            }
            Some(a.as_str())
        }
    };
    let mut net = FlowNetwork {
        anchor: t,
        label: label.clone(),
        mu: mu.clone(),
        relation: r.clone(),
        vertices: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
        edge_index: HashMap::new(),
        balances: Vec::new(),
        costs: Vec::new(),
        entered: Vec::new(),
    };
    let trs = cpa.transitions();
    let internal: Vec<usize> = (0..trs.len()).filter(|&i| is_internal_tr(cpa, &trs[i])).collect();
    let labelled: Vec<usize> = match visible {
        Some(a) => (0..trs.len()).filter(|&i| trs[i].action == a).collect(),
        None => Vec::new(),
    };

    net.add_vertex(Vertex::Source);
    net.add_vertex(Vertex::Sink);
    for v in 0..n {
        net.add_vertex(Vertex::State(v));
    }
    let mut pre: Vec<usize> = internal.iter().chain(&labelled).copied().collect();
    pre.sort_unstable();
    for &i in &pre {
        net.add_vertex(Vertex::Trans(trs[i].source, i));
    }
    if visible.is_some() {
        for v in 0..n {
            net.add_vertex(Vertex::Post(v));
        }
        for &i in &pre {
            net.add_vertex(Vertex::PostTrans(trs[i].source, i));
        }
    }
    for u in 0..n {
        net.add_vertex(Vertex::Rel(u));
    }

    net.add_edge(Vertex::Source, Vertex::State(t));
    let balance = |net: &mut FlowNetwork, from: Vertex, via: Vertex, i: usize, to: fn(StateId) -> Vertex| {
        let tr = &trs[i];
        let e_in = net.add_edge(from, via);
        net.costs[e_in] = tr.cost.clone();
        net.entered[e_in] = Some(i);
        for (&v2, p) in tr.target.iter() {
            let e_out = net.add_edge(via, to(v2));
            net.balances.push(Balance {
                out_edge: e_out,
                in_edge: e_in,
                ratio: p.clone(),
            });
        }
    };
    for &i in &internal {
        let v = trs[i].source;
        balance(&mut net, Vertex::State(v), Vertex::Trans(v, i), i, Vertex::State);
    }
    if visible.is_some() {
        for &i in &labelled {
            let v = trs[i].source;
            balance(&mut net, Vertex::State(v), Vertex::PostTrans(v, i), i, Vertex::Post);
        }
        for &i in &internal {
            let v = trs[i].source;
            balance(&mut net, Vertex::Post(v), Vertex::PostTrans(v, i), i, Vertex::Post);
        }
    }
    let stop = |v| if visible.is_some() { Vertex::Post(v) } else { Vertex::State(v) };
    for (&u, vs) in &r.images() {
        for &v in vs {
            net.add_edge(stop(v), Vertex::Rel(u));
        }
        net.add_edge(Vertex::Rel(u), Vertex::Sink);
    }
    Ok(net)
}

/// Adds a fresh state `h` with a zero-cost internal transition to `mu`, so
/// that weak transitions from `mu` become weak transitions from `h`.
pub fn build_hyper_instance(cpa: &Cpa, mu: &Distribution) -> (Cpa, StateId) {
    let mut states = cpa.states().to_vec();
    let mut name = "hyper".to_string();
    while cpa.state_id(&name).is_some() {
        name.push('_');
    }
    let h = states.len();
    states.push(name);
    let mut alphabet = cpa.alphabet().clone();
    let mut action = "hyper".to_string();
    while alphabet.contains(&action) {
        action.push('_');
    }
    alphabet.internal.push(action.clone());
    let mut transitions = cpa.transitions().to_vec();
    transitions.push(Transition {
        source: h,
        action,
        target: mu.clone(),
        cost: Rational::from_integer(0.into()),
    });
    let hyper = Cpa::new(cpa.name.clone(), states, cpa.start(), alphabet, transitions)
        .expect("adding a fresh state keeps the automaton valid");
    (hyper, h)
}
