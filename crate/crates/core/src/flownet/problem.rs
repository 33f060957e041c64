use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{One, Zero};

use super::{FlowError, FlowNetwork, Vertex};
use crate::lp::{self, LpOutcome, StandardFormLp};
use crate::model::{Cpa, Distribution, Rational, StateId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpVariable {
    /// Flow on a network edge.
    Edge(Vertex, Vertex),
    /// Weight `p_i` of the i-th candidate transition, by transition index.
    Weight(usize),
    /// Weighting entry `f_{u,v}`.
    Pair(StateId, StateId),
    Slack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, Rational)>,
    pub kind: ConstraintKind,
    pub rhs: Rational,
}

/// How a cost constraint compares the defender's cost with a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostBound {
    Equal,
    AtMost,
}

/// A linear program over nonnegative variables. Without an objective it
/// is a pure feasibility problem.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub variables: Vec<LpVariable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Option<Vec<(usize, Rational)>>,
    /// Linear form of the defender's cost, used by cost constraints.
    pub cost_terms: Vec<(usize, Rational)>,
    /// Variables that may be fixed to zero without loss of generality.
    pub zero_hints: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Infeasible,
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub assignment: Vec<Rational>,
    /// Objective value; zero for feasibility problems.
    pub value: Option<Rational>,
}

impl LpSolution {
    pub fn is_feasible(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LpProblem {
    pub(super) fn new(variables: Vec<LpVariable>) -> Self {
        LpProblem {
            variables,
            constraints: Vec::new(),
            objective: None,
            cost_terms: Vec::new(),
            zero_hints: Vec::new(),
        }
    }

    pub(super) fn push(&mut self, terms: Vec<(usize, Rational)>, kind: ConstraintKind, rhs: Rational) {
        self.constraints.push(LinearConstraint { terms, kind, rhs });
    }

    /// Exact check of every constraint and of nonnegativity.
    pub fn check_assignment(&self, x: &[Rational]) -> bool {
        x.len() == self.variables.len()
            && x.iter().all(|v| *v >= Rational::zero())
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.terms.iter().map(|(j, a)| a * &x[*j]).sum();
                match c.kind {
                    ConstraintKind::Eq => lhs == c.rhs,
                    ConstraintKind::Le => lhs <= c.rhs,
                }
            })
    }

    pub fn cost_of(&self, x: &[Rational]) -> Rational {
        self.cost_terms.iter().map(|(j, c)| c * &x[*j]).sum()
    }
}

/// `L(t, a, μ, R)`: conservation, balancing, unit inflow and the demands
/// `f_{u_R,▼} = μ(u)`.
pub fn build_feasibility_lp(net: &FlowNetwork) -> LpProblem {
    let variables = net.edges().map(|(a, b)| LpVariable::Edge(a, b)).collect();
    let mut lp = LpProblem::new(variables);
    let one = Rational::one();
    let src = Vertex::Source;
    let unit = net.edge_id(&src, &Vertex::State(net.anchor)).expect("source edge exists");
    lp.push(vec![(unit, one.clone())], ConstraintKind::Eq, one.clone());

    let mut inflow: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut outflow: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, &(a, b)) in net.edges.iter().enumerate() {
        outflow.entry(a).or_default().push(e);
        inflow.entry(b).or_default().push(e);
    }
    for (i, v) in net.vertices().iter().enumerate() {
        if let Vertex::Rel(u) = v {
            let demand = net.mu.prob(u);
            match net.edge_id(v, &Vertex::Sink) {
                Some(e) => lp.push(vec![(e, one.clone())], ConstraintKind::Eq, demand),
                None if demand.is_zero() => {}
                None => lp.push(Vec::new(), ConstraintKind::Eq, demand),
            }
        }
        if matches!(v, Vertex::Source | Vertex::Sink) {
            continue;
        }
        let ins = inflow.get(&i).map(Vec::as_slice).unwrap_or(&[]);
        let outs = outflow.get(&i).map(Vec::as_slice).unwrap_or(&[]);
        if ins.is_empty() && outs.is_empty() {
            continue;
        }
        let mut terms: Vec<(usize, Rational)> = ins.iter().map(|&e| (e, one.clone())).collect();
        terms.extend(outs.iter().map(|&e| (e, -one.clone())));
        lp.push(terms, ConstraintKind::Eq, Rational::zero());
    }
    for b in net.balances() {
        lp.push(
            vec![(b.out_edge, one.clone()), (b.in_edge, -b.ratio.clone())],
            ConstraintKind::Eq,
            Rational::zero(),
        );
    }
    lp.cost_terms = (0..net.num_edges())
        .filter(|&e| !net.edge_cost(e).is_zero())
        .map(|e| (e, net.edge_cost(e).clone()))
        .collect();
    lp.zero_hints = net.dead_edges();
    lp
}

/// The feasibility LP with objective `Σ c_f · f`.
pub fn build_mincost_lp(net: &FlowNetwork) -> LpProblem {
    let mut lp = build_feasibility_lp(net);
    lp.objective = Some(lp.cost_terms.clone());
    lp
}

/// Adds `cost = bound` or `cost ≤ bound`, the latter through a slack
/// variable so that the problem stays in equality form.
pub fn add_cost_constraint(lp: &mut LpProblem, bound: &Rational, mode: CostBound) {
    let mut terms = lp.cost_terms.clone();
    if mode == CostBound::AtMost {
        lp.variables.push(LpVariable::Slack);
        terms.push((lp.variables.len() - 1, Rational::one()));
    }
    lp.push(terms, ConstraintKind::Eq, bound.clone());
}

/// Solves `lp` exactly. Unbounded problems are reported as errors since
/// every problem built here has a nonnegative objective.
pub fn solve(lp: &LpProblem) -> Result<LpSolution, FlowError> {
    let mut std = StandardFormLp::new(lp.variables.len());
    for c in &lp.constraints {
        let mut terms = c.terms.clone();
        if c.kind == ConstraintKind::Le {
            std.num_vars += 1;
            std.objective.push(Rational::zero());
            terms.push((std.num_vars - 1, Rational::one()));
        }
        std.add_row(terms, c.rhs.clone());
    }
    if let Some(obj) = &lp.objective {
        for (j, c) in obj {
            std.objective[*j] += c;
        }
    }
    match lp::solve_with_zero_hints(&std, &lp.zero_hints)? {
        LpOutcome::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            assignment: Vec::new(),
            value: None,
        }),
        LpOutcome::Unbounded => Err(FlowError::Unbounded),
        LpOutcome::Optimal { value, mut assignment } => {
            assignment.truncate(lp.variables.len());
            Ok(LpSolution {
                status: LpStatus::Optimal,
                assignment,
                value: Some(value),
            })
        }
    }
}

pub fn solve_feasibility(net: &FlowNetwork) -> Result<LpSolution, FlowError> {
    solve(&build_feasibility_lp(net))
}

pub fn solve_mincost(net: &FlowNetwork) -> Result<LpSolution, FlowError> {
    solve(&build_mincost_lp(net))
}

impl FlowNetwork {
    /// Total flow entering vertex `v` under `x`.
    pub fn inflow(&self, v: &Vertex, x: &[Rational]) -> Rational {
        let Some(i) = self.vertex_index(v) else {
            return Rational::zero();
        };
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(_, b))| b == i)
            .map(|(e, _)| x[e].clone())
            .sum()
    }

    /// Where the flow stops: `v ↦ Σ_u f_{v,u_R}`, read at the last stage.
    pub fn reached_distribution(&self, x: &[Rational]) -> Distribution {
        let mut pairs = Vec::new();
        for (e, (a, b)) in self.edges().enumerate() {
            if let (Vertex::State(v) | Vertex::Post(v), Vertex::Rel(_)) = (a, b) {
                pairs.push((v, x[e].clone()));
            }
        }
        Distribution::from_pairs(pairs).expect("flow values are nonnegative and of unit mass")
    }
}

/// Plain-text dump: variable legend, objective, then one constraint per
/// line. Rationals are written `a/b`.
pub fn dump_lp(lp: &LpProblem, cpa: &Cpa) -> String {
    let mut out = String::new();
    for (j, v) in lp.variables.iter().enumerate() {
        let desc = match v {
            LpVariable::Edge(a, b) => format!("f({},{})", a.label(cpa), b.label(cpa)),
            LpVariable::Weight(i) => format!("p(tr{i})"),
            LpVariable::Pair(u, v) => format!("f({},{})", cpa.state_name(*u), cpa.state_name(*v)),
            LpVariable::Slack => "slack".to_string(),
        };
        let _ = writeln!(out, "var x{j} {desc}");
    }
    let linear = |terms: &[(usize, Rational)]| -> String {
        if terms.is_empty() {
            return "0".to_string();
        }
        terms
            .iter()
            .map(|(j, a)| format!("{a} x{j}"))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    match &lp.objective {
        Some(obj) => {
            let _ = writeln!(out, "minimize {}", linear(obj));
        }
        None => {
            let _ = writeln!(out, "feasibility");
        }
    }
    for c in &lp.constraints {
        let op = match c.kind {
            ConstraintKind::Eq => "=",
            ConstraintKind::Le => "<=",
        };
        let _ = writeln!(out, "{} {op} {}", linear(&c.terms), c.rhs);
    }
    let _ = writeln!(out, "all x >= 0");
    out
}
