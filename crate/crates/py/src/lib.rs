//! Python bindings. Models are passed as text in the model file format,
//! rationals as strings like `"3/4"`.

use std::collections::BTreeMap;

use cpa_core::bisim::{decide, quotient, CostMode, RelationKind};
use cpa_core::compose::{compose_cpa, GeneratorFunction};
use cpa_core::flownet::{build_network, solve_mincost, WeakLabel};
use cpa_core::model::{disjoint_union, parse_model, parse_rational, serialize_model, Cpa, Distribution, TAU};
use cpa_core::relations::{parse_relation, BinaryRelation};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

/// Errors of the bindings, before conversion to Python exceptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Bad model text or arguments; raised as `ValueError`.
    Input(String),
    /// A failure inside the solvers; raised as `RuntimeError`.
    Internal(String),
}

impl From<Error> for PyErr {
    fn from(e: Error) -> PyErr {
        match e {
            Error::Input(m) => PyValueError::new_err(m),
            Error::Internal(m) => PyRuntimeError::new_err(m),
        }
    }
}

fn input<E: ToString>(e: E) -> Error {
    Error::Input(e.to_string())
}

fn internal<E: ToString>(e: E) -> Error {
    Error::Internal(e.to_string())
}

fn load(text: &str) -> Result<Cpa, Error> {
    parse_model(text).map(|p| p.cpa).map_err(input)
}

/// Verdict of `relation` with `cost` between two models as a JSON document.
pub fn check_json(a: &str, b: &str, relation: &str, cost: &str) -> Result<String, Error> {
    let kind: RelationKind = relation.parse().map_err(Error::Input)?;
    let mode: CostMode = cost.parse().map_err(Error::Input)?;
    let (a, b) = (load(a)?, load(b)?);
    disjoint_union(&a, &b).map_err(input)?;
    let v = decide(kind, mode, &a, &b).map_err(internal)?;
    Ok(v.to_json().to_string())
}

/// Minimal cost of a weak transition, or `None` when no scheduler reaches
/// a distribution related to `target`.
pub fn min_cost(
    model: &str,
    source: &str,
    action: &str,
    target: &BTreeMap<String, String>,
    relation: Option<&str>,
) -> Result<Option<String>, Error> {
    let cpa = load(model)?;
    let from = cpa.state_id(source).ok_or_else(|| Error::Input(format!("unknown state `{source}`")))?;
    let label = if action == TAU || cpa.alphabet().is_internal(action) {
        WeakLabel::Tau
    } else if cpa.alphabet().is_external(action) {
        WeakLabel::Action(action.to_string())
    } else {
        return Err(Error::Input(format!("unknown action `{action}`")));
    };
    let mut pairs = Vec::new();
    for (name, p) in target {
        let s = cpa.state_id(name).ok_or_else(|| Error::Input(format!("unknown state `{name}`")))?;
        pairs.push((s, parse_rational(p).map_err(input)?));
    }
    let mu = Distribution::from_pairs(pairs).map_err(input)?;
    if !mu.is_full() {
        return Err(Error::Input(format!("target has mass {}, expected 1", mu.mass())));
    }
    let r = match relation {
        Some(text) => parse_relation(text, &cpa).map_err(input)?.into_relation(),
        None => BinaryRelation::identity(0..cpa.num_states()),
    };
    let net = build_network(&cpa, from, &label, &mu, &r).map_err(internal)?;
    let sol = solve_mincost(&net).map_err(internal)?;
    Ok(sol.value.as_ref().filter(|_| sol.is_feasible()).map(|v| v.to_string()))
}

/// Classes of the coarsest weak probabilistic bisimulation, over the union
/// when a second model is given.
pub fn quotient_classes(a: &str, b: Option<&str>) -> Result<Vec<Vec<String>>, Error> {
    let a = load(a)?;
    let cpa = match b {
        Some(b) => disjoint_union(&a, &load(b)?).map_err(input)?.cpa,
        None => a,
    };
    let w = quotient(&cpa).map_err(internal)?;
    Ok(w.classes()
        .iter()
        .map(|c| c.iter().map(|s| cpa.state_name(*s).to_string()).collect())
        .collect())
}

/// Parallel composition in the model file format.
pub fn compose_text(a: &str, b: &str, generator: &str) -> Result<String, Error> {
    let g: GeneratorFunction = generator.parse().map_err(input)?;
    let ab = compose_cpa(&load(a)?, &load(b)?, &g).map_err(input)?;
    Ok(serialize_model(&ab))
}

#[pymodule]
mod cpa_py {
    use std::collections::BTreeMap;

    use pyo3::prelude::*;

    /// Decides a relation between two models; returns the verdict as a dict.
    #[pyfunction]
    #[pyo3(signature = (a, b, relation = "weak-prob", cost = "none"))]
    fn check<'py>(py: Python<'py>, a: &str, b: &str, relation: &str, cost: &str) -> PyResult<Bound<'py, PyAny>> {
        let text = super::check_json(a, b, relation, cost)?;
        py.import("json")?.call_method1("loads", (text,))
    }

    /// Exact minimal cost as a string like `"100/3"`, or None if infeasible.
    #[pyfunction]
    #[pyo3(signature = (model, source, action, target, relation = None))]
    fn min_cost(
        model: &str,
        source: &str,
        action: &str,
        target: BTreeMap<String, String>,
        relation: Option<&str>,
    ) -> PyResult<Option<String>> {
        Ok(super::min_cost(model, source, action, &target, relation)?)
    }

    /// Bisimulation classes as lists of state names.
    #[pyfunction]
    #[pyo3(signature = (a, b = None))]
    fn quotient(a: &str, b: Option<&str>) -> PyResult<Vec<Vec<String>>> {
        Ok(super::quotient_classes(a, b)?)
    }

    /// Parallel composition of two models, as model text.
    #[pyfunction]
    #[pyo3(signature = (a, b, generator = "sum"))]
    fn compose(a: &str, b: &str, generator: &str) -> PyResult<String> {
        Ok(super::compose_text(a, b, generator)?)
    }
}
