//! Exact linear programming: minimize `c·x` subject to `A x = b`, `x ≥ 0`.
//!
//! A presolve pass removes fixed and proportionally linked variables, then a
//! dense two-phase primal simplex with Bland's rule solves the rest. Every
//! optimal assignment is substituted back into the original rows before it
//! is returned.

mod presolve;
mod simplex;

use num_traits::Zero;
use thiserror::Error;

use crate::model::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solver self-check failed: {0}")]
    SelfCheck(String),
}

/// `min c·x  s.t.  A x = b, x ≥ 0` with `A` stored as sparse rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StandardFormLp {
    pub num_vars: usize,
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub rhs: Vec<Rational>,
    pub objective: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal {
        value: Rational,
        assignment: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl StandardFormLp {
    pub fn new(num_vars: usize) -> Self {
        StandardFormLp {
            num_vars,
            rows: Vec::new(),
            rhs: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) {
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    fn check_dimensions(&self) -> Result<(), LpError> {
        if self.rows.len() != self.rhs.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        if self.objective.len() != self.num_vars {
            return Err(LpError::DimensionMismatch(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if let Some((j, _)) = row.iter().find(|(j, _)| *j >= self.num_vars) {
                return Err(LpError::DimensionMismatch(format!(
                    "row {r} references variable {j} of {}",
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Checks `A x = b` and `x ≥ 0` exactly.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| *v >= Rational::zero())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| {
                let lhs: Rational = row.iter().map(|(j, a)| a * &x[*j]).sum();
                lhs == *b
            })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &StandardFormLp) -> Result<LpOutcome, LpError> {
    solve_with_zero_hints(lp, &[])
}

/// Like [`solve`], with variables that may be fixed to zero without loss of
/// generality. The caller vouches that some optimal solution (or some
/// feasible one, for a zero objective) sets them to zero.
pub fn solve_with_zero_hints(lp: &StandardFormLp, zero: &[usize]) -> Result<LpOutcome, LpError> {
    lp.check_dimensions()?;
    if let Some(j) = zero.iter().find(|&&j| j >= lp.num_vars) {
        return Err(LpError::DimensionMismatch(format!("hint for variable {j}")));
    }
    let reduced = match presolve::presolve(lp, zero) {
        None => return Ok(LpOutcome::Infeasible),
        Some(r) => r,
    };
    let outcome = simplex::solve_dense(&reduced.rows, &reduced.rhs, &reduced.objective);
    let x = match outcome {
        simplex::Dense::Infeasible => return Ok(LpOutcome::Infeasible),
        simplex::Dense::Unbounded => return Ok(LpOutcome::Unbounded),
        simplex::Dense::Optimal(x) => reduced.expand(&x),
    };
    if !lp.satisfied_by(&x) {
        return Err(LpError::SelfCheck("assignment violates a constraint".into()));
    }
    let value = lp.objective_value(&x);
    Ok(LpOutcome::Optimal {
        value,
        assignment: x,
    })
}
