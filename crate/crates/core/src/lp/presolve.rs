use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::StandardFormLp;
use crate::model::Rational;

#[derive(Clone)]
enum Var {
    Free,
    Fixed(Rational),
    /// `x = k · x_j` with `k > 0`.
    Scaled(Rational, usize),
}

enum Term {
    Const(Rational),
    Lin(Rational, usize),
}

/// Problem left after presolve, over the free variables only.
pub(super) struct Reduced {
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub rhs: Vec<Rational>,
    pub objective: Vec<Rational>,
    free: Vec<usize>,
    vars: Vec<Var>,
}

impl Reduced {
    /// Maps a solution of the reduced problem back to all variables.
    pub fn expand(&self, x: &[Rational]) -> Vec<Rational> {
        let mut full = vec![Rational::zero(); self.vars.len()];
        for (k, &j) in self.free.iter().enumerate() {
            full[j] = x[k].clone();
        }
        for j in 0..self.vars.len() {
            full[j] = match resolve(&self.vars, j) {
                Term::Const(c) => c,
                Term::Lin(k, i) => k * &full[i],
            };
        }
        full
    }
}

fn resolve(vars: &[Var], mut j: usize) -> Term {
    let mut k: Option<Rational> = None;
    loop {
        match &vars[j] {
            Var::Free => return Term::Lin(k.unwrap_or_else(|| Rational::from_integer(1.into())), j),
            Var::Fixed(c) => return Term::Const(match k {
                Some(k) => k * c,
                None => c.clone(),
            }),
            Var::Scaled(f, i) => {
                k = Some(match k {
                    Some(k) => k * f,
                    None => f.clone(),
                });
                j = *i;
            }
        }
    }
}

/// Substitutes resolved variables into a row, returning the free-variable
/// coefficients and the adjusted right-hand side.
fn rewrite(vars: &[Var], row: &[(usize, Rational)], rhs: &Rational) -> (BTreeMap<usize, Rational>, Rational) {
    let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut b = rhs.clone();
    for (j, a) in row {
        match resolve(vars, *j) {
            Term::Const(c) => b -= a * c,
            Term::Lin(k, i) => *coeffs.entry(i).or_insert_with(Rational::zero) += a * k,
        }
    }
    coeffs.retain(|_, v| !v.is_zero());
    (coeffs, b)
}

/// Returns `None` when presolve proves infeasibility.
pub(super) fn presolve(lp: &StandardFormLp, zero: &[usize]) -> Option<Reduced> {
    let mut vars = vec![Var::Free; lp.num_vars];
    for &j in zero {
        vars[j] = Var::Fixed(Rational::zero());
    }
    let mut rows: Vec<(Vec<(usize, Rational)>, Rational)> =
        lp.rows.iter().cloned().zip(lp.rhs.iter().cloned()).collect();
    loop {
        let mut changed = false;
        let mut kept = Vec::with_capacity(rows.len());
        for (row, rhs) in rows {
            let (coeffs, b) = rewrite(&vars, &row, &rhs);
            if coeffs.is_empty() {
                if !b.is_zero() {
                    return None;
                }
                changed = true;
                continue;
            }
            let all_pos = coeffs.values().all(|a| a.is_positive());
            let all_neg = coeffs.values().all(|a| a.is_negative());
            if (all_pos && b.is_negative()) || (all_neg && b.is_positive()) {
                return None;
            }
            if coeffs.len() == 1 {
                let (&j, a) = coeffs.iter().next().unwrap();
                let v = &b / a;
                if v.is_negative() {
                    return None;
                }
                vars[j] = Var::Fixed(v);
                changed = true;
                continue;
            }
            if b.is_zero() && (all_pos || all_neg) {
                for &j in coeffs.keys() {
                    vars[j] = Var::Fixed(Rational::zero());
                }
                changed = true;
                continue;
            }
            if b.is_zero() && coeffs.len() == 2 {
                let mut it = coeffs.iter();
                let (&i, a) = it.next().unwrap();
                let (&j, c) = it.next().unwrap();
                // a x_i + c x_j = 0 with opposite signs: x_i = (-c / a) x_j.
                vars[i] = Var::Scaled(-(c / a), j);
                changed = true;
                continue;
            }
            kept.push((coeffs.into_iter().collect(), b));
        }
        rows = kept;
        if !changed {
            break;
        }
    }

    let mut position = vec![usize::MAX; lp.num_vars];
    let mut free = Vec::new();
    for (j, v) in vars.iter().enumerate() {
        if matches!(v, Var::Free) {
            position[j] = free.len();
            free.push(j);
        }
    }
    let mut objective = vec![Rational::zero(); free.len()];
    for (j, c) in lp.objective.iter().enumerate() {
        if let Term::Lin(k, i) = resolve(&vars, j) {
            objective[position[i]] += c * k;
        }
    }
    let (rows, rhs) = rows
        .into_iter()
        .map(|(row, b)| (row.into_iter().map(|(j, a)| (position[j], a)).collect(), b))
        .unzip();
    Some(Reduced {
        rows,
        rhs,
        objective,
        free,
        vars,
    })
}
