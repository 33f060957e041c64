//! Lifting and generator-function properties, shared by the acceptance
//! runner and the property suites.

use cpa_core::compose::{CostGenerator, GeneratorFunction};
use cpa_core::lp::{self, LpOutcome, StandardFormLp};
use cpa_core::model::{Distribution, Rational};
use cpa_core::relations::{cross_identity, lift_check, relation_compose, BinaryRelation};
use num_traits::{One, Zero};
use rand::Rng;

use super::{q, Gen};

/// Lifting decided through an independent linear program over the
/// weighting variables.
fn lift_by_lp<T: Ord + Clone>(r: &BinaryRelation<T>, mu: &Distribution<T>, nu: &Distribution<T>) -> bool {
    let pairs: Vec<(T, T)> = r
        .pairs()
        .filter(|(x, y)| !mu.prob(x).is_zero() && !nu.prob(y).is_zero())
        .cloned()
        .collect();
    let mut lp = StandardFormLp::new(pairs.len());
    for (x, p) in mu.iter() {
        let row = pairs.iter().enumerate().filter(|(_, (a, _))| a == x).map(|(j, _)| (j, Rational::one())).collect();
        lp.add_row(row, p.clone());
    }
    for (y, p) in nu.iter() {
        let row = pairs.iter().enumerate().filter(|(_, (_, b))| b == y).map(|(j, _)| (j, Rational::one())).collect();
        lp.add_row(row, p.clone());
    }
    matches!(lp::solve(&lp).expect("well-formed"), LpOutcome::Optimal { .. })
}

/// `μ L(R) ν` by max-flow, cross-checked against the weighting conditions
/// and the linear-programming oracle.
pub fn lifts<T: Ord + Clone>(r: &BinaryRelation<T>, mu: &Distribution<T>, nu: &Distribution<T>) -> Result<bool, String> {
    let w = lift_check(r, mu, nu).map_err(|e| e.to_string())?;
    if let Some(w) = &w {
        if !w.witnesses(r, mu, nu) {
            return Err("weighting violates its conditions".into());
        }
    }
    if w.is_some() != lift_by_lp(r, mu, nu) {
        return Err("max-flow and linear program disagree".into());
    }
    Ok(w.is_some())
}

fn ensure(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn transitive_closure(r: &BinaryRelation<usize>) -> BinaryRelation<usize> {
    let mut c = r.clone();
    loop {
        let next = c.union(&relation_compose(&c, &c).expect("same universes"));
        if next == c {
            return c;
        }
        c = next;
    }
}

pub const LIFTING_PROPERTIES: [&str; 9] = [
    "pairs and Dirac distributions",
    "empty relation",
    "inclusion",
    "reflexivity",
    "symmetry",
    "transitivity",
    "composition",
    "product with identity",
    "convex combination",
];

/// Checks lifting property `k` (1-based) on one random instance.
pub fn lifting_property(k: usize, g: &mut Gen) -> Result<(), String> {
    let nx = g.rng.gen_range(1..=4usize);
    let ny = g.rng.gen_range(1..=4usize);
    let xs: Vec<usize> = (0..nx).collect();
    let ys: Vec<usize> = (10..10 + ny).collect();
    let density = g.rng.gen_range(0.2..0.8);
    match k {
        1 => {
            let r = g.relation(&xs, &ys, density);
            let x = xs[g.rng.gen_range(0..nx)];
            let y = ys[g.rng.gen_range(0..ny)];
            ensure(
                r.contains(&x, &y) == lifts(&r, &Distribution::dirac(x), &Distribution::dirac(y))?,
                "x R y differs from δx L(R) δy",
            )
        }
        2 => {
            let r = if g.rng.gen_bool(0.5) {
                BinaryRelation::empty(xs.clone(), ys.clone())
            } else {
                g.relation(&xs, &ys, density)
            };
            let mu = g.distribution(&xs, 3, 8);
            let nu = g.distribution(&ys, 3, 8);
            if r.is_empty() {
                ensure(!lifts(&r, &mu, &nu)?, "empty relation lifts")
            } else {
                let (x, y) = r.pairs().next().cloned().expect("nonempty");
                ensure(
                    lifts(&r, &Distribution::dirac(x), &Distribution::dirac(y))?,
                    "nonempty relation has an empty lifting",
                )
            }
        }
        3 => {
            let r = g.relation(&xs, &ys, density);
            let s = r.union(&g.relation(&xs, &ys, 0.3));
            let mu = g.distribution(&xs, 3, 8);
            let nu = match g.push(&mu, &r) {
                Some(nu) if g.rng.gen_bool(0.7) => nu,
                _ => g.distribution(&ys, 3, 8),
            };
            ensure(!lifts(&r, &mu, &nu)? || lifts(&s, &mu, &nu)?, "lifting not monotone")
        }
        4 => {
            let r = BinaryRelation::identity(xs.clone()).union(&g.relation(&xs, &xs, density));
            let mu = g.distribution(&xs, 4, 8);
            ensure(lifts(&r, &mu, &mu)?, "lifting of a reflexive relation is not reflexive")
        }
        5 => {
            let r0 = g.relation(&xs, &xs, density);
            let r = r0.union(&r0.inverse());
            let mu = g.distribution(&xs, 3, 8);
            let Some(nu) = g.push(&mu, &r) else { return Ok(()) };
            ensure(lifts(&r, &mu, &nu)? && lifts(&r, &nu, &mu)?, "lifting of a symmetric relation is not symmetric")
        }
        6 => {
            let r = transitive_closure(&g.relation(&xs, &xs, density));
            let mu = g.distribution(&xs, 3, 8);
            let Some(nu) = g.push(&mu, &r) else { return Ok(()) };
            let Some(rho) = g.push(&nu, &r) else { return Ok(()) };
            ensure(
                lifts(&r, &mu, &nu)? && lifts(&r, &nu, &rho)? && lifts(&r, &mu, &rho)?,
                "lifting of a transitive relation is not transitive",
            )
        }
        7 => {
            let zs: Vec<usize> = (20..20 + g.rng.gen_range(1..=4usize)).collect();
            let r = g.relation(&xs, &ys, density);
            let s = g.relation(&ys, &zs, density);
            let mu = g.distribution(&xs, 3, 8);
            let Some(nu) = g.push(&mu, &r) else { return Ok(()) };
            let Some(rho) = g.push(&nu, &s) else { return Ok(()) };
            let rs = relation_compose(&r, &s).map_err(|e| e.to_string())?;
            ensure(
                lifts(&r, &mu, &nu)? && lifts(&s, &nu, &rho)? && lifts(&rs, &mu, &rho)?,
                "lifting does not compose",
            )
        }
        8 => {
            let zs: Vec<usize> = (20..20 + g.rng.gen_range(1..=3usize)).collect();
            let r = g.relation(&xs, &ys, density);
            let mu = g.distribution(&xs, 3, 8);
            let Some(nu) = g.push(&mu, &r) else { return Ok(()) };
            let muz = g.distribution(&zs, 3, 8);
            let rz = cross_identity(&r, zs.clone());
            ensure(
                lifts(&rz, &mu.product(&muz), &nu.product(&muz))?,
                "lifting is not preserved by products with the identity",
            )
        }
        9 => {
            let r = g.relation(&xs, &ys, density);
            let n = g.rng.gen_range(1..=3usize);
            let ps = g.weights(n, 8);
            let mut left = Vec::new();
            let mut right = Vec::new();
            for p in ps {
                let mu = g.distribution(&xs, 3, 8);
                let Some(nu) = g.push(&mu, &r) else { return Ok(()) };
                if !lifts(&r, &mu, &nu)? {
                    return Err("pushed distribution is not related".into());
                }
                left.push((p.clone(), mu));
                right.push((p, nu));
            }
            let mu = Distribution::convex_combine(&left).map_err(|e| e.to_string())?;
            let nu = Distribution::convex_combine(&right).map_err(|e| e.to_string())?;
            ensure(lifts(&r, &mu, &nu)?, "lifting is not closed under convex combination")
        }
        _ => Err(format!("no lifting property {k}")),
    }
}

pub const GENERATOR_PROPERTIES: [&str; 4] = ["symmetric", "zero-preserving", "convex-distributive", "monotone"];

pub fn random_generator(g: &mut Gen) -> GeneratorFunction {
    if g.rng.gen_bool(0.5) {
        GeneratorFunction::Sum
    } else {
        GeneratorFunction::ScaledSum(q(g.rng.gen_range(1..=16), g.rng.gen_range(1..=8)))
    }
}

/// Checks generator property `k` (1-based) of `f` on one random instance.
pub fn generator_property(k: usize, f: &GeneratorFunction, g: &mut Gen) -> Result<(), String> {
    let x = g.cost(8);
    let y = g.cost(8);
    match k {
        1 => ensure(f.combine(&x, &y) == f.combine(&y, &x), "not symmetric"),
        2 => ensure(f.combine(&Rational::zero(), &Rational::zero()).is_zero(), "f(0, 0) is not 0"),
        3 => {
            let n = g.rng.gen_range(1..=4usize);
            let ps = g.weights(n, 8);
            let pts: Vec<(Rational, Rational)> = (0..n).map(|_| (g.cost(8), g.cost(8))).collect();
            let mx: Rational = ps.iter().zip(&pts).map(|(p, (a, _))| p * a).sum();
            let my: Rational = ps.iter().zip(&pts).map(|(p, (_, b))| p * b).sum();
            let mixed: Rational = ps.iter().zip(&pts).map(|(p, (a, b))| p * f.combine(a, b)).sum();
            ensure(f.combine(&mx, &my) == mixed, "not distributive over convex combination")
        }
        4 => {
            let x2 = &x + g.cost(8);
            let y2 = &y + g.cost(8);
            ensure(f.combine(&x, &y) <= f.combine(&x2, &y2), "not monotone")
        }
        _ => Err(format!("no generator property {k}")),
    }
}
