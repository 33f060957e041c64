use num_traits::{One, Signed, Zero};

use crate::model::Rational;

pub(super) enum Dense {
    Infeasible,
    Unbounded,
    Optimal(Vec<Rational>),
}

struct Tableau {
    t: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs.
    d: Vec<Rational>,
    /// Objective value of the current basic solution.
    z: Rational,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let inv = Rational::one() / &self.t[r][j];
        let nz: Vec<usize> = (0..self.t[r].len()).filter(|&k| !self.t[r][k].is_zero()).collect();
        for &k in &nz {
            self.t[r][k] *= &inv;
        }
        self.b[r] *= &inv;
        let (before, rest) = self.t.split_at_mut(r);
        let (row_r, after) = rest.split_first_mut().unwrap();
        for (i, row) in before.iter_mut().enumerate().chain(after.iter_mut().enumerate().map(|(k, row)| (k + r + 1, row))) {
            if row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for &k in &nz {
                let delta = &f * &row_r[k];
                row[k] -= delta;
            }
            let delta = &f * &self.b[r];
            self.b[i] -= delta;
        }
        if !self.d[j].is_zero() {
            let f = self.d[j].clone();
            for &k in &nz {
                let delta = &f * &row_r[k];
                self.d[k] -= delta;
            }
            self.z += &f * &self.b[r];
        }
        self.basis[r] = j;
    }

    /// Bland's rule iterations over columns `< limit`. Returns false when
    /// the objective is unbounded below.
    fn run(&mut self, limit: usize) -> bool {
        loop {
            let Some(j) = (0..limit).find(|&j| self.d[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }
}

/// Two-phase primal simplex on `min c·x, A x = b, x ≥ 0`.
pub(super) fn solve_dense(rows: &[Vec<(usize, Rational)>], rhs: &[Rational], c: &[Rational]) -> Dense {
    let m = rows.len();
    let n = c.len();
    let mut t = vec![vec![Rational::zero(); n + m]; m];
    let mut b = rhs.to_vec();
    for (i, row) in rows.iter().enumerate() {
        for (j, a) in row {
            t[i][*j] += a;
        }
        if b[i].is_negative() {
            b[i] = -&b[i];
            for v in t[i].iter_mut().take(n) {
                *v = -&*v;
            }
        }
        t[i][n + i] = Rational::one();
    }
    let mut d = vec![Rational::zero(); n + m];
    for row in &t {
        for j in 0..n {
            if !row[j].is_zero() {
                d[j] -= &row[j];
            }
        }
    }
    let z = b.iter().sum();
    let mut tab = Tableau {
        t,
        b,
        basis: (n..n + m).collect(),
        d,
        z,
    };
    tab.run(n);
    if !tab.z.is_zero() {
        return Dense::Infeasible;
    }

    // Drive remaining artificials out of the basis; rows where that is
    // impossible are linear combinations of the others.
    let mut redundant = vec![false; m];
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| !tab.t[i][j].is_zero()) {
            Some(j) => tab.pivot(i, j),
            None => redundant[i] = true,
        }
    }
    let mut keep = redundant.iter().map(|r| !r);
    tab.t.retain(|_| keep.next().unwrap());
    let mut keep = redundant.iter().map(|r| !r);
    tab.b.retain(|_| keep.next().unwrap());
    let mut keep = redundant.iter().map(|r| !r);
    tab.basis.retain(|_| keep.next().unwrap());
    for row in tab.t.iter_mut() {
        row.truncate(n);
    }

    tab.d = c.to_vec();
    tab.z = Rational::zero();
    for i in 0..tab.t.len() {
        let cb = c[tab.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..n {
            if !tab.t[i][j].is_zero() {
                let delta = &cb * &tab.t[i][j];
                tab.d[j] -= delta;
            }
        }
        tab.z += &cb * &tab.b[i];
    }
    if !tab.run(n) {
        return Dense::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &j) in tab.basis.iter().enumerate() {
        x[j] = tab.b[i].clone();
    }
    Dense::Optimal(x)
}
