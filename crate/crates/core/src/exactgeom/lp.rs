//! Exact two-phase simplex over rationals with Bland's rule.
//!
//! Programs are `max c·x subject to A x ≤ b` with free variables; each free
//! variable is split into a difference of nonnegatives. Bland's rule makes
//! termination unconditional, and the lexicographic refinement below makes
//! optimizers deterministic for tie-sensitive callers.

use num_traits::{One, Signed, Zero};

use super::{dot, Vector};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Rational, point: Vector },
    Infeasible,
    /// A feasible direction along which the objective increases without bound.
    Unbounded { ray: Vector },
}

impl LpResult {
    pub fn optimal(self) -> Option<(Rational, Vector)> {
        match self {
            LpResult::Optimal { value, point } => Some((value, point)),
            _ => None,
        }
    }
}

/// Halfspace constraint ⟨normal, x⟩ ≤ offset.
pub type Constraint = (Vector, Rational);

struct Tableau {
    /// rows[i] has ncols entries plus rhs at the end; basis[i] is the basic column.
    rows: Vec<Vector>,
    obj: Vector, // reduced-cost row, ncols entries plus current -value
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    let t = p * &f;
                    *x = &*x - t;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (x, p) in self.obj.iter_mut().zip(&prow) {
                let t = p * &f;
                *x = &*x - t;
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule simplex to optimality. Returns Some(entering) if
    /// unbounded, None at optimum. `allowed` masks the eligible columns.
    fn solve(&mut self, allowed: &dyn Fn(usize) -> bool) -> Option<usize> {
        loop {
            // entering: smallest-index column with positive reduced cost
            let Some(c) = (0..self.ncols).find(|&j| allowed(j) && self.obj[j].is_positive())
            else {
                return None;
            };
            // leaving: min ratio, ties by smallest basic variable (Bland)
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.ncols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Some(c),
            }
        }
    }

    fn value_of(&self, col: usize) -> Rational {
        for (i, &b) in self.basis.iter().enumerate() {
            if b == col {
                return self.rows[i][self.ncols].clone();
            }
        }
        Rational::zero()
    }
}

/// Maximizes `objective · x` over `{x : ⟨a_i,x⟩ ≤ b_i}` with free x.
pub fn maximize(objective: &[Rational], constraints: &[Constraint]) -> LpResult {
    let n = objective.len();
    let m = constraints.len();
    // columns: x+ (n), x- (n), slack (m), artificial (m, lazily meaningful)
    let ncols = 2 * n + 2 * m;
    let art0 = 2 * n + m;
    let mut rows: Vec<Vector> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut any_artificial = false;
    for (i, (a, b)) in constraints.iter().enumerate() {
        assert_eq!(a.len(), n, "constraint dimension mismatch");
        let neg = b.is_negative();
        let s = if neg { -Rational::one() } else { Rational::one() };
        let mut row = vec![Rational::zero(); ncols + 1];
        for j in 0..n {
            row[j] = &a[j] * &s;
            row[n + j] = -&a[j] * &s;
        }
        row[2 * n + i] = s.clone(); // slack
        row[ncols] = b * &s;
        if neg {
            row[art0 + i] = Rational::one();
            basis.push(art0 + i);
            any_artificial = true;
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: vec![Rational::zero(); ncols + 1],
        basis,
        ncols,
    };

    if any_artificial {
        // phase 1: maximize -(sum of artificials)
        for j in art0..art0 + m {
            t.obj[j] = -Rational::one();
        }
        // price out basic artificials
        for i in 0..m {
            if t.basis[i] >= art0 {
                let row = t.rows[i].clone();
                for (x, p) in t.obj.iter_mut().zip(&row) {
                    *x = &*x + p;
                }
            }
        }
        let unbounded = t.solve(&|_| true);
        debug_assert!(unbounded.is_none());
        // the rhs entry of the objective row holds minus the objective value
        if t.obj[ncols].is_positive() {
            return LpResult::Infeasible;
        }
        // drive lingering zero-value artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= art0 {
                if let Some(c) = (0..art0).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, c);
                }
                // else: redundant row; harmless to leave
            }
        }
    }

    // phase 2
    t.obj = vec![Rational::zero(); ncols + 1];
    for j in 0..n {
        t.obj[j] = objective[j].clone();
        t.obj[n + j] = -objective[j].clone();
    }
    // price out basics
    for i in 0..m {
        let b = t.basis[i];
        if b < art0 && !t.obj[b].is_zero() {
            let f = t.obj[b].clone();
            let row = t.rows[i].clone();
            for (x, p) in t.obj.iter_mut().zip(&row) {
                let d = p * &f;
                *x = &*x - d;
            }
        }
    }
    let allowed = |j: usize| j < art0;
    if let Some(c) = t.solve(&allowed) {
        // unbounded: assemble the improving ray in x-space
        let mut full = vec![Rational::zero(); ncols];
        full[c] = Rational::one();
        for (i, row) in t.rows.iter().enumerate() {
            if !row[c].is_zero() {
                full[t.basis[i]] = -row[c].clone();
            }
        }
        let ray: Vector = (0..n).map(|j| &full[j] - &full[n + j]).collect();
        return LpResult::Unbounded { ray };
    }
    let point: Vector = (0..n).map(|j| t.value_of(j) - t.value_of(n + j)).collect();
    LpResult::Optimal {
        value: dot(objective, &point),
        point,
    }
}

/// Maximizes and then refines to the lexicographically smallest optimizer by
/// minimizing coordinates in order over the optimal face.
pub fn maximize_lex(objective: &[Rational], constraints: &[Constraint]) -> LpResult {
    let n = objective.len();
    let (value, mut point) = match maximize(objective, constraints) {
        LpResult::Optimal { value, point } => (value, point),
        other => return other,
    };
    let mut cs: Vec<Constraint> = constraints.to_vec();
    // pin to the optimal face: objective·x ≥ value
    cs.push((super::vneg(objective), -value.clone()));
    for k in 0..n {
        let mut neg_ek = vec![Rational::zero(); n];
        neg_ek[k] = -Rational::one();
        match maximize(&neg_ek, &cs) {
            LpResult::Optimal { point: p, .. } => {
                point = p;
                let mut ek = vec![Rational::zero(); n];
                ek[k] = Rational::one();
                cs.push((ek, point[k].clone()));
                let mut nek = vec![Rational::zero(); n];
                nek[k] = -Rational::one();
                cs.push((nek, -point[k].clone()));
            }
            // coordinate unbounded below on the face: keep current optimizer
            LpResult::Unbounded { .. } => break,
            LpResult::Infeasible => unreachable!("optimal face became infeasible"),
        }
    }
    LpResult::Optimal { value, point }
}

/// Feasibility check; returns a feasible point if one exists.
pub fn feasible_point(dim: usize, constraints: &[Constraint]) -> Option<Vector> {
    match maximize(&vec![Rational::zero(); dim], constraints) {
        LpResult::Optimal { point, .. } => Some(point),
        _ => None,
    }
}
